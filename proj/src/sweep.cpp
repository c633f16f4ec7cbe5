#include "msmcell/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "msmcell/errors.hpp"

namespace msmcell {

std::string sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::polymer_modulus: return "polymer_E";
    case SweepParam::aspect_ratio: return "aspect_ratio";
    case SweepParam::volume_fraction: return "volume_fraction";
    case SweepParam::field_angle: return "field_angle";
  }
  throw Error("unknown sweep parameter");
}

SweepParam sweep_param_from_name(const std::string& name) {
  if (name == "polymer_E") return SweepParam::polymer_modulus;
  if (name == "aspect_ratio") return SweepParam::aspect_ratio;
  if (name == "volume_fraction") return SweepParam::volume_fraction;
  if (name == "field_angle") return SweepParam::field_angle;
  throw ConfigError("unknown sweep parameter: " + name);
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo)) throw ConfigError("need 0 < lo < hi");
  if (points < 2) throw ConfigError("need at least 2 points");
  std::vector<double> v(points);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i)
    v[i] = std::exp(llo + (lhi - llo) * i / (points - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

namespace {

struct DemagCache {
  std::mutex mu;
  std::map<std::pair<std::uint64_t, int>, DemagTensor> entries;

  DemagTensor get(const RasterGrid& raster) {
    const std::pair<std::uint64_t, int> key{raster.content_hash(), raster.n};
    {
      std::lock_guard<std::mutex> lock(mu);
      auto it = entries.find(key);
      if (it != entries.end()) return it->second;
    }
    SpectralWorkspace ws(raster.n);
    DemagTensor d = demag_tensor(raster, ws);
    std::lock_guard<std::mutex> lock(mu);
    return entries.emplace(key, std::move(d)).first->second;
  }
};

void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw ConfigError("sweep values list is empty");
  switch (spec.param) {
    case SweepParam::polymer_modulus:
      for (double v : spec.values)
        if (!(v >= 1e-3) || !(v <= 1e5))
          throw ConfigError("polymer modulus sweep values must lie in "
                            "[1e-3, 1e5] MPa");
      break;
    case SweepParam::aspect_ratio:
    case SweepParam::volume_fraction:
      if (!spec.generator)
        throw ConfigError("shape sweeps need a geometry generator");
      break;
    case SweepParam::field_angle:
      break;
  }
}

std::vector<SweepRecord> evaluate_point(const SweepSpec& spec, int point,
                                        DemagCache& cache) {
  const double value = spec.values[point];

  CellProblemSpec s = spec.base;
  GeneratorSpec gen = spec.generator.value_or(GeneratorSpec{});
  switch (spec.param) {
    case SweepParam::polymer_modulus:
      s.materials.polymer_e = value;
      if (spec.generator) s.cell = gen.build();
      break;
    case SweepParam::aspect_ratio:
      gen.aspect = value;
      s.cell = gen.build();
      break;
    case SweepParam::volume_fraction:
      gen.fraction = value;
      s.cell = gen.build();
      break;
    case SweepParam::field_angle:
      s.materials.field_angle = value;
      if (spec.generator) s.cell = gen.build();
      break;
  }

  RasterGrid raster = rasterize(s.cell, s.resolution);
  DemagTensor d = cache.get(raster);
  CellContext ctx(s, std::move(raster), std::move(d));
  const CellResult res = solve_cell(ctx);

  std::vector<SweepRecord> out;
  out.reserve(2 * res.assignments.size());
  for (const AssignmentResult& ar : res.assignments) {
    for (int mode = 0; mode < 2; ++mode) {
      SweepRecord r;
      r.point = point;
      r.value = value;
      r.assignment = assignment_label(ar.phases);
      r.clamped = mode == 1;
      r.energy = r.clamped ? ar.clamped_energy : ar.free_energy;
      r.beta = r.clamped ? MacroStrain::Zero() : ar.beta;
      r.strain_along_field = r.clamped ? 0.0 : ar.strain_along_field;
      r.work_output = res.work_output;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

SweepTable run_sweep(const SweepSpec& spec) {
  validate(spec);

  const int n_points = static_cast<int>(spec.values.size());
  const int n_p = spec.generator ? 1 : spec.base.cell.particle_count();

  SweepTable table;
  table.param = spec.param;
  table.reference_assignment.assign(
      n_p, static_cast<char>('0' + spec.base.materials.reference_phase));

  std::vector<std::vector<SweepRecord>> per_point(n_points);
  std::vector<std::string> errors(n_points);
  DemagCache cache;
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      const int p = next.fetch_add(1);
      if (p >= n_points) return;
      try {
        per_point[p] = evaluate_point(spec, p, cache);
      } catch (const std::exception& e) {
        errors[p] = e.what();
        if (errors[p].empty()) errors[p] = "unknown error";
      }
    }
  };

  int workers = spec.threads > 0
                    ? spec.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, n_points);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int p = 0; p < n_points; ++p) {
    if (!errors[p].empty()) {
      table.failures.push_back({p, spec.values[p], errors[p]});
      continue;
    }
    for (auto& r : per_point[p]) table.records.push_back(std::move(r));
  }
  return table;
}

std::vector<Crossing> find_crossings(const SweepTable& table) {
  // transformed = best free energy among non-reference assignments
  std::map<int, double> un, tr, val;
  for (const auto& r : table.records) {
    if (r.clamped) continue;
    val[r.point] = r.value;
    const double e = r.energy.total();
    if (r.assignment == table.reference_assignment) {
      un[r.point] = e;
    } else {
      auto it = tr.find(r.point);
      if (it == tr.end() || e < it->second) tr[r.point] = e;
    }
  }

  std::vector<std::pair<double, double>> gap;  // (value, transformed - un)
  for (const auto& [p, e_un] : un) {
    auto it = tr.find(p);
    if (it == tr.end()) continue;
    gap.emplace_back(val[p], it->second - e_un);
  }

  std::vector<Crossing> out;
  for (std::size_t i = 0; i + 1 < gap.size(); ++i) {
    const auto [x0, d0] = gap[i];
    const auto [x1, d1] = gap[i + 1];
    if (d0 == 0.0) {
      out.push_back({"transformed", "untransformed", x0});
      continue;
    }
    if ((d0 < 0.0) == (d1 < 0.0) || d1 == 0.0) continue;
    const double lx =
        std::log(x0) + (0.0 - d0) * (std::log(x1) - std::log(x0)) / (d1 - d0);
    out.push_back({"transformed", "untransformed", std::exp(lx)});
  }
  if (!gap.empty() && gap.back().second == 0.0)
    out.push_back({"transformed", "untransformed", gap.back().first});
  return out;
}

const char kCsvHeader[] =
    "sweep_param,sweep_value,assignment,beta_mode,E_total_MPa,E_elastic_MPa,"
    "E_aniso_MPa,E_demag_MPa,E_zeeman_MPa,beta_xx,beta_xy,beta_yy,"
    "strain_along_field,work_output_MPa";

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

}  // namespace

void write_csv(const SweepTable& table, std::ostream& os) {
  const std::string name = sweep_param_name(table.param);
  os << kCsvHeader << '\n';
  for (const auto& r : table.records) {
    os << name << ',' << fmt(r.value) << ',' << r.assignment << ','
       << (r.clamped ? "clamped" : "free") << ',' << fmt(r.energy.total())
       << ',' << fmt(r.energy.elastic) << ',' << fmt(r.energy.anisotropy)
       << ',' << fmt(r.energy.demag) << ',' << fmt(r.energy.zeeman) << ','
       << fmt(r.beta(0, 0)) << ',' << fmt(r.beta(0, 1)) << ','
       << fmt(r.beta(1, 1)) << ',' << fmt(r.strain_along_field) << ','
       << fmt(r.work_output) << '\n';
  }
}

void write_csv_file(const SweepTable& table, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open CSV output file: " + path);
  write_csv(table, os);
  if (!os) throw Error("failed writing CSV output file: " + path);
}

}  // namespace msmcell
