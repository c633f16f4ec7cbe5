#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "msmcell/config.hpp"
#include "msmcell/errors.hpp"
#include "msmcell/svg_plot.hpp"

namespace {

using namespace msmcell;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  int threads = 0;
  int resolution = 0;  // 0: keep config value
  std::string seed_hex;
};

void add_common(CLI::App* sub, CommonOpts& o, bool with_threads) {
  sub->add_option("--config", o.config_path, "JSON config file");
  sub->add_option("--out", o.out_path, "output path override");
  if (with_threads)
    sub->add_option("--threads", o.threads,
                    "worker threads, 0 = all cores")
        ->envname("MSMCELL_THREADS");
  sub->add_option("--resolution", o.resolution, "grid resolution override");
  sub->add_option("--seed", o.seed_hex, "multi-start seed (hex)");
}

Config load(const CommonOpts& o) {
  Config cfg = o.config_path.empty()
                   ? parse_config_text("{}", "<defaults>")
                   : load_config(o.config_path);
  if (o.resolution != 0) {
    if (o.resolution < 16 || !is_pow2(o.resolution))
      throw ConfigError("--resolution must be a power of two >= 16");
    cfg.problem.resolution = o.resolution;
  }
  if (!o.seed_hex.empty()) {
    try {
      cfg.problem.seed = std::stoull(o.seed_hex, nullptr, 16);
    } catch (const std::exception&) {
      throw ConfigError("--seed expects a hexadecimal value");
    }
  }
  return cfg;
}

void print_breakdown(const char* tag, const EnergyBreakdown& e) {
  std::printf("  %-8s total %12.6f   elastic %12.6f   aniso %10.6f   "
              "demag %10.6f   zeeman %10.6f\n",
              tag, e.total(), e.elastic, e.anisotropy, e.demag, e.zeeman);
}

int cmd_solve(const CommonOpts& opts) {
  const Config cfg = load(opts);
  const CellResult res = solve_cell(cfg.problem);

  std::printf("cell: %d particle(s), resolution %d, polymer E %g MPa\n",
              cfg.problem.cell.particle_count(), cfg.problem.resolution,
              cfg.problem.materials.polymer_e);
  for (int i = 0; i < static_cast<int>(res.assignments.size()); ++i) {
    const AssignmentResult& ar = res.assignments[i];
    const char* role = i == res.untransformed_index ? " (untransformed)"
                       : i == res.transformed_index ? " (transformed)"
                                                    : "";
    std::printf("assignment %s%s\n", assignment_label(ar.phases).c_str(),
                role);
    print_breakdown("free", ar.free_energy);
    print_breakdown("clamped", ar.clamped_energy);
    std::printf("  beta [[%11.4e, %11.4e], [%11.4e, %11.4e]]   "
                "strain along field %11.4e\n",
                ar.beta(0, 0), ar.beta(0, 1), ar.beta(1, 0), ar.beta(1, 1),
                ar.strain_along_field);
  }
  std::printf("global minimum: assignment %s (free)\n",
              assignment_label(res.assignments[res.global_min_index].phases)
                  .c_str());
  std::printf("work output: %.6f MPa\n", res.work_output);

  if (!opts.out_path.empty()) {
    // one-point table in the sweep schema
    SweepTable t;
    t.param = SweepParam::polymer_modulus;
    t.reference_assignment.assign(
        cfg.problem.cell.particle_count(),
        static_cast<char>('0' + cfg.problem.materials.reference_phase));
    for (const AssignmentResult& ar : res.assignments) {
      for (int mode = 0; mode < 2; ++mode) {
        SweepRecord r;
        r.point = 0;
        r.value = cfg.problem.materials.polymer_e;
        r.assignment = assignment_label(ar.phases);
        r.clamped = mode == 1;
        r.energy = r.clamped ? ar.clamped_energy : ar.free_energy;
        r.beta = r.clamped ? MacroStrain::Zero() : ar.beta;
        r.strain_along_field = r.clamped ? 0.0 : ar.strain_along_field;
        r.work_output = res.work_output;
        t.records.push_back(std::move(r));
      }
    }
    write_csv_file(t, opts.out_path);
    std::printf("wrote %zu records to %s\n", t.records.size(),
                opts.out_path.c_str());
  }

  if (cfg.output.debug_dumps) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output.svg_dir);
    const RasterGrid raster =
        rasterize(cfg.problem.cell, cfg.problem.resolution);
    const ElasticSystem sys(raster, cfg.problem.cell, cfg.problem.materials);
    const AssignmentResult& best = res.assignments[res.global_min_index];
    const ElasticSolution sol =
        sys.minimize(best.phases, BetaSpec::free_strain());
    const VectorField disp = sys.node_displacement(sol);
    const std::string dir = cfg.output.svg_dir;
    dump_scalar_field(dir + "/displacement_x.txt", disp.x, raster.n);
    dump_scalar_field(dir + "/displacement_y.txt", disp.y, raster.n);
    dump_scalar_field(dir + "/polymer_energy.txt",
                      sys.polymer_energy_density(sol), raster.n);
    std::vector<Eigen::Vector2d> m(raster.particle_count());
    for (int i = 0; i < raster.particle_count(); ++i)
      m[i] = best.magnetization.direction(i);
    SpectralWorkspace ws(raster.n);
    const GradientField g = solve_periodic_potential(fill_field(raster, m), ws);
    dump_scalar_field(dir + "/grad_potential_x.txt", g.x, raster.n);
    dump_scalar_field(dir + "/grad_potential_y.txt", g.y, raster.n);
    std::printf("wrote debug dumps to %s\n", dir.c_str());
  }
  return 0;
}

int cmd_sweep(const CommonOpts& opts) {
  const Config cfg = load(opts);
  if (!cfg.sweep_param)
    throw ConfigError(
        "config defines no sweep axis: set materials.polymer.E_sweep or a "
        "sweep section");

  SweepSpec spec;
  spec.base = cfg.problem;
  spec.generator = cfg.generator;
  spec.param = *cfg.sweep_param;
  spec.values = cfg.sweep_values;
  spec.threads = opts.threads;
  const SweepTable table = run_sweep(spec);

  for (const FailedPoint& f : table.failures)
    std::fprintf(stderr, "sweep point %d (value %g) failed: %s\n", f.point,
                 f.value, f.message.c_str());
  if (table.records.empty()) {
    std::fprintf(stderr, "all %zu sweep points failed\n",
                 cfg.sweep_values.size());
    return 3;
  }

  const std::string csv =
      opts.out_path.empty() ? cfg.output.csv_path : opts.out_path;
  write_csv_file(table, csv);
  const std::size_t points =
      cfg.sweep_values.size() - table.failures.size();
  std::printf("wrote %zu records (%zu points) to %s\n", table.records.size(),
              points, csv.c_str());

  if (spec.param == SweepParam::polymer_modulus) {
    const auto crossings = find_crossings(table);
    if (crossings.empty()) {
      std::printf("no transformed/untransformed free-energy crossing\n");
    } else {
      for (const Crossing& c : crossings)
        std::printf("%s/%s free energies cross at %s = %.4g\n",
                    c.series_a.c_str(), c.series_b.c_str(),
                    sweep_param_name(spec.param).c_str(), c.value);
    }
  }

  double peak = 0.0, peak_at = table.records.front().value;
  for (const SweepRecord& r : table.records) {
    if (r.work_output > peak) {
      peak = r.work_output;
      peak_at = r.value;
    }
  }
  std::printf("peak work output %.6g MPa at %s = %.6g\n", peak,
              sweep_param_name(spec.param).c_str(), peak_at);
  return 0;
}

int cmd_plot(const CommonOpts& opts) {
  const Config cfg = load(opts);
  const std::string dir =
      opts.out_path.empty() ? cfg.output.svg_dir : opts.out_path;
  const CsvTable table = read_csv(cfg.output.csv_path);
  write_plots(table, dir);
  std::printf("wrote energy.svg, strain.svg, work_output.svg to %s\n",
              dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cell-problem solver for magnetic shape-memory particle "
               "composites"};
  app.require_subcommand(1);

  CommonOpts solve_opts, sweep_opts, plot_opts;
  CLI::App* solve = app.add_subcommand(
      "solve", "solve the cell problem for one parameter set");
  add_common(solve, solve_opts, true);
  CLI::App* sweep = app.add_subcommand(
      "sweep", "run the configured parameter sweep and write CSV");
  add_common(sweep, sweep_opts, true);
  CLI::App* plot =
      app.add_subcommand("plot", "render SVG plots from a sweep CSV");
  add_common(plot, plot_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (plot->parsed()) return cmd_plot(plot_opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
