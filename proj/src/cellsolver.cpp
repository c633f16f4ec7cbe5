#include "msmcell/cellsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "msmcell/errors.hpp"

namespace msmcell {

std::string assignment_label(const PhaseAssignment& phases) {
  std::string s;
  s.reserve(phases.size());
  for (int p : phases) s.push_back(static_cast<char>('0' + p));
  return s;
}

CellContext::CellContext(const CellProblemSpec& spec) : spec_(spec) {
  raster_ = rasterize(spec_.cell, spec_.resolution);
  SpectralWorkspace ws(spec_.resolution);
  demag_ = demag_tensor(raster_, ws);
  elastic_ = std::make_shared<const ElasticSystem>(raster_, spec_.cell,
                                                   spec_.materials);
}

CellContext::CellContext(const CellProblemSpec& spec, RasterGrid raster,
                         DemagTensor d)
    : spec_(spec), raster_(std::move(raster)), demag_(std::move(d)) {
  elastic_ = std::make_shared<const ElasticSystem>(raster_, spec_.cell,
                                                   spec_.materials);
}

EvalResult energy_of_assignment(const CellContext& ctx,
                                const PhaseAssignment& phases,
                                const BetaSpec& mode) {
  const MagneticParams pars = ctx.spec().materials.magnetic();
  const MagneticMinimum mag =
      minimize_magnetization(phases, ctx.demag(), pars, ctx.spec().cell,
                             ctx.raster(), ctx.spec().seed);
  const ElasticSolution el = ctx.elastic().minimize(phases, mode);

  EvalResult r;
  r.breakdown.elastic = el.energy;
  r.breakdown.anisotropy = mag.breakdown.anisotropy;
  r.breakdown.demag = mag.breakdown.demag;
  r.breakdown.zeeman = mag.breakdown.zeeman;
  r.beta = el.beta;
  r.magnetization = mag.state;
  r.elastic = el;
  return r;
}

namespace {

PhaseAssignment assignment_from_mask(int n_p, unsigned mask) {
  PhaseAssignment phases(n_p);
  for (int i = 0; i < n_p; ++i) phases[i] = (mask >> i) & 1u ? 2 : 1;
  return phases;
}

double along_field(const MacroStrain& beta, const MaterialSet& mat) {
  const Eigen::Vector2d e(std::cos(mat.field_angle),
                          std::sin(mat.field_angle));
  return e.dot(beta * e);
}

}  // namespace

CellResult solve_cell(const CellContext& ctx) {
  const int n_p = ctx.raster().particle_count();
  if (n_p > 12) {
    std::ostringstream os;
    os << "exhaustive assignment enumeration supports at most 12 particles, "
          "got "
       << n_p;
    throw SizeError(os.str());
  }
  const MaterialSet& mat = ctx.spec().materials;

  CellResult res;
  const unsigned count = 1u << n_p;
  res.assignments.reserve(count);
  for (unsigned mask = 0; mask < count; ++mask) {
    const PhaseAssignment phases = assignment_from_mask(n_p, mask);
    EvalResult free_ev =
        energy_of_assignment(ctx, phases, BetaSpec::free_strain());
    EvalResult cl_ev = energy_of_assignment(
        ctx, phases, BetaSpec::clamp(MacroStrain::Zero()));

    AssignmentResult ar;
    ar.phases = phases;
    ar.free_energy = free_ev.breakdown;
    ar.clamped_energy = cl_ev.breakdown;
    ar.beta = free_ev.beta;
    ar.strain_along_field = along_field(free_ev.beta, mat);
    ar.magnetization = free_ev.magnetization;
    res.assignments.push_back(std::move(ar));

    const bool is_ref = std::all_of(
        phases.begin(), phases.end(),
        [&](int p) { return p == mat.reference_phase; });
    if (is_ref) res.untransformed_index = static_cast<int>(mask);
  }

  for (int i = 0; i < static_cast<int>(count); ++i) {
    const double e = res.assignments[i].free_energy.total();
    if (res.global_min_index < 0 ||
        e < res.assignments[res.global_min_index].free_energy.total())
      res.global_min_index = i;
    if (i == res.untransformed_index) continue;
    if (res.transformed_index < 0 ||
        e < res.assignments[res.transformed_index].free_energy.total())
      res.transformed_index = i;
  }

  const AssignmentResult& tr = res.transformed();
  res.work_output = tr.clamped_energy.total() - tr.free_energy.total();
  return res;
}

CellResult solve_cell(const CellProblemSpec& spec) {
  return solve_cell(CellContext(spec));
}

double work_output(const CellProblemSpec& spec) {
  return solve_cell(spec).work_output;
}

namespace {

// Free energy gap (transformed minus untransformed) at one modulus,
// reusing geometry-level precomputations.
double free_energy_gap(const CellProblemSpec& spec, const RasterGrid& raster,
                       const DemagTensor& d, double modulus) {
  CellProblemSpec s = spec;
  s.materials.polymer_e = modulus;
  CellContext ctx(s, raster, d);

  const int n_p = raster.particle_count();
  const unsigned count = 1u << n_p;
  double best_other = std::numeric_limits<double>::infinity();
  double ref_energy = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < count; ++mask) {
    const PhaseAssignment phases = assignment_from_mask(n_p, mask);
    const EvalResult ev =
        energy_of_assignment(ctx, phases, BetaSpec::free_strain());
    const bool is_ref = std::all_of(
        phases.begin(), phases.end(),
        [&](int p) { return p == s.materials.reference_phase; });
    if (is_ref)
      ref_energy = ev.breakdown.total();
    else
      best_other = std::min(best_other, ev.breakdown.total());
  }
  return best_other - ref_energy;
}

}  // namespace

double critical_modulus(const CellProblemSpec& spec, double e_lo,
                        double e_hi) {
  if (!(e_lo > 0.0) || !(e_hi > e_lo))
    throw NoBracketError("modulus bracket must satisfy 0 < lo < hi");
  if (spec.cell.particle_count() > 12)
    throw SizeError("exhaustive assignment enumeration supports at most 12 "
                    "particles");

  const RasterGrid raster = rasterize(spec.cell, spec.resolution);
  DemagTensor d;
  {
    SpectralWorkspace ws(spec.resolution);
    d = demag_tensor(raster, ws);
  }

  double f_lo = free_energy_gap(spec, raster, d, e_lo);
  double f_hi = free_energy_gap(spec, raster, d, e_hi);
  if (f_lo == 0.0) return e_lo;
  if (f_hi == 0.0) return e_hi;
  if ((f_lo < 0.0) == (f_hi < 0.0)) {
    std::ostringstream os;
    os << "no sign change of the free-energy gap over [" << e_lo << ", "
       << e_hi << "] MPa: gap(lo) = " << f_lo << ", gap(hi) = " << f_hi;
    throw NoBracketError(os.str());
  }

  double lo = e_lo, hi = e_hi;
  while (hi / lo > 1.001) {
    const double mid = std::sqrt(lo * hi);
    const double f_mid = free_energy_gap(spec, raster, d, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return std::sqrt(lo * hi);
}

}  // namespace msmcell
