#include "msmcell/magnetic.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "msmcell/errors.hpp"

namespace msmcell {

EasyAxes easy_axes(const UnitCell& cell) {
  EasyAxes ea;
  ea.axes.resize(cell.particle_count());
  for (int i = 0; i < cell.particle_count(); ++i) {
    const Eigen::Matrix2d r = rotation(cell.particles[i].lattice_angle);
    ea.axes[i][0] = r * Eigen::Vector2d(1, 0);
    ea.axes[i][1] = r * Eigen::Vector2d(0, 1);
  }
  return ea;
}

double anisotropy_energy(const MagnetizationState& state,
                         const std::vector<int>& phases, const UnitCell& cell,
                         const RasterGrid& raster, const MagneticParams& pars) {
  const EasyAxes ea = easy_axes(cell);
  double e = 0.0;
  for (int i = 0; i < raster.particle_count(); ++i) {
    const double mf = state.direction(i).dot(ea.of(i, phases[i]));
    e += raster.areas[i] * pars.k_u * (1.0 - mf * mf);
  }
  return e;
}

double zeeman_energy(const MagnetizationState& state, const RasterGrid& raster,
                     const MagneticParams& pars) {
  double e = 0.0;
  for (int i = 0; i < raster.particle_count(); ++i)
    e -= pars.ms_over_mu0 * raster.areas[i] *
         pars.h_ext.dot(state.direction(i));
  return e;
}

MagneticBreakdown magnetic_energy(const MagnetizationState& state,
                                  const std::vector<int>& phases,
                                  const DemagTensor& d,
                                  const MagneticParams& pars,
                                  const UnitCell& cell,
                                  const RasterGrid& raster) {
  MagneticBreakdown b;
  b.anisotropy = anisotropy_energy(state, phases, cell, raster, pars);
  b.demag = pars.ms2_over_mu0 * d.energy(state.stacked());
  b.zeeman = zeeman_energy(state, raster, pars);
  return b;
}

namespace {

// Precomputed per-assignment data for the angle objective.
struct AngleObjective {
  int n_p;
  std::vector<double> aku;              // a_i * k_u
  std::vector<Eigen::Vector2d> axis;    // easy axis of the assigned phase
  std::vector<Eigen::Vector2d> hz;      // ms_over_mu0 * a_i * h
  Eigen::MatrixXd dd;                   // ms2_over_mu0 * D

  static AngleObjective build(const std::vector<int>& phases,
                              const DemagTensor& d, const MagneticParams& pars,
                              const UnitCell& cell, const RasterGrid& raster) {
    AngleObjective o;
    o.n_p = raster.particle_count();
    const EasyAxes ea = easy_axes(cell);
    o.aku.resize(o.n_p);
    o.axis.resize(o.n_p);
    o.hz.resize(o.n_p);
    for (int i = 0; i < o.n_p; ++i) {
      o.aku[i] = raster.areas[i] * pars.k_u;
      o.axis[i] = ea.of(i, phases[i]);
      o.hz[i] = pars.ms_over_mu0 * raster.areas[i] * pars.h_ext;
    }
    o.dd = pars.ms2_over_mu0 * d.d;
    return o;
  }

  Eigen::VectorXd stack(const Eigen::VectorXd& th) const {
    Eigen::VectorXd m(2 * n_p);
    for (int i = 0; i < n_p; ++i)
      m.segment<2>(2 * i) = Eigen::Vector2d(std::cos(th[i]), std::sin(th[i]));
    return m;
  }

  double energy(const Eigen::VectorXd& th) const {
    const Eigen::VectorXd m = stack(th);
    double e = 0.5 * m.dot(dd * m);
    for (int i = 0; i < n_p; ++i) {
      const Eigen::Vector2d mi = m.segment<2>(2 * i);
      const double mf = mi.dot(axis[i]);
      e += aku[i] * (1.0 - mf * mf);
      e -= hz[i].dot(mi);
    }
    return e;
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& th) const {
    const Eigen::VectorXd m = stack(th);
    const Eigen::VectorXd dm = dd * m;
    Eigen::VectorXd g(n_p);
    for (int i = 0; i < n_p; ++i) {
      const Eigen::Vector2d mi = m.segment<2>(2 * i);
      const Eigen::Vector2d perp(-mi.y(), mi.x());
      const double mf = mi.dot(axis[i]);
      g[i] = -2.0 * aku[i] * mf * perp.dot(axis[i]) +
             dm.segment<2>(2 * i).dot(perp) - hz[i].dot(perp);
    }
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& th) const {
    const Eigen::VectorXd m = stack(th);
    const Eigen::VectorXd dm = dd * m;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_p, n_p);
    for (int i = 0; i < n_p; ++i) {
      const Eigen::Vector2d mi = m.segment<2>(2 * i);
      const Eigen::Vector2d pi(-mi.y(), mi.x());
      const double mf = mi.dot(axis[i]);
      const double pf = pi.dot(axis[i]);
      h(i, i) = -2.0 * aku[i] * (pf * pf - mf * mf) +
                pi.dot(dd.block<2, 2>(2 * i, 2 * i) * pi) -
                dm.segment<2>(2 * i).dot(mi) + hz[i].dot(mi);
      for (int j = i + 1; j < n_p; ++j) {
        const Eigen::Vector2d mj = m.segment<2>(2 * j);
        const Eigen::Vector2d pj(-mj.y(), mj.x());
        const double v = pi.dot(dd.block<2, 2>(2 * i, 2 * j) * pj);
        h(i, j) = v;
        h(j, i) = v;
      }
    }
    return h;
  }
};

// Damped Newton descent on the angles; terminates at gradient norm 1e-10.
Eigen::VectorXd refine(const AngleObjective& o, Eigen::VectorXd th) {
  constexpr double kGradTol = 1e-10;
  constexpr int kMaxIter = 200;
  double e = o.energy(th);
  for (int it = 0; it < kMaxIter; ++it) {
    const Eigen::VectorXd g = o.gradient(th);
    if (g.norm() < kGradTol) break;
    const Eigen::MatrixXd h = o.hessian(th);
    const double scale = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    double lambda = 0.0;
    bool accepted = false;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      Eigen::MatrixXd hl = h;
      hl.diagonal().array() += lambda;
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(hl);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        const Eigen::VectorXd step = ldlt.solve(-g);
        const Eigen::VectorXd cand = th + step;
        const double ec = o.energy(cand);
        if (ec <= e) {
          th = cand;
          e = ec;
          accepted = true;
        }
      }
      if (!accepted) lambda = lambda == 0.0 ? 1e-8 * scale : 10.0 * lambda;
    }
    if (!accepted) break;  // numerically converged; gradient check next pass
  }
  return th;
}

}  // namespace

Eigen::VectorXd magnetic_gradient(const MagnetizationState& state,
                                  const std::vector<int>& phases,
                                  const DemagTensor& d,
                                  const MagneticParams& pars,
                                  const UnitCell& cell,
                                  const RasterGrid& raster) {
  return AngleObjective::build(phases, d, pars, cell, raster)
      .gradient(state.angles);
}

MagneticMinimum minimize_magnetization(const std::vector<int>& phases,
                                       const DemagTensor& d,
                                       const MagneticParams& pars,
                                       const UnitCell& cell,
                                       const RasterGrid& raster,
                                       std::uint64_t seed) {
  const int n_p = raster.particle_count();
  if (static_cast<int>(phases.size()) != n_p)
    throw Error("one phase per particle required");
  const AngleObjective o =
      AngleObjective::build(phases, d, pars, cell, raster);

  constexpr int kStarts = 16;
  std::vector<Eigen::VectorXd> starts;
  if (n_p <= 3) {
    // full product of equispaced angles
    int total = 1;
    for (int i = 0; i < n_p; ++i) total *= kStarts;
    starts.reserve(total);
    for (int s = 0; s < total; ++s) {
      Eigen::VectorXd th(n_p);
      int rem = s;
      for (int i = 0; i < n_p; ++i) {
        th[i] = (rem % kStarts) * (2.0 * std::numbers::pi / kStarts);
        rem /= kStarts;
      }
      starts.push_back(th);
    }
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    starts.reserve(kStarts);
    for (int s = 0; s < kStarts; ++s) {
      Eigen::VectorXd th(n_p);
      for (int i = 0; i < n_p; ++i) th[i] = uni(rng);
      starts.push_back(th);
    }
  }

  double best_e = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  for (const auto& s : starts) {
    const Eigen::VectorXd th = refine(o, s);
    const double e = o.energy(th);
    if (e < best_e) {
      best_e = e;
      best = th;
    }
  }

  MagneticMinimum out;
  out.state.angles = best;
  out.breakdown = magnetic_energy(out.state, phases, d, pars, cell, raster);
  out.energy = out.breakdown.total();
  return out;
}

}  // namespace msmcell
