#include "msmcell/elastic.hpp"

#include <cmath>
#include <sstream>

#include "msmcell/errors.hpp"

namespace msmcell {

namespace {

int voigt_i(int v) { return v == 1 ? 1 : 0; }
int voigt_j(int v) { return v == 0 ? 0 : 1; }
int voigt_index(int i, int j) { return i == j ? i : 2; }

Eigen::Vector3d strain_voigt(const Eigen::Matrix2d& e) {
  return {e(0, 0), e(1, 1), e(0, 1) + e(1, 0)};
}

}  // namespace

void check_definite(const Stiffness2D& c) {
  Eigen::Matrix3d sym = 0.5 * (c + c.transpose());
  const double s = std::sqrt(2.0);
  Eigen::Vector3d scale(1.0, 1.0, s);
  Eigen::Matrix3d mandel =
      scale.asDiagonal() * sym * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(mandel);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    std::ostringstream os;
    os << "stiffness is not positive definite (min eigenvalue "
       << es.eigenvalues().minCoeff() << " MPa)";
    throw DefinitenessError(os.str());
  }
}

Stiffness2D rotate_stiffness(const Stiffness2D& c, double angle) {
  const Eigen::Matrix2d r = rotation(angle);
  double t[2][2][2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          t[i][j][k][l] = c(voigt_index(i, j), voigt_index(k, l));

  Stiffness2D out = Stiffness2D::Zero();
  for (int v = 0; v < 3; ++v) {
    const int p = voigt_i(v), q = voigt_j(v);
    for (int w = 0; w < 3; ++w) {
      const int rr = voigt_i(w), ss = voigt_j(w);
      double acc = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l)
              acc += r(p, i) * r(q, j) * r(rr, k) * r(ss, l) * t[i][j][k][l];
      out(v, w) = acc;
    }
  }
  return out;
}

Stiffness2D cubic_stiffness(double c11, double c12, double c44,
                            double lattice_angle) {
  Stiffness2D c;
  c << c11, c12, 0, c12, c11, 0, 0, 0, c44;
  check_definite(c);
  if (lattice_angle != 0.0) c = rotate_stiffness(c, lattice_angle);
  return c;
}

Stiffness2D isotropic_stiffness(double youngs_modulus, double poisson) {
  if (!(youngs_modulus > 0.0))
    throw DefinitenessError("Young's modulus must be positive");
  if (!(poisson > 0.0) || !(poisson < 0.5))
    throw DefinitenessError("Poisson ratio must lie in (0, 0.5)");
  const double lambda = youngs_modulus * poisson /
                        ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  const double mu = youngs_modulus / (2.0 * (1.0 + poisson));
  Stiffness2D c;
  c << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, mu;
  check_definite(c);
  return c;
}

EigenstrainTable eigenstrains(double eps0, int reference_phase, int sign) {
  if (reference_phase != 1 && reference_phase != 2)
    throw ConfigError("reference phase must be 1 or 2");
  if (sign != 1 && sign != -1)
    throw ConfigError("eigenstrain sign must be +1 or -1");
  Eigen::Matrix2d a1 = Eigen::Matrix2d::Zero();
  a1(0, 0) = sign * eps0;
  a1(1, 1) = -sign * eps0;
  const Eigen::Matrix2d a2 = -a1;
  const Eigen::Matrix2d& ref = reference_phase == 1 ? a1 : a2;
  EigenstrainTable t;
  t.reference_phase = reference_phase;
  t.strain[0] = a1 - ref;
  t.strain[1] = a2 - ref;
  return t;
}

ElasticSystem::ElasticSystem(const RasterGrid& raster, const UnitCell& cell,
                             const MaterialSet& mat)
    : n_(raster.n),
      n_particles_(raster.particle_count()),
      pixel_owner_(raster.owner),
      areas_(raster.areas) {
  if (cell.particle_count() != n_particles_)
    throw Error("raster and cell disagree on particle count");

  c_poly_ = isotropic_stiffness(mat.polymer_e, mat.polymer_nu);

  const EigenstrainTable table =
      eigenstrains(mat.eps0, mat.reference_phase, mat.eigenstrain_sign);
  particle_c_.resize(n_particles_);
  particle_s0_.resize(n_particles_);
  for (int i = 0; i < n_particles_; ++i) {
    const double ang = cell.particles[i].lattice_angle;
    particle_c_[i] = cubic_stiffness(mat.c11, mat.c12, mat.c44, ang);
    const Eigen::Matrix2d r = rotation(ang);
    for (int p = 0; p < 2; ++p) {
      Eigen::Matrix2d lab = r * table.strain[p] * r.transpose();
      particle_s0_[i][p] = strain_voigt(lab);
    }
  }

  // element matrices on the square [0,h]^2 with 2x2 Gauss points
  const double h = 1.0 / n_;
  ke_.setZero();
  keb_.setZero();
  kbb_.setZero();
  Eigen::Matrix3d pmat = Eigen::Vector3d(1, 1, 2).asDiagonal();
  const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
  const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
  for (double xi : {g0, g1}) {
    for (double eta : {g0, g1}) {
      const double dndxi[4] = {-(1 - eta), (1 - eta), -eta, eta};
      const double dndeta[4] = {-(1 - xi), -xi, (1 - xi), xi};
      Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double nx = dndxi[a] / h;
        const double ny = dndeta[a] / h;
        b(0, 2 * a) = nx;
        b(1, 2 * a + 1) = ny;
        b(2, 2 * a) = ny;
        b(2, 2 * a + 1) = nx;
      }
      const double w = h * h / 4.0;
      ke_ += w * b.transpose() * c_poly_ * b;
      keb_ += w * b.transpose() * c_poly_ * pmat;
    }
  }
  kbb_ = (h * h) * pmat.transpose() * c_poly_ * pmat;

  assemble(raster, cell);
}

void ElasticSystem::assemble(const RasterGrid& raster, const UnitCell& cell) {
  const int n = n_;
  const std::size_t nn = static_cast<std::size_t>(n) * n;

  // Slave each node to the particle owning any of its 4 adjacent pixels.
  // The 2-pixel separation rule guarantees a unique owner.
  node_owner_.assign(nn, 0);
  std::vector<long> node_slot(nn, -1);
  free_nodes_ = 0;
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      std::int32_t owner = 0;
      for (int dx = -1; dx <= 0; ++dx)
        for (int dy = -1; dy <= 0; ++dy) {
          std::int32_t o = raster.label(ix + dx, iy + dy);
          if (o != 0) owner = o;
        }
      const std::size_t v = static_cast<std::size_t>(ix) * n + iy;
      node_owner_[v] = static_cast<std::int8_t>(owner);
      if (owner == 0) node_slot[v] = free_nodes_++;
    }
  }

  particle_base_ = 2L * free_nodes_;
  n_dofs_ = particle_base_ + 6L * n_particles_ + 3L;
  const long beta0 = beta_base();

  map_x_.assign(nn, NodeMap{});
  map_y_.assign(nn, NodeMap{});
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const std::size_t v = static_cast<std::size_t>(ix) * n + iy;
      NodeMap& mx = map_x_[v];
      NodeMap& my = map_y_[v];
      if (node_owner_[v] == 0) {
        mx.count = my.count = 1;
        mx.idx[0] = 2 * node_slot[v];
        my.idx[0] = 2 * node_slot[v] + 1;
        mx.w[0] = my.w[0] = 1.0;
      } else {
        const int i = node_owner_[v] - 1;
        const long base = particle_base(i);
        const Eigen::Vector2d pos(static_cast<double>(ix) / n,
                                  static_cast<double>(iy) / n);
        const Eigen::Vector2d d =
            wrap_half(pos - cell.particles[i].center);
        mx.count = my.count = 3;
        mx.idx[0] = base + 0; mx.w[0] = d.x();   // G00
        mx.idx[1] = base + 1; mx.w[1] = d.y();   // G01
        mx.idx[2] = base + 4; mx.w[2] = 1.0;     // tx
        my.idx[0] = base + 2; my.w[0] = d.x();   // G10
        my.idx[1] = base + 3; my.w[1] = d.y();   // G11
        my.idx[2] = base + 5; my.w[2] = 1.0;     // ty
      }
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(200u * nn);

  const NodeMap* maps[2] = {map_x_.data(), map_y_.data()};
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      if (pixel_owner_[static_cast<std::size_t>(ix) * n + iy] != 0) continue;
      std::size_t corner[4];
      corner[0] = static_cast<std::size_t>(ix) * n + iy;
      corner[1] = static_cast<std::size_t>((ix + 1) % n) * n + iy;
      corner[2] = static_cast<std::size_t>(ix) * n + (iy + 1) % n;
      corner[3] = static_cast<std::size_t>((ix + 1) % n) * n + (iy + 1) % n;
      const NodeMap* local[8];
      for (int a = 0; a < 4; ++a) {
        local[2 * a] = &maps[0][corner[a]];
        local[2 * a + 1] = &maps[1][corner[a]];
      }
      for (int p = 0; p < 8; ++p) {
        const NodeMap* mp = local[p];
        for (int q = 0; q < 8; ++q) {
          const NodeMap* mq = local[q];
          const double kpq = ke_(p, q);
          if (kpq == 0.0) continue;
          for (int r = 0; r < mp->count; ++r)
            for (int s = 0; s < mq->count; ++s)
              trip.emplace_back(mp->idx[r], mq->idx[s],
                                kpq * mp->w[r] * mq->w[s]);
        }
        for (int j = 0; j < 3; ++j) {
          const double kbj = keb_(p, j);
          if (kbj == 0.0) continue;
          for (int r = 0; r < mp->count; ++r) {
            trip.emplace_back(mp->idx[r], beta0 + j, kbj * mp->w[r]);
            trip.emplace_back(beta0 + j, mp->idx[r], kbj * mp->w[r]);
          }
        }
      }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (kbb_(i, j) != 0.0)
            trip.emplace_back(beta0 + i, beta0 + j, kbb_(i, j));
    }
  }

  // Particle strain blocks: s = M q with q = (G00,G01,G10,G11,bxx,byy,bxy)
  for (int i = 0; i < n_particles_; ++i) {
    Eigen::Matrix<double, 3, 7> m = Eigen::Matrix<double, 3, 7>::Zero();
    m(0, 0) = 1; m(0, 4) = 1;
    m(1, 3) = 1; m(1, 5) = 1;
    m(2, 1) = 1; m(2, 2) = 1; m(2, 6) = 2;
    Eigen::Matrix<double, 7, 7> block =
        areas_[i] * m.transpose() * particle_c_[i] * m;
    long idx[7] = {particle_base(i),     particle_base(i) + 1,
                   particle_base(i) + 2, particle_base(i) + 3,
                   beta0,                beta0 + 1,
                   beta0 + 2};
    for (int p = 0; p < 7; ++p)
      for (int q = 0; q < 7; ++q)
        if (block(p, q) != 0.0) trip.emplace_back(idx[p], idx[q], block(p, q));
  }

  a_full_.resize(n_dofs_, n_dofs_);
  a_full_.setFromTriplets(trip.begin(), trip.end());
  a_full_.makeCompressed();

  std::vector<Eigen::Triplet<double>> red;
  red.reserve(trip.size());
  a_wb_ = Eigen::MatrixXd::Zero(n_dofs_ - 3, 3);
  a_bb_.setZero();
  for (const auto& t : trip) {
    const bool rb = t.row() >= beta0, cb = t.col() >= beta0;
    if (!rb && !cb) {
      red.push_back(t);
    } else if (!rb && cb) {
      a_wb_(t.row(), t.col() - beta0) += t.value();
    } else if (rb && cb) {
      a_bb_(t.row() - beta0, t.col() - beta0) += t.value();
    }
  }
  a_red_.resize(n_dofs_ - 3, n_dofs_ - 3);
  a_red_.setFromTriplets(red.begin(), red.end());
  a_red_.makeCompressed();
}

Eigen::VectorXd ElasticSystem::rhs(const std::vector<int>& phases,
                                   double* constant) const {
  if (static_cast<int>(phases.size()) != n_particles_)
    throw Error("one phase per particle required");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_dofs_);
  double c0 = 0.0;
  const long beta0 = beta_base();
  for (int i = 0; i < n_particles_; ++i) {
    const int p = phases[i];
    if (p != 1 && p != 2) throw Error("phase index must be 1 or 2");
    const Eigen::Vector3d& s0 = particle_s0_[i][p - 1];
    const Eigen::Vector3d f = areas_[i] * particle_c_[i] * s0;
    // b = a_i M^T C s0 spread over (G, beta) rows
    b[particle_base(i) + 0] += f[0];
    b[particle_base(i) + 3] += f[1];
    b[particle_base(i) + 1] += f[2];
    b[particle_base(i) + 2] += f[2];
    b[beta0 + 0] += f[0];
    b[beta0 + 1] += f[1];
    b[beta0 + 2] += 2.0 * f[2];
    c0 += 0.5 * areas_[i] * s0.dot(particle_c_[i] * s0);
  }
  if (constant) *constant = c0;
  return b;
}

Eigen::VectorXd ElasticSystem::cg(
    const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
    const SolveOptions& opts,
    const std::function<double(const Eigen::VectorXd&)>& en, long* iters,
    double* resid) const {
  const long cap =
      opts.max_iter > 0 ? opts.max_iter : 50L * n_ * n_;
  Eigen::VectorXd inv_diag = a.diagonal();
  for (long i = 0; i < inv_diag.size(); ++i)
    inv_diag[i] = inv_diag[i] > 0.0 ? 1.0 / inv_diag[i] : 0.0;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.asDiagonal() * r;
  double rz = r.dot(z);
  const double norm0 = std::sqrt(std::max(rz, 0.0));
  *iters = 0;
  *resid = 0.0;
  if (norm0 == 0.0) return x;

  Eigen::VectorXd p = z;
  Eigen::VectorXd q(b.size());
  for (long it = 1; it <= cap; ++it) {
    q.noalias() = a * p;
    const double pq = p.dot(q);
    if (pq <= 0.0) break;  // numerically flat direction; accept current x
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    z = inv_diag.asDiagonal() * r;
    const double rz_new = r.dot(z);
    *iters = it;
    *resid = std::sqrt(std::max(rz_new, 0.0)) / norm0;
    if (opts.monitor && it % opts.monitor_stride == 0) opts.monitor(it, en(x));
    if (*resid <= opts.rel_tol) return x;
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (*resid <= opts.rel_tol) return x;
  std::ostringstream os;
  os << "conjugate gradient hit the iteration cap (" << cap
     << "), relative residual " << *resid;
  throw ConvergenceError(os.str());
}

ElasticSolution ElasticSystem::minimize(const std::vector<int>& phases,
                                        const BetaSpec& mode,
                                        const SolveOptions& opts) const {
  double c0 = 0.0;
  const Eigen::VectorXd b = rhs(phases, &c0);
  const long beta0 = beta_base();

  ElasticSolution sol;
  Eigen::VectorXd full(n_dofs_);
  if (!mode.clamped) {
    auto en = [&](const Eigen::VectorXd& x) {
      return 0.5 * x.dot(a_full_ * x) - b.dot(x) + c0;
    };
    full = cg(a_full_, b, opts, en, &sol.iterations, &sol.residual);
  } else {
    Eigen::Vector3d bv(mode.beta0(0, 0), mode.beta0(1, 1),
                       0.5 * (mode.beta0(0, 1) + mode.beta0(1, 0)));
    Eigen::VectorXd br = b.head(n_dofs_ - 3) - a_wb_ * bv;
    auto en = [&](const Eigen::VectorXd& x) {
      Eigen::VectorXd f(n_dofs_);
      f << x, bv;
      return energy_at(f, phases);
    };
    Eigen::VectorXd xr = cg(a_red_, br, opts, en, &sol.iterations,
                            &sol.residual);
    full << xr, bv;
  }

  // gauge: zero mean displacement over the node grid
  const std::size_t nn = static_cast<std::size_t>(n_) * n_;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (std::size_t v = 0; v < nn; ++v) {
    for (int r = 0; r < map_x_[v].count; ++r)
      mean.x() += map_x_[v].w[r] * full[map_x_[v].idx[r]];
    for (int r = 0; r < map_y_[v].count; ++r)
      mean.y() += map_y_[v].w[r] * full[map_y_[v].idx[r]];
  }
  mean /= static_cast<double>(nn);
  for (int s = 0; s < free_nodes_; ++s) {
    full[2 * s] -= mean.x();
    full[2 * s + 1] -= mean.y();
  }
  for (int i = 0; i < n_particles_; ++i) {
    full[particle_base(i) + 4] -= mean.x();
    full[particle_base(i) + 5] -= mean.y();
  }

  sol.dofs = full;
  sol.energy = energy_at(full, phases);
  sol.beta << full[beta0], full[beta0 + 2], full[beta0 + 2], full[beta0 + 1];
  sol.particle_gradient.resize(n_particles_);
  sol.particle_strain.resize(n_particles_);
  for (int i = 0; i < n_particles_; ++i) {
    Eigen::Matrix2d g;
    g << full[particle_base(i) + 0], full[particle_base(i) + 1],
        full[particle_base(i) + 2], full[particle_base(i) + 3];
    sol.particle_gradient[i] = g;
    Eigen::Matrix2d tot = sol.beta + 0.5 * (g + g.transpose());
    sol.particle_strain[i] = tot;
  }
  return sol;
}

Eigen::Matrix2d ElasticSystem::macro_stress(
    const ElasticSolution& sol, const std::vector<int>& phases) const {
  const Eigen::VectorXd b = rhs(phases, nullptr);
  const Eigen::VectorXd g = a_full_ * sol.dofs - b;
  const long beta0 = beta_base();
  Eigen::Matrix2d s;
  s << g[beta0], 0.5 * g[beta0 + 2], 0.5 * g[beta0 + 2], g[beta0 + 1];
  return s;
}

double ElasticSystem::energy_at(const Eigen::VectorXd& dofs,
                                const std::vector<int>& phases) const {
  if (dofs.size() != n_dofs_) throw Error("dof vector has wrong length");
  double c0 = 0.0;
  const Eigen::VectorXd b = rhs(phases, &c0);
  return 0.5 * dofs.dot(a_full_ * dofs) - b.dot(dofs) + c0;
}

VectorField ElasticSystem::node_displacement(const ElasticSolution& sol) const {
  VectorField f = VectorField::zero(n_);
  const std::size_t nn = static_cast<std::size_t>(n_) * n_;
  for (std::size_t v = 0; v < nn; ++v) {
    double ux = 0.0, uy = 0.0;
    for (int r = 0; r < map_x_[v].count; ++r)
      ux += map_x_[v].w[r] * sol.dofs[map_x_[v].idx[r]];
    for (int r = 0; r < map_y_[v].count; ++r)
      uy += map_y_[v].w[r] * sol.dofs[map_y_[v].idx[r]];
    f.x[v] = ux;
    f.y[v] = uy;
  }
  return f;
}

std::vector<double> ElasticSystem::polymer_energy_density(
    const ElasticSolution& sol) const {
  const int n = n_;
  std::vector<double> dens(static_cast<std::size_t>(n) * n, 0.0);
  const double h = 1.0 / n;
  const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
  const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
  const Eigen::Vector3d bv(sol.beta(0, 0), sol.beta(1, 1),
                           2.0 * sol.beta(0, 1));
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const std::size_t e = static_cast<std::size_t>(ix) * n + iy;
      if (pixel_owner_[e] != 0) continue;
      std::size_t corner[4];
      corner[0] = static_cast<std::size_t>(ix) * n + iy;
      corner[1] = static_cast<std::size_t>((ix + 1) % n) * n + iy;
      corner[2] = static_cast<std::size_t>(ix) * n + (iy + 1) % n;
      corner[3] = static_cast<std::size_t>((ix + 1) % n) * n + (iy + 1) % n;
      Eigen::Matrix<double, 8, 1> u;
      for (int a = 0; a < 4; ++a) {
        const NodeMap& mx = map_x_[corner[a]];
        const NodeMap& my = map_y_[corner[a]];
        double ux = 0.0, uy = 0.0;
        for (int r = 0; r < mx.count; ++r) ux += mx.w[r] * sol.dofs[mx.idx[r]];
        for (int r = 0; r < my.count; ++r) uy += my.w[r] * sol.dofs[my.idx[r]];
        u[2 * a] = ux;
        u[2 * a + 1] = uy;
      }
      double acc = 0.0;
      for (double xi : {g0, g1}) {
        for (double eta : {g0, g1}) {
          const double dndxi[4] = {-(1 - eta), (1 - eta), -eta, eta};
          const double dndeta[4] = {-(1 - xi), -xi, (1 - xi), xi};
          Eigen::Vector3d eps = bv;
          for (int a = 0; a < 4; ++a) {
            const double nx = dndxi[a] / h;
            const double ny = dndeta[a] / h;
            eps[0] += nx * u[2 * a];
            eps[1] += ny * u[2 * a + 1];
            eps[2] += ny * u[2 * a] + nx * u[2 * a + 1];
          }
          acc += 0.5 * eps.dot(c_poly_ * eps);
        }
      }
      dens[e] = acc / 4.0;
    }
  }
  return dens;
}

}  // namespace msmcell
