#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <vector>

#include "msmcell/demag.hpp"
#include "msmcell/geometry.hpp"
#include "msmcell/materials.hpp"

namespace msmcell {

// 3x3 Voigt stiffness, order (xx, yy, xy) with engineering shear, MPa.
using Stiffness2D = Eigen::Matrix3d;

// Throws DefinitenessError unless the tensor (Mandel form) is positive
// definite.
void check_definite(const Stiffness2D& c);

// Cubic in-plane stiffness in the frame rotated by lattice_angle.
Stiffness2D cubic_stiffness(double c11, double c12, double c44,
                            double lattice_angle);

// Plane-strain isotropic stiffness from Young's modulus and Poisson ratio.
Stiffness2D isotropic_stiffness(double youngs_modulus, double poisson);

// Rotate a Voigt stiffness as a rank-4 tensor.
Stiffness2D rotate_stiffness(const Stiffness2D& c, double angle);

// Crystal-frame transformation strains of the two variants, stored relative
// to the reference phase so that phase == reference is stress free.
struct EigenstrainTable {
  std::array<Eigen::Matrix2d, 2> strain;
  int reference_phase = 1;
  const Eigen::Matrix2d& of_phase(int p) const { return strain[p - 1]; }
};

EigenstrainTable eigenstrains(double eps0, int reference_phase, int sign = 1);

using MacroStrain = Eigen::Matrix2d;  // symmetric 2x2

// Macroscopic strain treatment: minimized over (free) or held fixed.
struct BetaSpec {
  bool clamped = false;
  MacroStrain beta0 = MacroStrain::Zero();

  static BetaSpec free_strain() { return {}; }
  static BetaSpec clamp(const MacroStrain& b) { return {true, b}; }
};

struct SolveOptions {
  double rel_tol = 1e-8;  // on the Jacobi-preconditioned residual norm
  long max_iter = 0;      // 0 means 50 * n^2
  // called every monitor_stride iterations with (iteration, energy)
  std::function<void(long, double)> monitor;
  int monitor_stride = 100;
};

struct ElasticSolution {
  double energy = 0.0;  // MPa
  MacroStrain beta = MacroStrain::Zero();
  std::vector<Eigen::Matrix2d> particle_gradient;  // G_i
  std::vector<Eigen::Matrix2d> particle_strain;    // sym(beta + G_i)
  Eigen::VectorXd dofs;  // full layout [node w | per-particle G,t | beta]
  long iterations = 0;
  double residual = 0.0;  // preconditioned norm, relative
};

// Quadratic cell energy in the polymer fluctuation, per-particle affine
// maps, and the macroscopic strain. Particles deform affinely; the polymer
// is meshed with bilinear quadrilaterals on its pixels; nodes touching a
// particle pixel follow that particle's affine map.
class ElasticSystem {
 public:
  ElasticSystem(const RasterGrid& raster, const UnitCell& cell,
                const MaterialSet& mat);

  ElasticSolution minimize(const std::vector<int>& phases, const BetaSpec& mode,
                           const SolveOptions& opts = {}) const;

  // d(energy)/d(beta) at the solution: the volume-averaged stress, MPa.
  Eigen::Matrix2d macro_stress(const ElasticSolution& sol,
                               const std::vector<int>& phases) const;

  // Full quadratic evaluated at an arbitrary dof vector (testing hook).
  double energy_at(const Eigen::VectorXd& dofs,
                   const std::vector<int>& phases) const;

  // Fluctuation displacement sampled at the n x n node grid.
  VectorField node_displacement(const ElasticSolution& sol) const;

  // Strain energy density per pixel, zero on particle pixels, MPa.
  std::vector<double> polymer_energy_density(const ElasticSolution& sol) const;

  int n() const { return n_; }
  int particle_count() const { return n_particles_; }
  int free_node_count() const { return free_nodes_; }
  long dof_count() const { return n_dofs_; }
  long beta_base() const { return n_dofs_ - 3; }
  long particle_base(int i) const { return particle_base_ + 6 * i; }

 private:
  struct NodeMap {  // one displacement component of one grid node
    int count = 0;
    long idx[3] = {0, 0, 0};
    double w[3] = {0, 0, 0};
  };

  void assemble(const RasterGrid& raster, const UnitCell& cell);
  Eigen::VectorXd rhs(const std::vector<int>& phases, double* constant) const;
  Eigen::VectorXd cg(const Eigen::SparseMatrix<double>& a,
                     const Eigen::VectorXd& b, const SolveOptions& opts,
                     const std::function<double(const Eigen::VectorXd&)>& en,
                     long* iters, double* resid) const;

  int n_ = 0;
  int n_particles_ = 0;
  int free_nodes_ = 0;
  long particle_base_ = 0;
  long n_dofs_ = 0;

  std::vector<NodeMap> map_x_, map_y_;  // per grid node
  std::vector<std::int8_t> node_owner_; // 0 free, else particle index
  std::vector<std::int32_t> pixel_owner_;
  std::vector<double> areas_;

  Eigen::SparseMatrix<double> a_full_;  // all dofs including beta
  Eigen::SparseMatrix<double> a_red_;   // beta rows/cols removed
  Eigen::MatrixXd a_wb_;                // coupling block, (n_dofs-3) x 3
  Eigen::Matrix3d a_bb_;

  std::vector<Stiffness2D> particle_c_;          // lab frame, MPa
  std::vector<std::array<Eigen::Vector3d, 2>> particle_s0_;  // per phase
  Stiffness2D c_poly_;
  Eigen::Matrix<double, 8, 8> ke_;
  Eigen::Matrix<double, 8, 3> keb_;
  Eigen::Matrix3d kbb_;
};

}  // namespace msmcell
