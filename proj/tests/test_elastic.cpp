#include <cmath>
#include <random>

#include "doctest.h"
#include "msmcell/cellsolver.hpp"
#include "msmcell/elastic.hpp"

using namespace msmcell;

namespace {
const double kPi = 3.14159265358979323846;

MaterialSet default_mat() { return {}; }

UnitCell empty_cell() { return {}; }

UnitCell disk_cell(double fraction) {
  return make_particle_cell(fraction, 1.0, 0.0, ShapeKind::ellipse);
}

// Full-width horizontal stripe particle of height 2*half_h.
UnitCell stripe_cell(double half_h) {
  UnitCell cell;
  cell.particles.push_back({Rectangle{0.5, half_h}, {0.5, 0.5}, 0.0, 0.0});
  return cell;
}

Eigen::Vector3d voigt(const MacroStrain& b) {
  return {b(0, 0), b(1, 1), b(0, 1) + b(1, 0)};
}

// Closed-form across-layer stiffness of a two-phase layer stack (layers
// normal to y) under a clamped macroscopic strain (0, t, 0): the layers
// carry the same transverse stress, so the effective modulus is the
// harmonic mean of the transverse Voigt entries.
double series_stack_modulus(const Stiffness2D& ca, double phi,
                            const Stiffness2D& cb) {
  return 1.0 / (phi / ca(1, 1) + (1 - phi) / cb(1, 1));
}

}  // namespace

TEST_SUITE("elastic") {

TEST_CASE("cubic stiffness matrix entries") {
  Stiffness2D c = cubic_stiffness(160e3, 156e3, 40e3, 0.0);
  CHECK(c(0, 0) == doctest::Approx(160e3));
  CHECK(c(1, 1) == doctest::Approx(160e3));
  CHECK(c(0, 1) == doctest::Approx(156e3));
  CHECK(c(2, 2) == doctest::Approx(40e3));
  CHECK(std::abs(c(0, 2)) < 1e-9);
  CHECK((c - c.transpose()).norm() < 1e-9);
}

TEST_CASE("cubic stiffness rotation") {
  Stiffness2D c0 = cubic_stiffness(160e3, 156e3, 40e3, 0.0);
  // a quarter turn maps the cubic axes onto themselves
  Stiffness2D c90 = cubic_stiffness(160e3, 156e3, 40e3, kPi / 2);
  CHECK((c90 - c0).norm() < 1e-6);
  // at 45 degrees the axial entry becomes (C11+C12)/2 + C44
  Stiffness2D c45 = cubic_stiffness(160e3, 156e3, 40e3, kPi / 4);
  CHECK(c45(0, 0) == doctest::Approx(198e3).epsilon(1e-10));
  CHECK(c45(2, 2) == doctest::Approx((160e3 - 156e3) / 2.0).epsilon(1e-10));
  // rotating twice composes
  Stiffness2D a = rotate_stiffness(c0, 0.3);
  Stiffness2D b = rotate_stiffness(a, 0.4);
  CHECK((b - rotate_stiffness(c0, 0.7)).norm() < 1e-6);
}

TEST_CASE("plane-strain isotropic stiffness") {
  Stiffness2D c = isotropic_stiffness(1.0, 0.45);
  const double lambda = 0.45 / (1.45 * 0.1);
  const double mu = 1.0 / 2.9;
  CHECK(c(0, 0) == doctest::Approx(lambda + 2 * mu));  // 3.7931
  CHECK(c(0, 1) == doctest::Approx(lambda));
  CHECK(c(2, 2) == doctest::Approx(mu));
  CHECK(std::abs(c(1, 2)) < 1e-15);
}

TEST_CASE("indefinite inputs are rejected") {
  CHECK_THROWS_AS(isotropic_stiffness(1.0, 0.5), DefinitenessError);
  CHECK_THROWS_AS(isotropic_stiffness(1.0, -0.2), DefinitenessError);
  CHECK_THROWS_AS(isotropic_stiffness(-1.0, 0.3), DefinitenessError);
  CHECK_THROWS_AS(isotropic_stiffness(0.0, 0.3), DefinitenessError);
  // C11 - C12 < 0 gives a negative shear eigenvalue
  CHECK_THROWS_AS(cubic_stiffness(156e3, 160e3, 40e3, 0.0),
                  DefinitenessError);
  CHECK_THROWS_AS(cubic_stiffness(160e3, 156e3, -1.0, 0.0),
                  DefinitenessError);
  CHECK_NOTHROW(check_definite(isotropic_stiffness(2.0, 0.3)));
}

TEST_CASE("variant strains relative to the reference") {
  EigenstrainTable t = eigenstrains(0.058, 2, 1);
  CHECK(t.of_phase(2).norm() == 0.0);
  CHECK(t.of_phase(1)(0, 0) == doctest::Approx(0.116));
  CHECK(t.of_phase(1)(1, 1) == doctest::Approx(-0.116));
  CHECK(t.of_phase(1)(0, 1) == 0.0);

  EigenstrainTable r1 = eigenstrains(0.058, 1, 1);
  CHECK(r1.of_phase(1).norm() == 0.0);
  CHECK(r1.of_phase(2)(0, 0) == doctest::Approx(-0.116));

  EigenstrainTable neg = eigenstrains(0.058, 2, -1);
  CHECK(neg.of_phase(1)(0, 0) == doctest::Approx(-0.116));

  CHECK_THROWS_AS(eigenstrains(0.058, 3, 1), ConfigError);
  CHECK_THROWS_AS(eigenstrains(0.058, 2, 0), ConfigError);
}

TEST_CASE("homogeneous clamped energy is quadratic in the strain") {
  RasterGrid raster = rasterize(empty_cell(), 16);
  MaterialSet mat = default_mat();
  ElasticSystem sys(raster, empty_cell(), mat);
  CHECK(sys.particle_count() == 0);
  CHECK(sys.free_node_count() == 16 * 16);

  MacroStrain b0;
  b0 << 0.01, 0.003, 0.003, -0.02;
  ElasticSolution sol = sys.minimize({}, BetaSpec::clamp(b0));
  const Stiffness2D c = isotropic_stiffness(mat.polymer_e, mat.polymer_nu);
  const Eigen::Vector3d eps = voigt(b0);
  const double exact = 0.5 * eps.dot(c * eps);
  CHECK(sol.energy == doctest::Approx(exact).epsilon(1e-10));

  Eigen::Matrix2d stress = sys.macro_stress(sol, {});
  const Eigen::Vector3d sv = c * eps;
  CHECK(stress(0, 0) == doctest::Approx(sv[0]).epsilon(1e-8));
  CHECK(stress(1, 1) == doctest::Approx(sv[1]).epsilon(1e-8));
  CHECK(stress(0, 1) == doctest::Approx(sv[2]).epsilon(1e-8));
  CHECK(stress(1, 0) == doctest::Approx(stress(0, 1)).epsilon(1e-12));
}

TEST_CASE("reference phase relaxes to the undeformed state") {
  RasterGrid raster = rasterize(disk_cell(0.3), 32);
  MaterialSet mat = default_mat();
  ElasticSystem sys(raster, disk_cell(0.3), mat);
  ElasticSolution sol = sys.minimize({mat.reference_phase},
                                     BetaSpec::free_strain());
  CHECK(std::abs(sol.energy) < 1e-8 * 160e3);
  CHECK(sol.beta.norm() < 1e-6);
  Eigen::Matrix2d stress = sys.macro_stress(sol, {mat.reference_phase});
  CHECK(stress.norm() < 1e-6);
}

TEST_CASE("layer stack reproduces the closed-form series stiffness") {
  const double phi = 0.5;
  UnitCell cell = stripe_cell(0.25);
  MaterialSet mat = default_mat();
  for (int n : {64, 128}) {
    RasterGrid raster = rasterize(cell, n);
    REQUIRE(raster.areas[0] == doctest::Approx(phi).epsilon(1e-14));
    ElasticSystem sys(raster, cell, mat);
    const double t = 0.01;
    MacroStrain b0;
    b0 << 0, 0, 0, t;
    SolveOptions opts;
    opts.rel_tol = 1e-11;
    ElasticSolution sol =
        sys.minimize({mat.reference_phase}, BetaSpec::clamp(b0), opts);
    const double c_eff = 2.0 * sol.energy / (t * t);
    const double exact = series_stack_modulus(
        cubic_stiffness(mat.c11, mat.c12, mat.c44, 0.0), phi,
        isotropic_stiffness(mat.polymer_e, mat.polymer_nu));
    // the piecewise-affine series solution is representable on the grid,
    // so the agreement is far better than the mesh size would suggest
    CHECK(c_eff == doctest::Approx(exact).epsilon(1e-3));
  }
}

TEST_CASE("free solve is stationary and below any clamped state") {
  RasterGrid raster = rasterize(disk_cell(0.3), 32);
  MaterialSet mat = default_mat();
  ElasticSystem sys(raster, disk_cell(0.3), mat);
  std::vector<int> phases = {1};
  SolveOptions opts;
  opts.rel_tol = 1e-10;
  ElasticSolution sol = sys.minimize(phases, BetaSpec::free_strain(), opts);
  CHECK(sol.energy > 0.0);
  CHECK(sys.energy_at(sol.dofs, phases) ==
        doctest::Approx(sol.energy).epsilon(1e-12));

  // stationarity of the full quadratic at the reported optimum
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  const double scale = std::max(sol.energy, 1e-3);
  for (int trial = 0; trial < 12; ++trial) {
    Eigen::VectorXd dir(sys.dof_count());
    for (long i = 0; i < dir.size(); ++i) dir[i] = g(rng);
    dir.normalize();
    const double h = 1e-5;
    const double ep = sys.energy_at(sol.dofs + h * dir, phases);
    const double em = sys.energy_at(sol.dofs - h * dir, phases);
    REQUIRE(std::abs(ep - em) / (2 * h) < 1e-4 * scale);
    REQUIRE(ep >= sol.energy - 1e-9 * scale);
    REQUIRE(em >= sol.energy - 1e-9 * scale);
  }

  // the free optimum lies below every clamped one
  for (double s : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
    MacroStrain b = s * sol.beta;
    ElasticSolution clamped = sys.minimize(phases, BetaSpec::clamp(b), opts);
    REQUIRE(clamped.energy >= sol.energy - 1e-10);
  }
  ElasticSolution at_opt =
      sys.minimize(phases, BetaSpec::clamp(sol.beta), opts);
  CHECK(at_opt.energy == doctest::Approx(sol.energy).epsilon(1e-8));

  // zero macroscopic stress at the free optimum
  CHECK(sys.macro_stress(sol, phases).norm() < 1e-5);
}

TEST_CASE("translation invariance of the energy") {
  RasterGrid raster = rasterize(disk_cell(0.3), 32);
  MaterialSet mat = default_mat();
  ElasticSystem sys(raster, disk_cell(0.3), mat);
  std::vector<int> phases = {1};
  ElasticSolution sol = sys.minimize(phases, BetaSpec::free_strain());

  Eigen::VectorXd shifted = sol.dofs;
  const double cx = 0.37, cy = -0.21;
  for (int k = 0; k < sys.free_node_count(); ++k) {
    shifted[2 * k] += cx;
    shifted[2 * k + 1] += cy;
  }
  for (int i = 0; i < sys.particle_count(); ++i) {
    shifted[sys.particle_base(i) + 4] += cx;
    shifted[sys.particle_base(i) + 5] += cy;
  }
  CHECK(sys.energy_at(shifted, phases) ==
        doctest::Approx(sol.energy).epsilon(1e-9));

  // the reported solution is gauged to zero mean displacement
  VectorField disp = sys.node_displacement(sol);
  double mx = 0.0, my = 0.0;
  for (double v : disp.x) mx += v;
  for (double v : disp.y) my += v;
  CHECK(std::abs(mx) / disp.x.size() < 1e-10);
  CHECK(std::abs(my) / disp.y.size() < 1e-10);
}

TEST_CASE("stress matches the strain derivative of the energy") {
  RasterGrid raster = rasterize(disk_cell(0.3), 32);
  MaterialSet mat = default_mat();
  ElasticSystem sys(raster, disk_cell(0.3), mat);
  std::vector<int> phases = {1};
  SolveOptions opts;
  opts.rel_tol = 1e-11;
  MacroStrain b0;
  b0 << 0.01, -0.004, -0.004, 0.02;
  ElasticSolution sol = sys.minimize(phases, BetaSpec::clamp(b0), opts);
  Eigen::Matrix2d stress = sys.macro_stress(sol, phases);

  const double h = 1e-3;
  Eigen::Matrix2d dirs[3];
  dirs[0] << 1, 0, 0, 0;
  dirs[1] << 0, 0, 0, 1;
  dirs[2] << 0, 1, 1, 0;
  const double want[3] = {stress(0, 0), stress(1, 1), 2 * stress(0, 1)};
  for (int k = 0; k < 3; ++k) {
    ElasticSolution p =
        sys.minimize(phases, BetaSpec::clamp(b0 + h * dirs[k]), opts);
    ElasticSolution m =
        sys.minimize(phases, BetaSpec::clamp(b0 - h * dirs[k]), opts);
    const double fd = (p.energy - m.energy) / (2 * h);
    REQUIRE(fd == doctest::Approx(want[k]).epsilon(1e-5));
  }
}

TEST_CASE("rigid-polymer limit drives the spontaneous strain to zero") {
  UnitCell cell = disk_cell(0.3);
  RasterGrid raster = rasterize(cell, 32);
  std::vector<double> norms, energies;
  for (double e : {80.0, 800.0, 8000.0, 80000.0}) {
    MaterialSet mat = default_mat();
    mat.polymer_e = e;
    ElasticSolution sol =
        ElasticSystem(raster, cell, mat).minimize({1}, BetaSpec::free_strain());
    norms.push_back(sol.beta.norm());
    energies.push_back(sol.energy);
  }
  for (std::size_t i = 1; i < norms.size(); ++i) {
    CHECK(norms[i] < norms[i - 1]);
    CHECK(energies[i] > energies[i - 1]);
  }
  CHECK(norms.back() < 0.02);
}

TEST_CASE("quarter-turn of the whole problem preserves the energy") {
  MaterialSet mat = default_mat();
  UnitCell base = make_particle_cell(0.2, 2.0, 0.0, ShapeKind::ellipse);
  UnitCell turned = base;
  turned.particles[0].shape_angle = kPi / 2;
  turned.particles[0].lattice_angle = kPi / 2;
  SolveOptions opts;
  opts.rel_tol = 1e-10;
  ElasticSolution e0 = ElasticSystem(rasterize(base, 32), base, mat)
                           .minimize({1}, BetaSpec::free_strain(), opts);
  ElasticSolution e1 = ElasticSystem(rasterize(turned, 32), turned, mat)
                           .minimize({1}, BetaSpec::free_strain(), opts);
  CHECK(e1.energy == doctest::Approx(e0.energy).epsilon(1e-6));
  // the optimal strain rotates with the problem
  CHECK(e1.beta(0, 0) == doctest::Approx(e0.beta(1, 1)).epsilon(1e-4));
  CHECK(e1.beta(1, 1) == doctest::Approx(e0.beta(0, 0)).epsilon(1e-4));
}

TEST_CASE("solver progress is monotone and converges") {
  RasterGrid raster = rasterize(disk_cell(0.3), 32);
  MaterialSet mat = default_mat();
  ElasticSystem sys(raster, disk_cell(0.3), mat);
  std::vector<double> snapshots;
  SolveOptions opts;
  opts.monitor = [&](long, double e) { snapshots.push_back(e); };
  opts.monitor_stride = 10;
  ElasticSolution sol = sys.minimize({1}, BetaSpec::free_strain(), opts);
  REQUIRE(snapshots.size() > 1);
  for (std::size_t i = 1; i < snapshots.size(); ++i)
    REQUIRE(snapshots[i] <= snapshots[i - 1] + 1e-12);
  CHECK(sol.iterations > 0);
  CHECK(sol.residual <= 1e-8);

  SolveOptions strangled;
  strangled.max_iter = 2;
  CHECK_THROWS_AS(sys.minimize({1}, BetaSpec::free_strain(), strangled),
                  ConvergenceError);
}

TEST_CASE("particle strain bookkeeping") {
  UnitCell cell = disk_cell(0.3);
  RasterGrid raster = rasterize(cell, 32);
  MaterialSet mat = default_mat();
  ElasticSystem sys(raster, cell, mat);
  ElasticSolution sol = sys.minimize({1}, BetaSpec::free_strain());
  REQUIRE(sol.particle_gradient.size() == 1);
  REQUIRE(sol.particle_strain.size() == 1);
  Eigen::Matrix2d g = sol.particle_gradient[0];
  Eigen::Matrix2d want = sol.beta + 0.5 * (g + g.transpose());
  CHECK((sol.particle_strain[0] - want).norm() < 1e-12);
  // the transformed particle carries most of its 0.116 eigenstrain
  CHECK(sol.particle_strain[0](0, 0) > 0.05);

  std::vector<double> density = sys.polymer_energy_density(sol);
  REQUIRE(static_cast<int>(density.size()) == 32 * 32);
  double sum = 0.0;
  for (int ix = 0; ix < 32; ++ix)
    for (int iy = 0; iy < 32; ++iy) {
      const double d = density[static_cast<std::size_t>(ix) * 32 + iy];
      REQUIRE(d >= 0.0);
      if (raster.label(ix, iy) != 0) REQUIRE(d == 0.0);
      sum += d;
    }
  const double polymer_total = sum / (32.0 * 32.0);
  CHECK(polymer_total > 0.0);
  CHECK(polymer_total <= sol.energy + 1e-12);
}

TEST_CASE("dof layout invariants") {
  RasterGrid raster = rasterize(disk_cell(0.3), 32);
  ElasticSystem sys(raster, disk_cell(0.3), default_mat());
  CHECK(sys.n() == 32);
  CHECK(sys.particle_count() == 1);
  CHECK(sys.dof_count() ==
        2L * sys.free_node_count() + 6L * sys.particle_count() + 3);
  CHECK(sys.beta_base() == sys.dof_count() - 3);
  CHECK(sys.particle_base(0) == 2L * sys.free_node_count());
}

}  // TEST_SUITE
