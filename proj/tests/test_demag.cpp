#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "msmcell/demag.hpp"

using namespace msmcell;

namespace {

// Horizontal stripe raster: particle pixels are the rows iy in [0, v*n).
RasterGrid stripe_raster(int n, double v) {
  RasterGrid g;
  g.n = n;
  g.owner.assign(static_cast<std::size_t>(n) * n, 0);
  const int rows = static_cast<int>(std::lround(v * n));
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < rows; ++iy)
      g.owner[static_cast<std::size_t>(ix) * n + iy] = 1;
  g.areas = {static_cast<double>(rows) / n};
  return g;
}

// Single-particle raster with pixels chosen by a coin flip; only valid as
// a demag input, not as a particle layout.
RasterGrid random_raster(int n, std::mt19937_64& rng) {
  RasterGrid g;
  g.n = n;
  g.owner.assign(static_cast<std::size_t>(n) * n, 0);
  std::bernoulli_distribution coin(0.35);
  int count = 0;
  for (auto& o : g.owner)
    if (coin(rng)) {
      o = 1;
      ++count;
    }
  if (count == 0) {
    g.owner[0] = 1;
    count = 1;
  }
  g.areas = {static_cast<double>(count) / (static_cast<double>(n) * n)};
  return g;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_SUITE("demag") {

TEST_CASE("uniform magnetization induces no field") {
  const int n = 32;
  SpectralWorkspace ws(n);
  VectorField m = VectorField::zero(n);
  for (auto& x : m.x) x = 0.6;
  for (auto& y : m.y) y = -0.8;
  GradientField g = solve_periodic_potential(m, ws);
  CHECK(max_abs(g.x) < 1e-13);
  CHECK(max_abs(g.y) < 1e-13);
  CHECK(demag_energy(m, ws) == doctest::Approx(0.0).epsilon(1e-13));
}

TEST_CASE("divergence-free magnetization induces no field") {
  const int n = 32;
  SpectralWorkspace ws(n);
  VectorField m = VectorField::zero(n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      m.x[static_cast<std::size_t>(ix) * n + iy] =
          std::cos(2 * 3.14159265358979323846 * (iy + 0.5) / n);
  GradientField g = solve_periodic_potential(m, ws);
  CHECK(max_abs(g.x) < 1e-12);
  CHECK(max_abs(g.y) < 1e-12);
  CHECK(demag_energy(m, ws) < 1e-12);
}

TEST_CASE("stripe magnetized across the layers") {
  const int n = 64;
  SpectralWorkspace ws(n);
  for (double v : {0.5, 0.25}) {
    RasterGrid raster = stripe_raster(n, v);
    VectorField m = fill_field(raster, {Eigen::Vector2d(0, 1)});
    // hand-solved periodic layer problem: grad U is piecewise constant
    GradientField g = solve_periodic_potential(m, ws);
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy) {
        const double want = raster.label(ix, iy) ? v - 1.0 : v;
        REQUIRE(g.y[static_cast<std::size_t>(ix) * n + iy] ==
                doctest::Approx(want).epsilon(1e-11));
      }
    CHECK(max_abs(g.x) < 1e-12);
    CHECK(demag_energy(m, ws) ==
          doctest::Approx(0.5 * v * (1 - v)).epsilon(1e-12));
  }
}

TEST_CASE("stripe magnetized along the layers costs nothing") {
  const int n = 64;
  SpectralWorkspace ws(n);
  RasterGrid raster = stripe_raster(n, 0.25);
  VectorField m = fill_field(raster, {Eigen::Vector2d(1, 0)});
  CHECK(demag_energy(m, ws) < 1e-13);
}

TEST_CASE("potential solve is linear") {
  const int n = 32;
  SpectralWorkspace ws(n);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField m1 = VectorField::zero(n), m2 = VectorField::zero(n);
  for (std::size_t i = 0; i < m1.x.size(); ++i) {
    m1.x[i] = u(rng);
    m1.y[i] = u(rng);
    m2.x[i] = u(rng);
    m2.y[i] = u(rng);
  }
  VectorField sum = VectorField::zero(n);
  const double alpha = 1.7;
  for (std::size_t i = 0; i < sum.x.size(); ++i) {
    sum.x[i] = alpha * m1.x[i] + m2.x[i];
    sum.y[i] = alpha * m1.y[i] + m2.y[i];
  }
  GradientField g1 = solve_periodic_potential(m1, ws);
  GradientField g2 = solve_periodic_potential(m2, ws);
  GradientField gs = solve_periodic_potential(sum, ws);
  double err = 0.0;
  for (std::size_t i = 0; i < gs.x.size(); ++i) {
    err = std::max(err, std::abs(gs.x[i] - alpha * g1.x[i] - g2.x[i]));
    err = std::max(err, std::abs(gs.y[i] - alpha * g1.y[i] - g2.y[i]));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("indicator self-energy sums to a(1-a)") {
  const int n = 32;
  SpectralWorkspace ws(n);
  std::mt19937_64 rng(0x5eed);
  for (int trial = 0; trial < 20; ++trial) {
    RasterGrid raster = random_raster(n, rng);
    const double a = raster.areas[0];
    double sum = 0.0;
    sum += 2.0 * demag_energy(fill_field(raster, {Eigen::Vector2d(1, 0)}), ws);
    sum += 2.0 * demag_energy(fill_field(raster, {Eigen::Vector2d(0, 1)}), ws);
    REQUIRE(sum == doctest::Approx(a * (1 - a)).epsilon(1e-10));
  }
}

TEST_CASE("tensor and direct energy agree") {
  const int n = 64;
  SpectralWorkspace ws(n);
  UnitCell cell;
  cell.particles.push_back({Ellipse{0.2, 0.12}, {0.27, 0.31}, 0.4, 0.0});
  cell.particles.push_back({Ellipse{0.15, 0.15}, {0.75, 0.78}, 0.0, 0.0});
  RasterGrid raster = rasterize(cell, n);
  DemagTensor d = demag_tensor(raster, ws);
  REQUIRE(d.particle_count() == 2);
  CHECK((d.d - d.d.transpose()).norm() < 1e-14);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 2 * 3.14159265358979323846);
  for (int trial = 0; trial < 8; ++trial) {
    const double t0 = u(rng), t1 = u(rng);
    std::vector<Eigen::Vector2d> m = {{std::cos(t0), std::sin(t0)},
                                      {std::cos(t1), std::sin(t1)}};
    Eigen::VectorXd stacked(4);
    stacked << m[0].x(), m[0].y(), m[1].x(), m[1].y();
    const double direct = demag_energy(fill_field(raster, m), ws);
    REQUIRE(d.energy(stacked) == doctest::Approx(direct).epsilon(1e-10));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.d);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("block traces of the tensor") {
  const int n = 32;
  SpectralWorkspace ws(n);
  UnitCell cell;
  cell.particles.push_back({Ellipse{0.18, 0.1}, {0.25, 0.25}, 0.0, 0.0});
  cell.particles.push_back({Rectangle{0.12, 0.16}, {0.75, 0.7}, 0.0, 0.0});
  RasterGrid raster = rasterize(cell, n);
  DemagTensor d = demag_tensor(raster, ws);
  for (int i = 0; i < 2; ++i) {
    const double a = raster.areas[i];
    const double tr = d.d(2 * i, 2 * i) + d.d(2 * i + 1, 2 * i + 1);
    CHECK(tr == doctest::Approx(a * (1 - a)).epsilon(1e-10));
  }
  // disjoint supports: cross-block trace is -a_i a_j
  const double cross = d.d(0, 2) + d.d(1, 3);
  CHECK(cross ==
        doctest::Approx(-raster.areas[0] * raster.areas[1]).epsilon(1e-10));
}

TEST_CASE("stripe tensor concentrates in the normal direction") {
  const int n = 64;
  SpectralWorkspace ws(n);
  RasterGrid raster = stripe_raster(n, 0.25);
  DemagTensor d = demag_tensor(raster, ws);
  CHECK(d.d(1, 1) == doctest::Approx(0.25 * 0.75).epsilon(1e-12));
  CHECK(std::abs(d.d(0, 0)) < 1e-13);
  CHECK(std::abs(d.d(0, 1)) < 1e-13);
}

TEST_CASE("centered disk tensor is isotropic") {
  const int n = 128;
  SpectralWorkspace ws(n);
  UnitCell cell =
      make_particle_cell(0.3, 1.0, 0.0, ShapeKind::ellipse);
  RasterGrid raster = rasterize(cell, n);
  DemagTensor d = demag_tensor(raster, ws);
  CHECK(d.d(0, 0) == doctest::Approx(d.d(1, 1)).epsilon(1e-12));
  CHECK(std::abs(d.d(0, 1)) < 1e-12);
  // interaction with periodic images pulls the factor below the dilute 0.15
  CHECK(d.d(0, 0) == doctest::Approx(0.105).epsilon(0.02));
}

TEST_CASE("quarter-turn of the raster swaps the tensor axes") {
  const int n = 64;
  SpectralWorkspace ws(n);
  UnitCell base = make_particle_cell(0.2, 2.0, 0.0, ShapeKind::ellipse);
  UnitCell turned = base;
  turned.particles[0].shape_angle = 3.14159265358979323846 / 2;
  DemagTensor d0 = demag_tensor(rasterize(base, n), ws);
  DemagTensor d1 = demag_tensor(rasterize(turned, n), ws);
  CHECK(d1.d(0, 0) == doctest::Approx(d0.d(1, 1)).epsilon(1e-10));
  CHECK(d1.d(1, 1) == doctest::Approx(d0.d(0, 0)).epsilon(1e-10));
}

TEST_CASE("field fill respects ownership") {
  RasterGrid raster = stripe_raster(32, 0.25);
  VectorField m = fill_field(raster, {Eigen::Vector2d(0.3, -0.4)});
  for (int ix = 0; ix < 32; ++ix)
    for (int iy = 0; iy < 32; ++iy) {
      const std::size_t i = static_cast<std::size_t>(ix) * 32 + iy;
      if (raster.label(ix, iy)) {
        REQUIRE(m.x[i] == 0.3);
        REQUIRE(m.y[i] == -0.4);
      } else {
        REQUIRE(m.x[i] == 0.0);
        REQUIRE(m.y[i] == 0.0);
      }
    }
}

TEST_CASE("scalar field dump round-trips") {
  const int n = 16;
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.125 * i;
  const std::string path = "dump_test.txt";
  dump_scalar_field(path, v, n);
  std::ifstream in(path);
  REQUIRE(in.good());
  int lines = 0;
  std::string line;
  double first = -1.0;
  while (std::getline(in, line)) {
    if (lines == 0) std::sscanf(line.c_str(), "%lf", &first);
    ++lines;
  }
  CHECK(lines == n);
  CHECK(first == 0.0);
  std::remove(path.c_str());
}

}  // TEST_SUITE
