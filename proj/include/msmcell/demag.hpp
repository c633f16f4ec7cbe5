#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "msmcell/geometry.hpp"

namespace msmcell {

// Real n x n two-component field sampled at pixel centers,
// row-major [ix*n + iy] like RasterGrid::owner.
struct VectorField {
  int n = 0;
  std::vector<double> x, y;

  static VectorField zero(int n) {
    VectorField f;
    f.n = n;
    f.x.assign(static_cast<std::size_t>(n) * n, 0.0);
    f.y.assign(static_cast<std::size_t>(n) * n, 0.0);
    return f;
  }
};

using GradientField = VectorField;

// Scratch buffers and transform plans for one grid size. Not thread-safe;
// use one workspace per concurrent task.
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(int n);  // n >= 16, power of two
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  int n() const { return n_; }

  // In-place complex transforms on buf(); forward uses the e^{-i k x}
  // convention, backward is unnormalized (scale by 1/n^2 yourself).
  std::complex<double>* buf();
  void forward();
  void backward();

  // Integer frequency in [-n/2, n/2) for array index idx.
  static int freq(int idx, int n) { return idx < n / 2 ? idx : idx - n; }
  // Derivative frequency: the Nyquist mode is zeroed so that spectral
  // derivatives of real fields stay real.
  static int dfreq(int idx, int n) { return idx == n / 2 ? 0 : freq(idx, n); }

 private:
  int n_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Gradient of the zero-mean periodic potential U solving  div(grad U + M) = 0.
GradientField solve_periodic_potential(const VectorField& m,
                                       SpectralWorkspace& ws);

// (1/2) * integral |grad U|^2 over the cell, dimensionless. Multiply by
// Ms^2/mu0 for a physical energy density.
double demag_energy(const VectorField& m, SpectralWorkspace& ws);

// Quadratic reduction of the demag energy over per-particle uniform
// magnetizations: energy = (1/2) m^T D m with m stacked as (2i+a).
struct DemagTensor {
  Eigen::MatrixXd d;  // (2 n_p) x (2 n_p), symmetric PSD, dimensionless

  int particle_count() const { return static_cast<int>(d.rows()) / 2; }
  double energy(const Eigen::VectorXd& m_stacked) const {
    return 0.5 * m_stacked.dot(d * m_stacked);
  }
};

DemagTensor demag_tensor(const RasterGrid& raster, SpectralWorkspace& ws);

// Spread per-particle uniform magnetizations onto the pixel grid.
VectorField fill_field(const RasterGrid& raster,
                       const std::vector<Eigen::Vector2d>& m_per_particle);

// Plain-text matrix dump, one grid row per line, space separated.
void dump_scalar_field(const std::string& path, const std::vector<double>& v,
                       int n);

}  // namespace msmcell
