#include "msmcell/demag.hpp"

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <mutex>

#include "msmcell/errors.hpp"

namespace msmcell {

namespace {
// The planner is process-global and not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpectralWorkspace::Impl {
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

SpectralWorkspace::SpectralWorkspace(int n) : n_(n), impl_(new Impl) {
  if (n < 16 || !is_pow2(n))
    throw ResolutionError("spectral workspace needs a power-of-two n >= 16");
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->buf = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
  // FFTW_ESTIMATE keeps planning deterministic and cheap
  impl_->fwd = fftw_plan_dft_2d(n, n, impl_->buf, impl_->buf, FFTW_FORWARD,
                                FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_2d(n, n, impl_->buf, impl_->buf, FFTW_BACKWARD,
                                FFTW_ESTIMATE);
}

SpectralWorkspace::~SpectralWorkspace() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
  if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
  if (impl_->buf) fftw_free(impl_->buf);
}

std::complex<double>* SpectralWorkspace::buf() {
  return reinterpret_cast<std::complex<double>*>(impl_->buf);
}

void SpectralWorkspace::forward() { fftw_execute(impl_->fwd); }
void SpectralWorkspace::backward() { fftw_execute(impl_->bwd); }

namespace {

// Forward transform of a real field into `out`.
void fft_forward(const std::vector<double>& v, SpectralWorkspace& ws,
                 std::vector<std::complex<double>>& out) {
  const std::size_t m = v.size();
  std::complex<double>* b = ws.buf();
  for (std::size_t i = 0; i < m; ++i) b[i] = v[i];
  ws.forward();
  out.assign(b, b + m);
}

}  // namespace

GradientField solve_periodic_potential(const VectorField& m,
                                       SpectralWorkspace& ws) {
  const int n = ws.n();
  if (m.n != n || m.x.size() != static_cast<std::size_t>(n) * n ||
      m.y.size() != m.x.size())
    throw Error("field dimensions do not match workspace");

  std::vector<std::complex<double>> mx_hat, my_hat;
  fft_forward(m.x, ws, mx_hat);
  fft_forward(m.y, ws, my_hat);

  // grad U in Fourier space: -d (d . M^) / |d|^2, with the Nyquist
  // derivative frequency zeroed so the inverse transform is real.
  GradientField g = VectorField::zero(n);
  std::complex<double>* b = ws.buf();
  for (int comp = 0; comp < 2; ++comp) {
    for (int kx = 0; kx < n; ++kx) {
      const double dx = SpectralWorkspace::dfreq(kx, n);
      for (int ky = 0; ky < n; ++ky) {
        const double dy = SpectralWorkspace::dfreq(ky, n);
        const double norm2 = dx * dx + dy * dy;
        const std::size_t idx = static_cast<std::size_t>(kx) * n + ky;
        if (norm2 == 0.0) {
          b[idx] = 0.0;
          continue;
        }
        const std::complex<double> div = dx * mx_hat[idx] + dy * my_hat[idx];
        const double da = comp == 0 ? dx : dy;
        b[idx] = -da * div / norm2;
      }
    }
    ws.backward();
    auto& dst = comp == 0 ? g.x : g.y;
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = b[i].real() * scale;
  }
  return g;
}

double demag_energy(const VectorField& m, SpectralWorkspace& ws) {
  const int n = ws.n();
  if (m.n != n) throw Error("field dimensions do not match workspace");

  std::vector<std::complex<double>> mx_hat, my_hat;
  fft_forward(m.x, ws, mx_hat);
  fft_forward(m.y, ws, my_hat);

  // Full integer frequencies here: the discrete Parseval identity for the
  // energy is exact only if the Nyquist modes are kept.
  double acc = 0.0;
  for (int kx = 0; kx < n; ++kx) {
    const double fx = SpectralWorkspace::freq(kx, n);
    for (int ky = 0; ky < n; ++ky) {
      if (kx == 0 && ky == 0) continue;
      const double fy = SpectralWorkspace::freq(ky, n);
      const std::size_t idx = static_cast<std::size_t>(kx) * n + ky;
      const std::complex<double> div = fx * mx_hat[idx] + fy * my_hat[idx];
      acc += std::norm(div) / (fx * fx + fy * fy);
    }
  }
  const double n2 = static_cast<double>(n) * n;
  return 0.5 * acc / (n2 * n2);
}

DemagTensor demag_tensor(const RasterGrid& raster, SpectralWorkspace& ws) {
  const int n = ws.n();
  if (raster.n != n) throw Error("raster resolution does not match workspace");
  const int n_p = raster.particle_count();
  const std::size_t m = static_cast<std::size_t>(n) * n;

  // One indicator transform per particle replaces the 2 n_p unit solves.
  std::vector<std::vector<std::complex<double>>> chi(n_p);
  {
    std::vector<double> ind(m);
    for (int i = 0; i < n_p; ++i) {
      for (std::size_t px = 0; px < m; ++px)
        ind[px] = raster.owner[px] == i + 1 ? 1.0 : 0.0;
      fft_forward(ind, ws, chi[i]);
    }
  }

  DemagTensor t;
  t.d = Eigen::MatrixXd::Zero(2 * n_p, 2 * n_p);
  for (int kx = 0; kx < n; ++kx) {
    const double fx = SpectralWorkspace::freq(kx, n);
    for (int ky = 0; ky < n; ++ky) {
      if (kx == 0 && ky == 0) continue;
      const double fy = SpectralWorkspace::freq(ky, n);
      const std::size_t idx = static_cast<std::size_t>(kx) * n + ky;
      const double inv = 1.0 / (fx * fx + fy * fy);
      const double f[2] = {fx, fy};
      for (int i = 0; i < n_p; ++i) {
        for (int j = i; j < n_p; ++j) {
          const double re = (chi[i][idx] * std::conj(chi[j][idx])).real();
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              const double v = f[a] * f[b] * re * inv;
              t.d(2 * i + a, 2 * j + b) += v;
              if (j != i) t.d(2 * j + b, 2 * i + a) += v;
            }
        }
      }
    }
  }
  const double n2 = static_cast<double>(n) * n;
  t.d /= n2 * n2;
  t.d = 0.5 * (t.d + t.d.transpose()).eval();
  return t;
}

VectorField fill_field(const RasterGrid& raster,
                       const std::vector<Eigen::Vector2d>& m_per_particle) {
  if (static_cast<int>(m_per_particle.size()) != raster.particle_count())
    throw Error("one magnetization vector per particle required");
  VectorField f = VectorField::zero(raster.n);
  const std::size_t m = f.x.size();
  for (std::size_t px = 0; px < m; ++px) {
    const std::int32_t o = raster.owner[px];
    if (o == 0) continue;
    f.x[px] = m_per_particle[o - 1].x();
    f.y[px] = m_per_particle[o - 1].y();
  }
  return f;
}

void dump_scalar_field(const std::string& path, const std::vector<double>& v,
                       int n) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open dump file: " + path);
  out.precision(17);
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      if (iy) out << ' ';
      out << v[static_cast<std::size_t>(ix) * n + iy];
    }
    out << '\n';
  }
}

}  // namespace msmcell
