#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "msmcell/demag.hpp"
#include "msmcell/geometry.hpp"
#include "msmcell/materials.hpp"

namespace msmcell {

// Per-particle uniform magnetization directions, angle-parametrized so the
// unit-length constraint is built in.
struct MagnetizationState {
  Eigen::VectorXd angles;

  Eigen::Vector2d direction(int i) const {
    return {std::cos(angles[i]), std::sin(angles[i])};
  }
  // directions stacked as (2i, 2i+1), the layout DemagTensor uses
  Eigen::VectorXd stacked() const {
    Eigen::VectorXd m(2 * angles.size());
    for (int i = 0; i < angles.size(); ++i)
      m.segment<2>(2 * i) = direction(i);
    return m;
  }
};

// Lab-frame easy axis of each variant for each particle.
struct EasyAxes {
  std::vector<std::array<Eigen::Vector2d, 2>> axes;
  const Eigen::Vector2d& of(int particle, int phase) const {
    return axes[particle][phase - 1];
  }
};

EasyAxes easy_axes(const UnitCell& cell);

double anisotropy_energy(const MagnetizationState& state,
                         const std::vector<int>& phases, const UnitCell& cell,
                         const RasterGrid& raster, const MagneticParams& pars);

double zeeman_energy(const MagnetizationState& state, const RasterGrid& raster,
                     const MagneticParams& pars);

struct MagneticBreakdown {
  double anisotropy = 0.0;
  double demag = 0.0;
  double zeeman = 0.0;
  double total() const { return anisotropy + demag + zeeman; }
};

MagneticBreakdown magnetic_energy(const MagnetizationState& state,
                                  const std::vector<int>& phases,
                                  const DemagTensor& d,
                                  const MagneticParams& pars,
                                  const UnitCell& cell,
                                  const RasterGrid& raster);

// Analytic derivative of the total magnetic energy with respect to the
// angles.
Eigen::VectorXd magnetic_gradient(const MagnetizationState& state,
                                  const std::vector<int>& phases,
                                  const DemagTensor& d,
                                  const MagneticParams& pars,
                                  const UnitCell& cell,
                                  const RasterGrid& raster);

struct MagneticMinimum {
  MagnetizationState state;
  MagneticBreakdown breakdown;
  double energy = 0.0;  // MPa
};

// Global minimum over all angle combinations: multi-start damped Newton.
// Equispaced product starts for up to 3 particles, seeded random joint
// starts beyond that.
MagneticMinimum minimize_magnetization(const std::vector<int>& phases,
                                       const DemagTensor& d,
                                       const MagneticParams& pars,
                                       const UnitCell& cell,
                                       const RasterGrid& raster,
                                       std::uint64_t seed = 0x5eed);

}  // namespace msmcell
