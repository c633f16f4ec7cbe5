#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace msmcell {

// External field and magnetization constants. Energies are densities in MPa;
// magnetization magnitudes are folded into the two Ms ratios.
struct MagneticParams {
  double ms_over_mu0 = 0.50;   // MPa per Tesla
  double ms2_over_mu0 = 0.31;  // MPa
  double k_u = 0.13;           // MPa
  Eigen::Vector2d h_ext{1.0, 0.0};  // Tesla
};

// Full material description of the composite. Defaults are the standard
// NiMnGa-in-soft-polymer parameter set used throughout the tests.
struct MaterialSet {
  // MSM crystal, cubic in-plane constants (MPa) and transformation strain
  double c11 = 160e3;
  double c12 = 156e3;
  double c44 = 40e3;
  double eps0 = 0.058;

  double ku = 0.13;           // MPa
  double ms_over_mu0 = 0.50;  // MPa/T
  double ms2_over_mu0 = 0.31; // MPa

  // polymer matrix (isotropic, plane strain)
  double polymer_e = 1.0;   // MPa
  double polymer_nu = 0.45;

  double field_t = 1.0;       // Tesla
  double field_angle = 0.0;   // radians from +x

  int reference_phase = 2;    // stress-free variant at solidification
  int eigenstrain_sign = 1;   // +1: variant i elongates along axis i

  Eigen::Vector2d field_vector() const {
    return field_t * Eigen::Vector2d(std::cos(field_angle),
                                     std::sin(field_angle));
  }
  MagneticParams magnetic() const {
    return {ms_over_mu0, ms2_over_mu0, ku, field_vector()};
  }
};

}  // namespace msmcell
