#pragma once

#include <memory>
#include <string>

#include "msmcell/elastic.hpp"
#include "msmcell/magnetic.hpp"

namespace msmcell {

struct CellProblemSpec {
  UnitCell cell;
  int resolution = 128;
  MaterialSet materials;
  std::uint64_t seed = 0x5eed;  // magnetization multi-start seed
};

using PhaseAssignment = std::vector<int>;  // one variant index per particle

std::string assignment_label(const PhaseAssignment& phases);

struct EnergyBreakdown {
  double elastic = 0.0;
  double anisotropy = 0.0;
  double demag = 0.0;
  double zeeman = 0.0;
  double total() const { return elastic + anisotropy + demag + zeeman; }
};

// Rasterization, demag tensor, and elastic assembly for one spec; shared by
// all assignment evaluations at that geometry and modulus.
class CellContext {
 public:
  explicit CellContext(const CellProblemSpec& spec);
  // Reuse a raster and demag tensor (both depend only on geometry).
  CellContext(const CellProblemSpec& spec, RasterGrid raster, DemagTensor d);

  const CellProblemSpec& spec() const { return spec_; }
  const RasterGrid& raster() const { return raster_; }
  const DemagTensor& demag() const { return demag_; }
  const ElasticSystem& elastic() const { return *elastic_; }

 private:
  CellProblemSpec spec_;
  RasterGrid raster_;
  DemagTensor demag_;
  std::shared_ptr<const ElasticSystem> elastic_;
};

struct EvalResult {
  EnergyBreakdown breakdown;
  MacroStrain beta = MacroStrain::Zero();
  MagnetizationState magnetization;
  ElasticSolution elastic;
};

// Elastic and magnetic minimizations for one fixed phase assignment. They
// decouple: Maxwell is solved in the reference configuration.
EvalResult energy_of_assignment(const CellContext& ctx,
                                const PhaseAssignment& phases,
                                const BetaSpec& mode);

struct AssignmentResult {
  PhaseAssignment phases;
  EnergyBreakdown free_energy;
  EnergyBreakdown clamped_energy;  // beta clamped to zero
  MacroStrain beta = MacroStrain::Zero();  // free-mode optimum
  double strain_along_field = 0.0;
  MagnetizationState magnetization;
};

struct CellResult {
  std::vector<AssignmentResult> assignments;
  int untransformed_index = -1;  // all particles in the reference phase
  int transformed_index = -1;    // best free energy among the others
  int global_min_index = -1;     // best free energy overall
  double work_output = 0.0;      // MPa

  const AssignmentResult& untransformed() const {
    return assignments[untransformed_index];
  }
  const AssignmentResult& transformed() const {
    return assignments[transformed_index];
  }
};

// Exhaustive enumeration over the 2^{n_p} assignments in both beta modes.
CellResult solve_cell(const CellContext& ctx);
CellResult solve_cell(const CellProblemSpec& spec);

// Clamped-minus-free energy of the transformed assignment.
double work_output(const CellProblemSpec& spec);

// Modulus at which transformed and untransformed free energies cross,
// found by bisection on log E down to relative width 1e-3.
double critical_modulus(const CellProblemSpec& spec, double e_lo, double e_hi);

}  // namespace msmcell
