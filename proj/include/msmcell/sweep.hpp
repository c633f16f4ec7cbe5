#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "msmcell/cellsolver.hpp"

namespace msmcell {

enum class SweepParam {
  polymer_modulus,
  aspect_ratio,
  volume_fraction,
  field_angle,
};

// CSV names: polymer_E, aspect_ratio, volume_fraction, field_angle
std::string sweep_param_name(SweepParam p);
SweepParam sweep_param_from_name(const std::string& name);

// Parametric single-particle geometry; required for sweeps that change the
// particle shape.
struct GeneratorSpec {
  double fraction = 0.3;
  double aspect = 1.0;
  double angle = 0.0;
  ShapeKind kind = ShapeKind::ellipse;

  UnitCell build() const {
    return make_particle_cell(fraction, aspect, angle, kind);
  }
};

struct SweepSpec {
  CellProblemSpec base;
  std::optional<GeneratorSpec> generator;
  SweepParam param = SweepParam::polymer_modulus;
  std::vector<double> values;
  int threads = 0;  // 0 = hardware concurrency
};

std::vector<double> log_spaced(double lo, double hi, int points);

struct SweepRecord {
  int point = 0;
  double value = 0.0;
  std::string assignment;
  bool clamped = false;
  EnergyBreakdown energy;
  MacroStrain beta = MacroStrain::Zero();
  double strain_along_field = 0.0;
  double work_output = 0.0;  // per sweep point
};

struct FailedPoint {
  int point = 0;
  double value = 0.0;
  std::string message;
};

struct SweepTable {
  SweepParam param = SweepParam::polymer_modulus;
  std::string reference_assignment;
  std::vector<SweepRecord> records;   // ordered by (point, assignment, mode)
  std::vector<FailedPoint> failures;  // failed points, by point index
};

// Evaluates solve_cell at every sweep value; failures are collected, not
// fatal. Record order is independent of the worker count.
SweepTable run_sweep(const SweepSpec& spec);

struct Crossing {
  std::string series_a;  // transformed free energy
  std::string series_b;  // untransformed free energy
  double value = 0.0;    // interpolated sweep value at equal energy
};

// Sign changes of (transformed - untransformed) free energy, interpolated
// linearly in log of the sweep value. Meaningful for modulus sweeps.
std::vector<Crossing> find_crossings(const SweepTable& table);

extern const char kCsvHeader[];

void write_csv(const SweepTable& table, std::ostream& os);
void write_csv_file(const SweepTable& table, const std::string& path);

}  // namespace msmcell
