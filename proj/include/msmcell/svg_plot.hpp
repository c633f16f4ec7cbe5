#pragma once

#include <string>
#include <vector>

namespace msmcell {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // column index by name, -1 if absent
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// Throws ConfigError naming the first missing column of the sweep schema.
void validate_schema(const CsvTable& table);

// Emits energy.svg, strain.svg, work_output.svg into out_dir (created if
// needed): energy and strain per (assignment, mode) series, work output as
// the clamped-minus-free gap per assignment. Pure-text SVG.
void write_plots(const CsvTable& table, const std::string& out_dir);

}  // namespace msmcell
