#include "msmcell/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "msmcell/errors.hpp"
#include "msmcell/sweep.hpp"

namespace msmcell {

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read CSV file: " + path);
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(pos));
        break;
      }
      fields.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw ConfigError("CSV file is empty: " + path);
  return t;
}

void validate_schema(const CsvTable& table) {
  std::istringstream hdr(kCsvHeader);
  std::string name;
  while (std::getline(hdr, name, ','))
    if (table.column(name) < 0)
      throw ConfigError("CSV is missing required column: " + name);
  for (std::size_t r = 0; r < table.rows.size(); ++r)
    if (table.rows[r].size() != table.header.size())
      throw ConfigError("CSV row " + std::to_string(r + 2) +
                        " has the wrong field count");
}

namespace {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> pts;  // sorted by x
};

constexpr double kWidth = 800, kHeight = 600;
constexpr double kLeft = 80, kRight = 620, kTop = 50, kBottom = 545;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double map_x(double v, double lo, double hi, bool logx) {
  if (logx) {
    v = std::log10(v);
    lo = std::log10(lo);
    hi = std::log10(hi);
  }
  return kLeft + (v - lo) / (hi - lo) * (kRight - kLeft);
}

double map_y(double v, double lo, double hi) {
  return kBottom - (v - lo) / (hi - lo) * (kBottom - kTop);
}

void render(const std::string& path, const std::string& title,
            const std::string& x_label, const std::string& y_label,
            const std::vector<Series>& series, bool logx) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series)
    for (const auto& [x, y] : s.pts) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmin < xmax)) {
    if (logx) {
      xmin /= 2;
      xmax *= 2;
    } else {
      xmin -= 1;
      xmax += 1;
    }
  }
  if (!(ymin < ymax)) {
    ymin -= 1;
    ymax += 1;
  } else {
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
  }

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
     << kHeight << "\">\n";
  os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"28\" "
     << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"17\">"
     << title << "</text>\n";

  // frame
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
     << kRight - kLeft << "\" height=\"" << kBottom - kTop
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // x ticks
  std::vector<double> xticks;
  if (logx) {
    const int d0 = static_cast<int>(std::ceil(std::log10(xmin) - 1e-9));
    const int d1 = static_cast<int>(std::floor(std::log10(xmax) + 1e-9));
    for (int d = d0; d <= d1; ++d) xticks.push_back(std::pow(10.0, d));
    if (xticks.empty()) xticks = {xmin, xmax};
  } else {
    for (int i = 0; i <= 5; ++i) xticks.push_back(xmin + (xmax - xmin) * i / 5);
  }
  for (double t : xticks) {
    const double px = map_x(t, xmin, xmax, logx);
    os << "<line x1=\"" << px << "\" y1=\"" << kBottom << "\" x2=\"" << px
       << "\" y2=\"" << kBottom + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px << "\" y=\"" << kBottom + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << fmt_num(t) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double t = ymin + (ymax - ymin) * i / 5;
    const double py = map_y(t, ymin, ymax);
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft
       << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 9 << "\" y=\"" << py + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          "font-size=\"12\">"
       << fmt_num(t) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\">"
     << x_label << "</text>\n";
  os << "<text x=\"20\" y=\"" << (kTop + kBottom) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        "font-size=\"14\" transform=\"rotate(-90 20 "
     << (kTop + kBottom) / 2 << ")\">" << y_label << "</text>\n";

  int color = 0;
  double legend_y = kTop + 14;
  for (const auto& s : series) {
    const char* c = kPalette[color % (sizeof kPalette / sizeof *kPalette)];
    ++color;
    if (s.pts.size() >= 2) {
      os << "<polyline fill=\"none\" stroke=\"" << c
         << "\" stroke-width=\"1.6\" points=\"";
      for (const auto& [x, y] : s.pts)
        os << map_x(x, xmin, xmax, logx) << "," << map_y(y, ymin, ymax) << " ";
      os << "\"/>\n";
    }
    for (const auto& [x, y] : s.pts)
      os << "<circle cx=\"" << map_x(x, xmin, xmax, logx) << "\" cy=\""
         << map_y(y, ymin, ymax) << "\" r=\"2.4\" fill=\"" << c << "\"/>\n";

    os << "<line x1=\"" << kRight + 12 << "\" y1=\"" << legend_y - 4
       << "\" x2=\"" << kRight + 34 << "\" y2=\"" << legend_y - 4
       << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << kRight + 40 << "\" y=\"" << legend_y
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label
       << "</text>\n";
    legend_y += 18;
  }
  os << "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write SVG file: " + path);
  out << os.str();
}

double to_num(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("CSV field is not a number (") + what +
                      "): " + s);
  }
}

}  // namespace

void write_plots(const CsvTable& table, const std::string& out_dir) {
  validate_schema(table);
  std::filesystem::create_directories(out_dir);

  const int c_param = table.column("sweep_param");
  const int c_value = table.column("sweep_value");
  const int c_assign = table.column("assignment");
  const int c_mode = table.column("beta_mode");
  const int c_total = table.column("E_total_MPa");
  const int c_strain = table.column("strain_along_field");

  const bool logx =
      !table.rows.empty() && table.rows.front()[c_param] == "polymer_E";
  const std::string x_label =
      table.rows.empty() ? "sweep value"
                         : table.rows.front()[c_param] +
                               (logx ? std::string(" [MPa]") : std::string());

  // (assignment, mode) -> sorted samples
  std::map<std::pair<std::string, std::string>,
           std::map<double, double>> energy, strain;
  for (const auto& row : table.rows) {
    const double v = to_num(row[c_value], "sweep_value");
    const auto key = std::make_pair(row[c_assign], row[c_mode]);
    energy[key][v] = to_num(row[c_total], "E_total_MPa");
    strain[key][v] = to_num(row[c_strain], "strain_along_field");
  }

  auto to_series = [](const std::map<double, double>& m, std::string label) {
    Series s;
    s.label = std::move(label);
    s.pts.assign(m.begin(), m.end());
    return s;
  };

  // energy: every free series, plus clamped series that differ from free
  std::vector<Series> es;
  for (const auto& [key, pts] : energy) {
    if (key.second != "free") continue;
    es.push_back(to_series(pts, key.first + " free"));
  }
  for (const auto& [key, pts] : energy) {
    if (key.second != "clamped") continue;
    auto free_it = energy.find({key.first, "free"});
    bool differs = free_it == energy.end();
    if (!differs) {
      for (const auto& [x, y] : pts) {
        auto it = free_it->second.find(x);
        if (it == free_it->second.end() ||
            std::abs(it->second - y) >
                1e-12 * std::max(1.0, std::abs(y))) {
          differs = true;
          break;
        }
      }
    }
    if (differs) es.push_back(to_series(pts, key.first + " clamped"));
  }
  render(out_dir + "/energy.svg", "Free energy density", x_label,
         "energy density [MPa]", es, logx);

  // strain: free series only
  std::vector<Series> ss;
  for (const auto& [key, pts] : strain) {
    if (key.second != "free") continue;
    ss.push_back(to_series(pts, key.first + " free"));
  }
  render(out_dir + "/strain.svg", "Spontaneous strain along the field",
         x_label, "strain along field", ss, logx);

  // work: clamped minus free total energy per assignment
  std::vector<Series> ws;
  for (const auto& [key, pts] : energy) {
    if (key.second != "clamped") continue;
    auto free_it = energy.find({key.first, "free"});
    if (free_it == energy.end()) continue;
    std::map<double, double> gap;
    for (const auto& [x, y] : pts) {
      auto it = free_it->second.find(x);
      if (it != free_it->second.end()) gap[x] = y - it->second;
    }
    ws.push_back(to_series(gap, key.first + " clamped-free gap"));
  }
  render(out_dir + "/work_output.svg", "Work output", x_label,
         "work output [MPa]", ws, logx);
}

}  // namespace msmcell
