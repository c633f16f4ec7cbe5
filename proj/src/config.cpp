#include "msmcell/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "msmcell/errors.hpp"

namespace msmcell {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config key `" + path + "`: " + what);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double num_or(const json& parent, const char* key, const std::string& path,
              double fallback) {
  const json* j = find(parent, key);
  return j ? num(*j, path) : fallback;
}

long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Eigen::Vector2d vec2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
}

ShapeKind shape_kind(const json& j, const std::string& path) {
  const std::string s = str(j, path);
  if (s == "ellipse") return ShapeKind::ellipse;
  if (s == "rectangle") return ShapeKind::rectangle;
  fail(path, "expected \"ellipse\" or \"rectangle\"");
}

ShapeSpec parse_shape(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const json* type = find(j, "type");
  if (!type) fail(path + ".type", "missing");
  const std::string t = str(*type, path + ".type");
  if (t == "ellipse") {
    check_keys(j, path, {"type", "semi_a", "semi_b"});
    Ellipse e{num_or(j, "semi_a", path + ".semi_a", 0.0),
              num_or(j, "semi_b", path + ".semi_b", 0.0)};
    return e;
  }
  if (t == "rectangle") {
    check_keys(j, path, {"type", "half_w", "half_h"});
    Rectangle r{num_or(j, "half_w", path + ".half_w", 0.0),
                num_or(j, "half_h", path + ".half_h", 0.0)};
    return r;
  }
  if (t == "polygon") {
    check_keys(j, path, {"type", "vertices"});
    const json* v = find(j, "vertices");
    if (!v || !v->is_array()) fail(path + ".vertices", "expected an array");
    Polygon p;
    for (std::size_t i = 0; i < v->size(); ++i)
      p.vertices.push_back(
          vec2((*v)[i], path + ".vertices[" + std::to_string(i) + "]"));
    return p;
  }
  fail(path + ".type", "expected ellipse, rectangle, or polygon");
}

Particle parse_particle(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path, {"shape", "center", "shape_angle", "lattice_angle"});
  const json* shape = find(j, "shape");
  if (!shape) fail(path + ".shape", "missing");
  Particle p;
  p.shape = parse_shape(*shape, path + ".shape");
  validate_shape(p.shape);
  if (const json* c = find(j, "center")) {
    p.center = vec2(*c, path + ".center");
    p.center.x() = wrap_unit(p.center.x());
    p.center.y() = wrap_unit(p.center.y());
  }
  p.shape_angle = num_or(j, "shape_angle", path + ".shape_angle", 0.0);
  p.lattice_angle = num_or(j, "lattice_angle", path + ".lattice_angle", 0.0);
  return p;
}

GeneratorSpec parse_generator(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  check_keys(j, path, {"fraction", "aspect", "angle", "kind"});
  GeneratorSpec g;
  g.fraction = num_or(j, "fraction", path + ".fraction", g.fraction);
  g.aspect = num_or(j, "aspect", path + ".aspect", g.aspect);
  g.angle = num_or(j, "angle", path + ".angle", g.angle);
  if (const json* k = find(j, "kind")) g.kind = shape_kind(*k, path + ".kind");
  if (!(g.fraction > 0.0) || g.fraction > 0.5)
    fail(path + ".fraction", "must lie in (0, 0.5]");
  if (!(g.aspect > 0.0)) fail(path + ".aspect", "must be positive");
  return g;
}

int line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(),
                                         text.begin() + byte, '\n'));
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << origin << ": JSON parse error at line " << line_of_offset(text, e.byte)
       << ": " << e.what();
    throw ConfigError(os.str());
  }
  if (!root.is_object()) throw ConfigError(origin + ": top level must be an object");

  check_keys(root, "",
             {"geometry", "resolution", "materials", "field",
              "reference_phase", "eigenstrain_sign", "output", "sweep"});

  Config cfg;
  MaterialSet& mat = cfg.problem.materials;

  if (const json* geo = find(root, "geometry")) {
    if (!geo->is_object()) fail("geometry", "expected an object");
    check_keys(*geo, "geometry", {"particles", "generator"});
    const json* particles = find(*geo, "particles");
    const json* generator = find(*geo, "generator");
    if (particles && generator)
      fail("geometry", "give either particles or generator, not both");
    if (particles) {
      if (!particles->is_array() || particles->empty())
        fail("geometry.particles", "expected a non-empty array");
      for (std::size_t i = 0; i < particles->size(); ++i)
        cfg.problem.cell.particles.push_back(parse_particle(
            (*particles)[i], "geometry.particles[" + std::to_string(i) + "]"));
    } else if (generator) {
      cfg.generator = parse_generator(*generator, "geometry.generator");
    }
  }
  if (!cfg.generator && cfg.problem.cell.particles.empty())
    cfg.generator = GeneratorSpec{};  // centered disk, fraction 0.3

  if (const json* res = find(root, "resolution")) {
    const long n = integer(*res, "resolution");
    if (n < 16 || n > 4096 || !is_pow2(static_cast<int>(n)))
      fail("resolution", "must be a power of two in [16, 4096]");
    cfg.problem.resolution = static_cast<int>(n);
  }

  if (const json* m = find(root, "materials")) {
    if (!m->is_object()) fail("materials", "expected an object");
    check_keys(*m, "materials", {"msm", "polymer"});
    if (const json* msm = find(*m, "msm")) {
      if (!msm->is_object()) fail("materials.msm", "expected an object");
      check_keys(*msm, "materials.msm",
                 {"C11", "C12", "C44", "eps0", "Ku", "Ms_over_mu0",
                  "Ms2_over_mu0"});
      mat.c11 = num_or(*msm, "C11", "materials.msm.C11", mat.c11);
      mat.c12 = num_or(*msm, "C12", "materials.msm.C12", mat.c12);
      mat.c44 = num_or(*msm, "C44", "materials.msm.C44", mat.c44);
      mat.eps0 = num_or(*msm, "eps0", "materials.msm.eps0", mat.eps0);
      mat.ku = num_or(*msm, "Ku", "materials.msm.Ku", mat.ku);
      mat.ms_over_mu0 = num_or(*msm, "Ms_over_mu0",
                               "materials.msm.Ms_over_mu0", mat.ms_over_mu0);
      mat.ms2_over_mu0 =
          num_or(*msm, "Ms2_over_mu0", "materials.msm.Ms2_over_mu0",
                 mat.ms2_over_mu0);
      if (mat.ku < 0.0) fail("materials.msm.Ku", "must be nonnegative");
      if (mat.ms_over_mu0 < 0.0)
        fail("materials.msm.Ms_over_mu0", "must be nonnegative");
      if (mat.ms2_over_mu0 < 0.0)
        fail("materials.msm.Ms2_over_mu0", "must be nonnegative");
    }
    if (const json* poly = find(*m, "polymer")) {
      if (!poly->is_object()) fail("materials.polymer", "expected an object");
      check_keys(*poly, "materials.polymer", {"E", "E_sweep", "nu"});
      mat.polymer_e = num_or(*poly, "E", "materials.polymer.E", mat.polymer_e);
      mat.polymer_nu =
          num_or(*poly, "nu", "materials.polymer.nu", mat.polymer_nu);
      if (!(mat.polymer_e > 0.0))
        fail("materials.polymer.E", "must be positive");
      if (!(mat.polymer_nu > 0.0) || !(mat.polymer_nu < 0.5))
        fail("materials.polymer.nu", "must lie in (0, 0.5)");
      if (const json* es = find(*poly, "E_sweep")) {
        if (!es->is_object())
          fail("materials.polymer.E_sweep", "expected an object");
        check_keys(*es, "materials.polymer.E_sweep", {"lo", "hi", "points"});
        const double lo = num_or(*es, "lo", "materials.polymer.E_sweep.lo",
                                 0.03);
        const double hi = num_or(*es, "hi", "materials.polymer.E_sweep.hi",
                                 80.0);
        long points = 30;
        if (const json* p = find(*es, "points"))
          points = integer(*p, "materials.polymer.E_sweep.points");
        if (!(lo > 0.0) || !(hi > lo))
          fail("materials.polymer.E_sweep", "needs 0 < lo < hi");
        if (lo < 1e-3 || hi > 1e5)
          fail("materials.polymer.E_sweep", "range must lie in [1e-3, 1e5]");
        if (points < 2 || points > 100000)
          fail("materials.polymer.E_sweep.points", "must lie in [2, 100000]");
        cfg.sweep_param = SweepParam::polymer_modulus;
        cfg.sweep_values = log_spaced(lo, hi, static_cast<int>(points));
      }
    }
  }

  if (const json* f = find(root, "field")) {
    if (!f->is_object()) fail("field", "expected an object");
    check_keys(*f, "field", {"magnitude_T", "angle_rad"});
    mat.field_t = num_or(*f, "magnitude_T", "field.magnitude_T", mat.field_t);
    mat.field_angle =
        num_or(*f, "angle_rad", "field.angle_rad", mat.field_angle);
    if (mat.field_t < 0.0) fail("field.magnitude_T", "must be nonnegative");
  }

  if (const json* r = find(root, "reference_phase")) {
    const long p = integer(*r, "reference_phase");
    if (p != 1 && p != 2) fail("reference_phase", "must be 1 or 2");
    mat.reference_phase = static_cast<int>(p);
  }
  if (const json* s = find(root, "eigenstrain_sign")) {
    const long v = integer(*s, "eigenstrain_sign");
    if (v != 1 && v != -1) fail("eigenstrain_sign", "must be 1 or -1");
    mat.eigenstrain_sign = static_cast<int>(v);
  }

  if (const json* o = find(root, "output")) {
    if (!o->is_object()) fail("output", "expected an object");
    check_keys(*o, "output", {"csv_path", "svg_dir", "debug_dumps"});
    if (const json* c = find(*o, "csv_path"))
      cfg.output.csv_path = str(*c, "output.csv_path");
    if (const json* d = find(*o, "svg_dir"))
      cfg.output.svg_dir = str(*d, "output.svg_dir");
    if (const json* d = find(*o, "debug_dumps"))
      cfg.output.debug_dumps = boolean(*d, "output.debug_dumps");
  }

  if (const json* sw = find(root, "sweep")) {
    if (cfg.sweep_param)
      fail("sweep", "conflicts with materials.polymer.E_sweep");
    if (!sw->is_object()) fail("sweep", "expected an object");
    check_keys(*sw, "sweep", {"param", "values"});
    const json* param = find(*sw, "param");
    const json* values = find(*sw, "values");
    if (!param) fail("sweep.param", "missing");
    if (!values) fail("sweep.values", "missing");
    cfg.sweep_param = sweep_param_from_name(str(*param, "sweep.param"));
    if (!values->is_array() || values->empty())
      fail("sweep.values", "expected a non-empty array");
    for (std::size_t i = 0; i < values->size(); ++i)
      cfg.sweep_values.push_back(
          num((*values)[i], "sweep.values[" + std::to_string(i) + "]"));
    if ((cfg.sweep_param == SweepParam::aspect_ratio ||
         cfg.sweep_param == SweepParam::volume_fraction) &&
        !cfg.generator)
      fail("sweep.param", "shape sweeps need geometry.generator");
  }

  // resolve geometry and sanity-check the materials as a whole
  if (cfg.generator) cfg.problem.cell = cfg.generator->build();
  cubic_stiffness(mat.c11, mat.c12, mat.c44, 0.0);
  isotropic_stiffness(mat.polymer_e, mat.polymer_nu);
  if (cfg.problem.cell.particle_count() > 12)
    fail("geometry.particles", "at most 12 particles are supported");
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace msmcell
