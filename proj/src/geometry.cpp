#include "msmcell/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace msmcell {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double normalize_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a;
}

double polygon_signed_area(const std::vector<Eigen::Vector2d>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * s;
}

}  // namespace

void validate_shape(const ShapeSpec& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          if (!(s.semi_a > 0.0) || !(s.semi_b > 0.0))
            throw GeometryError("ellipse semi-axes must be positive");
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          if (!(s.half_w > 0.0) || !(s.half_h > 0.0))
            throw GeometryError("rectangle half-extents must be positive");
        } else {
          if (s.vertices.size() < 3)
            throw GeometryError("polygon needs at least 3 vertices");
          double a = polygon_signed_area(s.vertices);
          if (!(a > 0.0))
            throw GeometryError(
                "polygon must be counterclockwise with positive area");
        }
      },
      shape);
}

double shape_area(const ShapeSpec& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          return std::numbers::pi * s.semi_a * s.semi_b;
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          return 4.0 * s.half_w * s.half_h;
        } else {
          return polygon_signed_area(s.vertices);
        }
      },
      shape);
}

bool shape_contains(const ShapeSpec& shape, const Eigen::Vector2d& p) {
  return std::visit(
      [&p](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          double u = p.x() / s.semi_a;
          double v = p.y() / s.semi_b;
          return u * u + v * v <= 1.0;
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          return std::abs(p.x()) <= s.half_w && std::abs(p.y()) <= s.half_h;
        } else {
          // even-odd crossing test against a ray in +x
          bool inside = false;
          const auto& v = s.vertices;
          for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
            bool straddles = (v[i].y() > p.y()) != (v[j].y() > p.y());
            if (!straddles) continue;
            double t = (p.y() - v[i].y()) / (v[j].y() - v[i].y());
            double cross_x = v[i].x() + t * (v[j].x() - v[i].x());
            if (p.x() < cross_x) inside = !inside;
          }
          return inside;
        }
      },
      shape);
}

double shape_bounding_radius(const ShapeSpec& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ellipse>) {
          return std::max(s.semi_a, s.semi_b);
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          return std::hypot(s.half_w, s.half_h);
        } else {
          double r = 0.0;
          for (const auto& v : s.vertices) r = std::max(r, v.norm());
          return r;
        }
      },
      shape);
}

double RasterGrid::particle_area() const {
  double s = 0.0;
  for (double a : areas) s += a;
  return s;
}

std::uint64_t RasterGrid::content_hash() const {
  // FNV-1a over the owner labels; used as a sweep cache key
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(n));
  for (std::int32_t v : owner) mix(static_cast<std::uint64_t>(v));
  return h;
}

UnitCell make_particle_cell(double volume_fraction, double aspect_ratio,
                            double shape_angle, ShapeKind kind) {
  if (!(volume_fraction > 0.0) || volume_fraction > 0.5)
    throw GeometryError("volume fraction must be in (0, 0.5]");
  if (!(aspect_ratio > 0.0))
    throw GeometryError("aspect ratio must be positive");

  Particle p;
  if (kind == ShapeKind::ellipse) {
    // pi*a*b = f with a/b = aspect
    double a = std::sqrt(volume_fraction * aspect_ratio / std::numbers::pi);
    double b = a / aspect_ratio;
    if (std::max(a, b) > 0.5) {
      std::ostringstream os;
      os << "ellipse semi-axis " << std::max(a, b) << " exceeds 0.5";
      throw GeometryError(os.str());
    }
    p.shape = Ellipse{a, b};
  } else {
    // 4*w*h = f with w/h = aspect
    double w = 0.5 * std::sqrt(volume_fraction * aspect_ratio);
    double h = w / aspect_ratio;
    if (std::max(w, h) > 0.5) {
      std::ostringstream os;
      os << "rectangle half-extent " << std::max(w, h) << " exceeds 0.5";
      throw GeometryError(os.str());
    }
    p.shape = Rectangle{w, h};
  }
  p.center = Eigen::Vector2d(0.5, 0.5);
  p.shape_angle = normalize_angle(shape_angle);
  p.lattice_angle = 0.0;

  UnitCell cell;
  cell.particles.push_back(std::move(p));
  return cell;
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

double wrap_half(double d) {
  d -= std::floor(d + 0.5);
  return d;
}

Eigen::Vector2d wrap_half(const Eigen::Vector2d& d) {
  return {wrap_half(d.x()), wrap_half(d.y())};
}

double wrap_unit(double x) {
  x -= std::floor(x);
  return x;
}

Eigen::Matrix2d rotation(double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

RasterGrid rasterize(const UnitCell& cell, int n) {
  if (n < 16 || !is_pow2(n))
    throw ResolutionError("resolution must be a power of two and at least 16");

  const int n_p = cell.particle_count();
  for (const auto& p : cell.particles) validate_shape(p.shape);

  RasterGrid g;
  g.n = n;
  g.owner.assign(static_cast<std::size_t>(n) * n, 0);
  g.areas.assign(n_p, 0.0);

  std::vector<Eigen::Matrix2d> inv_rot(n_p);
  for (int i = 0; i < n_p; ++i)
    inv_rot[i] = rotation(-cell.particles[i].shape_angle);

  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      Eigen::Vector2d x((ix + 0.5) / n, (iy + 0.5) / n);
      for (int i = 0; i < n_p; ++i) {
        const Particle& p = cell.particles[i];
        Eigen::Vector2d local = inv_rot[i] * wrap_half(x - p.center);
        if (!shape_contains(p.shape, local)) continue;
        std::size_t idx = static_cast<std::size_t>(ix) * n + iy;
        if (g.owner[idx] != 0) {
          std::ostringstream os;
          os << "particles " << g.owner[idx] << " and " << i + 1
             << " overlap at pixel (" << ix << "," << iy << ")";
          throw OverlapError(os.str());
        }
        g.owner[idx] = i + 1;
        g.areas[i] += 1.0;
      }
    }
  }

  for (int i = 0; i < n_p; ++i) {
    if (g.areas[i] == 0.0) {
      std::ostringstream os;
      os << "particle " << i + 1 << " covers no pixel at resolution " << n;
      throw ResolutionError(os.str());
    }
    g.areas[i] /= static_cast<double>(n) * n;
  }

  // Separation rule: distinct particles may not own pixels closer than
  // 2 apart (no foreign particle pixel among the 8 periodic neighbors).
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      std::int32_t a = g.owner[static_cast<std::size_t>(ix) * n + iy];
      if (a == 0) continue;
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          std::int32_t b = g.label(ix + dx, iy + dy);
          if (b != 0 && b != a) {
            std::ostringstream os;
            os << "particles " << a << " and " << b
               << " closer than 2 pixels near (" << ix << "," << iy << ")";
            throw OverlapError(os.str());
          }
        }
      }
    }
  }

  return g;
}

}  // namespace msmcell
