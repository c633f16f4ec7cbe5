#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

#include "msmcell/errors.hpp"

namespace msmcell {

// All lengths are in units of the cell edge; the cell is [0,1)^2 with
// periodic identification.

struct Ellipse {
  double semi_a = 0.0;  // along the shape x axis before rotation
  double semi_b = 0.0;
};

struct Rectangle {
  double half_w = 0.0;
  double half_h = 0.0;
};

struct Polygon {
  std::vector<Eigen::Vector2d> vertices;  // CCW, centroid near origin
};

using ShapeSpec = std::variant<Ellipse, Rectangle, Polygon>;

enum class ShapeKind { ellipse, rectangle };

void validate_shape(const ShapeSpec& shape);
double shape_area(const ShapeSpec& shape);

// Point-in-shape test in the shape's local (unrotated) frame.
bool shape_contains(const ShapeSpec& shape, const Eigen::Vector2d& local);

// Radius of the smallest origin-centered circle containing the shape.
double shape_bounding_radius(const ShapeSpec& shape);

struct Particle {
  ShapeSpec shape;
  Eigen::Vector2d center{0.5, 0.5};
  double shape_angle = 0.0;    // rotation of the outline, radians
  double lattice_angle = 0.0;  // rotation of the crystal axes, radians
};

struct UnitCell {
  std::vector<Particle> particles;
  int particle_count() const { return static_cast<int>(particles.size()); }
};

// Single centered particle whose continuous area is exactly the requested
// volume fraction and whose x/y extent ratio is the aspect ratio.
// Throws GeometryError if the extents do not fit in the cell.
UnitCell make_particle_cell(double volume_fraction, double aspect_ratio,
                            double shape_angle, ShapeKind kind);

// Pixel ownership map. owner[ix*n + iy] is 0 for polymer, or the 1-based
// particle index. Pixel (ix,iy) covers [ix/n,(ix+1)/n) x [iy/n,(iy+1)/n)
// and is sampled at its center.
struct RasterGrid {
  int n = 0;
  std::vector<std::int32_t> owner;
  std::vector<double> areas;  // pixel count / n^2 per particle

  std::int32_t label(int ix, int iy) const {
    ix %= n; if (ix < 0) ix += n;
    iy %= n; if (iy < 0) iy += n;
    return owner[static_cast<std::size_t>(ix) * n + iy];
  }
  double particle_area() const;
  int particle_count() const { return static_cast<int>(areas.size()); }
  std::uint64_t content_hash() const;
};

// Throws ResolutionError unless n is a power of two and n >= 16, or if a
// particle covers no pixel center. Throws OverlapError if two particles
// claim the same pixel or come within one pixel of touching.
RasterGrid rasterize(const UnitCell& cell, int n);

bool is_pow2(int n);

// Shortest periodic displacement, componentwise in [-0.5, 0.5).
double wrap_half(double d);
Eigen::Vector2d wrap_half(const Eigen::Vector2d& d);

// Wrap a coordinate into [0, 1).
double wrap_unit(double x);

Eigen::Matrix2d rotation(double angle);

}  // namespace msmcell
