#pragma once

#include <string>
#include <variant>
#include <vector>

namespace actkit {

struct Point {
  double x = 0;
  double y = 0;

  bool operator==(const Point&) const = default;
};

struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  bool operator==(const BBox&) const = default;

  Point center() const { return {(x1 + x2) / 2.0, (y1 + y2) / 2.0}; }
  bool contains(const Point& p) const {
    return p.x >= x1 && p.x <= x2 && p.y >= y1 && p.y <= y2;
  }
};

using Geometry = std::variant<std::vector<Point>, BBox>;

struct PixelSpace {
  double width = 0;
  double height = 0;

  bool operator==(const PixelSpace&) const = default;
};
struct NormalizedSpace {
  bool operator==(const NormalizedSpace&) const = default;
};
using CoordSpace = std::variant<PixelSpace, NormalizedSpace>;

inline constexpr int kNormalizedRange = 1000;

struct Annotation {
  std::string name;
  Geometry geometry;
  CoordSpace space = NormalizedSpace{};

  bool operator==(const Annotation&) const = default;
};

/// Pixel coords must lie in [0, dim); normalized coords must be integers in
/// [0, 1000); a bbox needs x1 <= x2 and y1 <= y2; point lists are non-empty.
void validate_annotation(const Annotation& ann);

/// n = min(999, floor(x / dim * 1000)). Throws InputError unless 0 <= x < dim.
int normalize_coord(double x, double dim);

/// Cell-center pixel (n + 0.5) / 1000 * dim. Throws InputError unless
/// 0 <= n < 1000.
double denormalize_coord(int n, double dim);

/// Maps a pixel-space annotation into the normalized integer grid.
Annotation normalize_annotation(const Annotation& ann);

}  // namespace actkit
