#include "actkit/annotation.hpp"

#include <algorithm>
#include <cmath>

#include "actkit/errors.hpp"

namespace actkit {

namespace {

void check_coord(double v, double dim, const char* axis) {
  if (!std::isfinite(v) || v < 0 || v >= dim)
    throw InputError(std::string("pixel ") + axis + " coordinate " +
                     std::to_string(v) + " outside [0, " + std::to_string(dim) +
                     ")");
}

void check_normalized(double v, const char* axis) {
  if (!std::isfinite(v) || v != std::floor(v) || v < 0 || v >= kNormalizedRange)
    throw InputError(std::string("normalized ") + axis + " coordinate " +
                     std::to_string(v) + " is not an integer in [0, 1000)");
}

}  // namespace

void validate_annotation(const Annotation& ann) {
  const auto* pixel = std::get_if<PixelSpace>(&ann.space);
  if (pixel && (pixel->width <= 0 || pixel->height <= 0))
    throw InputError("pixel space dimensions must be positive");

  auto check_point = [&](const Point& p) {
    if (pixel) {
      check_coord(p.x, pixel->width, "x");
      check_coord(p.y, pixel->height, "y");
    } else {
      check_normalized(p.x, "x");
      check_normalized(p.y, "y");
    }
  };

  if (const auto* points = std::get_if<std::vector<Point>>(&ann.geometry)) {
    if (points->empty()) throw InputError("point annotation needs >= 1 point");
    for (const Point& p : *points) check_point(p);
  } else {
    const BBox& box = std::get<BBox>(ann.geometry);
    if (box.x1 > box.x2 || box.y1 > box.y2)
      throw InputError("bbox corners out of order");
    check_point({box.x1, box.y1});
    check_point({box.x2, box.y2});
  }
}

int normalize_coord(double x, double dim) {
  if (!(dim > 0) || !std::isfinite(dim))
    throw InputError("dimension must be positive");
  if (!std::isfinite(x) || x < 0 || x >= dim)
    throw InputError("pixel coordinate " + std::to_string(x) + " outside [0, " +
                     std::to_string(dim) + ")");
  int n = static_cast<int>(std::floor(x / dim * kNormalizedRange));
  return std::min(n, kNormalizedRange - 1);
}

double denormalize_coord(int n, double dim) {
  if (!(dim > 0) || !std::isfinite(dim))
    throw InputError("dimension must be positive");
  if (n < 0 || n >= kNormalizedRange)
    throw InputError("normalized coordinate " + std::to_string(n) +
                     " outside [0, 1000)");
  return (n + 0.5) / kNormalizedRange * dim;
}

Annotation normalize_annotation(const Annotation& ann) {
  validate_annotation(ann);
  const auto* pixel = std::get_if<PixelSpace>(&ann.space);
  if (!pixel) return ann;

  Annotation out;
  out.name = ann.name;
  out.space = NormalizedSpace{};
  if (const auto* points = std::get_if<std::vector<Point>>(&ann.geometry)) {
    std::vector<Point> mapped;
    mapped.reserve(points->size());
    for (const Point& p : *points)
      mapped.push_back({static_cast<double>(normalize_coord(p.x, pixel->width)),
                        static_cast<double>(normalize_coord(p.y, pixel->height))});
    out.geometry = std::move(mapped);
  } else {
    const BBox& box = std::get<BBox>(ann.geometry);
    out.geometry = BBox{
        static_cast<double>(normalize_coord(box.x1, pixel->width)),
        static_cast<double>(normalize_coord(box.y1, pixel->height)),
        static_cast<double>(normalize_coord(box.x2, pixel->width)),
        static_cast<double>(normalize_coord(box.y2, pixel->height))};
  }
  validate_annotation(out);
  return out;
}

}  // namespace actkit
