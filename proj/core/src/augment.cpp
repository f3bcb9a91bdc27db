#include "actkit/augment.hpp"

#include <algorithm>
#include <cmath>

#include "actkit/errors.hpp"

namespace actkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool all_finite(std::initializer_list<double> vs) {
  for (double v : vs)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Largest representable value strictly below dim; keeps clamped coords
/// inside the half-open pixel range.
double below(double dim) { return std::nextafter(dim, 0.0); }

double clamp_coord(double v, double dim) {
  return std::clamp(v, 0.0, below(dim));
}

}  // namespace

void AffineAugmentSpec::validate() const {
  if (!all_finite({translate_x, translate_y, rotate_deg, scale, shear_deg}))
    throw InputError("affine spec has a non-finite parameter");
  if (!(scale > 0)) throw InputError("affine scale must be > 0");
}

bool AffineAugmentSpec::is_identity() const {
  return translate_x == 0 && translate_y == 0 && rotate_deg == 0 &&
         scale == 1 && shear_deg == 0 && !hflip;
}

void PhotometricAugmentSpec::validate() const {
  if (!all_finite({hue, saturation, brightness, contrast}))
    throw InputError("photometric spec has a non-finite delta");
}

Affine2 compose(const Affine2& s, const Affine2& f) {
  Affine2 out;
  out.a = s.a * f.a + s.b * f.c;
  out.b = s.a * f.b + s.b * f.d;
  out.tx = s.a * f.tx + s.b * f.ty + s.tx;
  out.c = s.c * f.a + s.d * f.c;
  out.d = s.c * f.b + s.d * f.d;
  out.ty = s.c * f.tx + s.d * f.ty + s.ty;
  return out;
}

Affine2 affine_matrix(const AffineAugmentSpec& spec, double width,
                      double height) {
  spec.validate();
  if (!(width > 0) || !(height > 0))
    throw InputError("image dimensions must be positive");

  Affine2 flip;
  if (spec.hflip) {
    flip.a = -1;
    flip.tx = width;
  }

  double cx = width / 2.0, cy = height / 2.0;
  Affine2 to_origin{1, 0, -cx, 0, 1, -cy};
  Affine2 from_origin{1, 0, cx, 0, 1, cy};

  double sh = std::tan(spec.shear_deg * kPi / 180.0);
  Affine2 shear{1, sh, 0, 0, 1, 0};

  double th = spec.rotate_deg * kPi / 180.0;
  Affine2 rot{std::cos(th), -std::sin(th), 0, std::sin(th), std::cos(th), 0};

  Affine2 scl{spec.scale, 0, 0, 0, spec.scale, 0};

  Affine2 centered = compose(from_origin,
                             compose(scl, compose(rot, compose(shear, to_origin))));

  Affine2 translate{1, 0, spec.translate_x, 0, 1, spec.translate_y};
  return compose(translate, compose(centered, flip));
}

std::optional<Annotation> transform_annotation(const Annotation& ann,
                                               const AffineAugmentSpec& spec,
                                               const PixelSpace& out_size) {
  validate_annotation(ann);
  const auto* pixel = std::get_if<PixelSpace>(&ann.space);
  if (!pixel) throw InputError("transform_annotation requires pixel space");
  if (!(out_size.width > 0) || !(out_size.height > 0))
    throw InputError("output dimensions must be positive");

  // Exact no-op for the identity spec, clamping included.
  if (spec.is_identity() && pixel->width <= out_size.width &&
      pixel->height <= out_size.height) {
    Annotation out = ann;
    out.space = out_size;
    return out;
  }

  Affine2 m = affine_matrix(spec, pixel->width, pixel->height);
  double w = out_size.width, h = out_size.height;
  auto inside = [&](const Point& p) {
    return p.x >= 0 && p.x < w && p.y >= 0 && p.y < h;
  };

  Annotation out;
  out.name = ann.name;
  out.space = out_size;

  if (const auto* points = std::get_if<std::vector<Point>>(&ann.geometry)) {
    std::vector<Point> mapped;
    mapped.reserve(points->size());
    bool any_inside = false;
    for (const Point& p : *points) {
      Point q = m.apply(p);
      any_inside = any_inside || inside(q);
      mapped.push_back({clamp_coord(q.x, w), clamp_coord(q.y, h)});
    }
    if (!any_inside) return std::nullopt;
    out.geometry = std::move(mapped);
  } else {
    const BBox& box = std::get<BBox>(ann.geometry);
    Point corners[4] = {m.apply({box.x1, box.y1}), m.apply({box.x2, box.y1}),
                        m.apply({box.x1, box.y2}), m.apply({box.x2, box.y2})};
    double min_x = corners[0].x, max_x = corners[0].x;
    double min_y = corners[0].y, max_y = corners[0].y;
    for (const Point& q : corners) {
      min_x = std::min(min_x, q.x);
      max_x = std::max(max_x, q.x);
      min_y = std::min(min_y, q.y);
      max_y = std::max(max_y, q.y);
    }
    if (max_x < 0 || min_x >= w || max_y < 0 || min_y >= h) return std::nullopt;
    out.geometry = BBox{clamp_coord(min_x, w), clamp_coord(min_y, h),
                        clamp_coord(max_x, w), clamp_coord(max_y, h)};
  }
  validate_annotation(out);
  return out;
}

}  // namespace actkit
