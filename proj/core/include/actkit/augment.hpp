#pragma once

#include <optional>

#include "actkit/annotation.hpp"

namespace actkit {

struct AffineAugmentSpec {
  double translate_x = 0;
  double translate_y = 0;
  double rotate_deg = 0;
  double scale = 1;
  double shear_deg = 0;
  bool hflip = false;

  void validate() const;  // scale > 0, all parameters finite
  bool is_identity() const;
};

struct PhotometricAugmentSpec {
  double hue = 0;
  double saturation = 0;
  double brightness = 0;
  double contrast = 0;

  void validate() const;  // deltas finite
};

/// Row-major 2x3 affine map: p' = (a*x + b*y + tx, c*x + d*y + ty).
struct Affine2 {
  double a = 1, b = 0, tx = 0;
  double c = 0, d = 1, ty = 0;

  Point apply(const Point& p) const {
    return {a * p.x + b * p.y + tx, c * p.x + d * p.y + ty};
  }
};

/// compose(second, first) applies `first` then `second`.
Affine2 compose(const Affine2& second, const Affine2& first);

/// Full map for one spec on a width x height image: horizontal flip first,
/// then shear, rotation, and scale about the image center, then translation.
Affine2 affine_matrix(const AffineAugmentSpec& spec, double width, double height);

/// Maps a pixel-space annotation. Points map directly; a bbox maps to the
/// axis-aligned hull of its four transformed corners. Results are clamped
/// into [0, dim) of out_size; an annotation that lands fully outside the
/// output frame yields nullopt.
std::optional<Annotation> transform_annotation(const Annotation& ann,
                                               const AffineAugmentSpec& spec,
                                               const PixelSpace& out_size);

}  // namespace actkit
