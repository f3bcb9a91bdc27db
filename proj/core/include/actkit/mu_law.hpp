#pragma once

namespace actkit {

/// Camera-axis companding quantizer. Each axis is clamped to
/// [-max_abs_delta, +max_abs_delta], companded logarithmically, then uniformly
/// binned. An odd bin count keeps a center bin that encodes zero motion.
struct CameraQuantizerConfig {
  double mu = 10.0;
  double max_abs_delta = 10.0;  // degrees
  int bins_per_axis = 21;

  bool operator==(const CameraQuantizerConfig&) const = default;
};

/// Throws InputError unless mu > 0, max_abs_delta > 0, and bins_per_axis is
/// odd and >= 3.
void validate(const CameraQuantizerConfig& cfg);

/// Companded value in [-1, 1] for a (clamped) delta in degrees.
double compand(double delta, const CameraQuantizerConfig& cfg);

/// Nearest-bin encode with ties rounded half to even. Monotone in delta and
/// symmetric: encode(-x) == bins - 1 - encode(x).
int mu_law_encode(double delta, const CameraQuantizerConfig& cfg = {});

/// Bin-center delta in degrees. The center bin decodes to exactly 0; the
/// extreme bins decode to exactly +/-max_abs_delta.
double mu_law_decode(int bin, const CameraQuantizerConfig& cfg = {});

inline int center_bin(const CameraQuantizerConfig& cfg) {
  return (cfg.bins_per_axis - 1) / 2;
}

}  // namespace actkit
