#include "actkit/mu_law.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "actkit/errors.hpp"

namespace actkit {

namespace {

// Deterministic ties-to-even rounding, independent of the fenv rounding mode.
double round_half_even(double y) {
  const double f = std::floor(y);
  const double frac = y - f;
  if (frac > 0.5) return f + 1.0;
  if (frac < 0.5) return f;
  return std::fmod(f, 2.0) == 0.0 ? f : f + 1.0;
}

}  // namespace

void validate(const CameraQuantizerConfig& cfg) {
  if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu)) {
    throw InputError("quantizer mu must be positive and finite");
  }
  if (!(cfg.max_abs_delta > 0.0) || !std::isfinite(cfg.max_abs_delta)) {
    throw InputError("quantizer max_abs_delta must be positive and finite");
  }
  if (cfg.bins_per_axis < 3 || cfg.bins_per_axis % 2 == 0) {
    throw InputError("bins_per_axis must be odd and >= 3, got " +
                     std::to_string(cfg.bins_per_axis));
  }
}

double compand(double delta, const CameraQuantizerConfig& cfg) {
  validate(cfg);
  if (!std::isfinite(delta)) throw InputError("camera delta must be finite");
  const double v = std::clamp(delta / cfg.max_abs_delta, -1.0, 1.0);
  if (v == 0.0) return 0.0;
  const double sign = v < 0.0 ? -1.0 : 1.0;
  return sign * std::log1p(cfg.mu * std::abs(v)) / std::log1p(cfg.mu);
}

int mu_law_encode(double delta, const CameraQuantizerConfig& cfg) {
  const double c = compand(delta, cfg);
  const double y = (c + 1.0) / 2.0 * static_cast<double>(cfg.bins_per_axis - 1);
  const int bin = static_cast<int>(round_half_even(y));
  return std::clamp(bin, 0, cfg.bins_per_axis - 1);
}

double mu_law_decode(int bin, const CameraQuantizerConfig& cfg) {
  validate(cfg);
  if (bin < 0 || bin >= cfg.bins_per_axis) {
    throw InputError("camera bin out of range: " + std::to_string(bin));
  }
  const double c =
      2.0 * static_cast<double>(bin) / static_cast<double>(cfg.bins_per_axis - 1) -
      1.0;
  if (c == 0.0) return 0.0;
  const double sign = c < 0.0 ? -1.0 : 1.0;
  const double mag = std::abs(c);
  if (mag == 1.0) return sign * cfg.max_abs_delta;
  return sign * cfg.max_abs_delta * std::expm1(mag * std::log1p(cfg.mu)) / cfg.mu;
}

}  // namespace actkit
