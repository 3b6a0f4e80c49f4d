#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "csi2dig/errors.hpp"

namespace csi2dig {

enum class WaveletFamily { Daubechies4 };
enum class ThresholdRule { SoftUniversal };

struct WaveletConfig {
  WaveletFamily family = WaveletFamily::Daubechies4;
  int levels = 3;
  ThresholdRule threshold_rule = ThresholdRule::SoftUniversal;
  bool enabled = false;

  void validate(size_t series_length) const {
    if (levels < 1) fail(Errc::bad_config, "wavelet levels must be >= 1");
    if (series_length < (size_t{1} << levels))
      fail(Errc::series_too_short, "series length " + std::to_string(series_length) +
                                       " < 2^" + std::to_string(levels));
  }
};

namespace wavelet_detail {

// Daubechies 4-tap orthonormal filter pair.
inline const double* lowpass() {
  static const double s3 = std::sqrt(3.0);
  static const double h[4] = {(1.0 + s3) / (4.0 * std::numbers::sqrt2),
                              (3.0 + s3) / (4.0 * std::numbers::sqrt2),
                              (3.0 - s3) / (4.0 * std::numbers::sqrt2),
                              (1.0 - s3) / (4.0 * std::numbers::sqrt2)};
  return h;
}

// g[k] = (-1)^k h[3-k]
inline const double* highpass() {
  static const double* h = lowpass();
  static const double g[4] = {h[3], -h[2], h[1], -h[0]};
  return g;
}

// One periodized analysis step: x (even length) -> approx + detail halves.
inline void dwt_step(const std::vector<double>& x, std::vector<double>& approx,
                     std::vector<double>& detail) {
  const double* h = lowpass();
  const double* g = highpass();
  size_t n = x.size();
  size_t half = n / 2;
  approx.resize(half);
  detail.resize(half);
  for (size_t i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (size_t k = 0; k < 4; ++k) {
      double v = x[(2 * i + k) % n];
      a += h[k] * v;
      d += g[k] * v;
    }
    approx[i] = a;
    detail[i] = d;
  }
}

inline void idwt_step(const std::vector<double>& approx, const std::vector<double>& detail,
                      std::vector<double>& x) {
  const double* h = lowpass();
  const double* g = highpass();
  size_t half = approx.size();
  size_t n = 2 * half;
  x.assign(n, 0.0);
  for (size_t i = 0; i < half; ++i) {
    for (size_t k = 0; k < 4; ++k) {
      size_t m = (2 * i + k) % n;
      x[m] += approx[i] * h[k] + detail[i] * g[k];
    }
  }
}

// Reflected (mirror) index for symmetric extension beyond the series end.
inline size_t reflect_index(size_t i, size_t n) {
  if (n == 1) return 0;
  size_t period = 2 * (n - 1);
  size_t j = i % period;
  return j < n ? j : period - j;
}

}  // namespace wavelet_detail

// Multi-level DWT, soft-thresholding of all detail coefficients with the
// universal threshold sigma_hat * sqrt(2 ln n), sigma_hat from the finest
// detail level's median absolute value, then reconstruction. Arbitrary
// lengths are handled by symmetric padding to a multiple of 2^levels;
// the padded round trip is exact, so length is preserved.
// `threshold` overrides the universal rule when given (0 disables shrinkage).
inline std::vector<double> wavelet_denoise(const std::vector<double>& series,
                                           const WaveletConfig& cfg,
                                           std::optional<double> threshold = std::nullopt) {
  cfg.validate(series.size());
  size_t n = series.size();
  size_t block = size_t{1} << cfg.levels;
  size_t n_pad = ((n + block - 1) / block) * block;

  std::vector<double> x(n_pad);
  for (size_t i = 0; i < n_pad; ++i) x[i] = series[wavelet_detail::reflect_index(i, n)];

  std::vector<std::vector<double>> details(cfg.levels);
  std::vector<double> approx;
  for (int lvl = 0; lvl < cfg.levels; ++lvl) {
    wavelet_detail::dwt_step(x, approx, details[lvl]);
    x = approx;
  }

  double thr;
  if (threshold) {
    thr = *threshold;
  } else {
    std::vector<double> abs_d1(details[0].size());
    for (size_t i = 0; i < abs_d1.size(); ++i) abs_d1[i] = std::abs(details[0][i]);
    std::nth_element(abs_d1.begin(), abs_d1.begin() + abs_d1.size() / 2, abs_d1.end());
    double median = abs_d1[abs_d1.size() / 2];
    double sigma_hat = median / 0.6745;
    thr = sigma_hat * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  }

  if (thr > 0.0) {
    for (auto& lvl : details)
      for (double& d : lvl) d = (std::abs(d) <= thr) ? 0.0 : (d > 0.0 ? d - thr : d + thr);
  }

  std::vector<double> rec;
  for (int lvl = cfg.levels - 1; lvl >= 0; --lvl) {
    wavelet_detail::idwt_step(x, details[lvl], rec);
    x = rec;
  }
  x.resize(n);
  return x;
}

}  // namespace csi2dig
