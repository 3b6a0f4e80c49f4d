#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "csi2dig/csi.hpp"
#include "csi2dig/errors.hpp"
#include "csi2dig/wavelet.hpp"

namespace csi2dig {

struct SegmentationConfig {
  double window_seconds = 2.0;
  int n_norm = 200;
  double discard_threshold_fraction = 0.5;

  void validate() const {
    if (n_norm < 2) fail(Errc::bad_config, "n_norm must be >= 2");
    if (!(discard_threshold_fraction > 0.0 && discard_threshold_fraction < 1.0))
      fail(Errc::bad_config, "discard_threshold_fraction must be in (0, 1)");
    if (!(window_seconds > 0.0)) fail(Errc::bad_config, "window_seconds must be positive");
  }
};

// Keep only non-excluded subcarriers, order preserved. Frames must carry the
// full pre-selection width.
inline CsiSequence select_subcarriers(const CsiSequence& seq, const SubcarrierLayout& layout) {
  if (!seq.frames.empty() &&
      seq.frames.front().amplitudes.size() != static_cast<size_t>(layout.total_subcarriers))
    fail(Errc::layout_mismatch, "frame width " + std::to_string(seq.frames.front().amplitudes.size()) +
                                    " != total_subcarriers " +
                                    std::to_string(layout.total_subcarriers));
  int half = layout.total_subcarriers / 2;
  std::vector<size_t> keep;
  for (int i = 0; i < layout.total_subcarriers; ++i)
    if (!layout.is_excluded(i - half)) keep.push_back(static_cast<size_t>(i));

  std::vector<CsiFrame> frames;
  frames.reserve(seq.frames.size());
  for (const CsiFrame& f : seq.frames) {
    CsiFrame g;
    g.timestamp_us = f.timestamp_us;
    g.source_id = f.source_id;
    g.amplitudes.reserve(keep.size());
    for (size_t i : keep) g.amplitudes.push_back(f.amplitudes[i]);
    frames.push_back(std::move(g));
  }
  CsiSequence out;
  out.layout = layout;
  out.frames = std::move(frames);
  return out;
}

// Each column independently interpolated onto a uniform grid over [0, N-1];
// first and last rows preserved exactly.
inline std::vector<double> interpolate_rows(const std::vector<double>& values, size_t n_rows,
                                            size_t n_cols, size_t target) {
  if (n_rows < 2) fail(Errc::too_few_rows, "need at least 2 rows to interpolate");
  if (target == n_rows) return values;
  std::vector<double> out(target * n_cols);
  for (size_t i = 0; i < target; ++i) {
    double pos = static_cast<double>(i) * static_cast<double>(n_rows - 1) /
                 static_cast<double>(target - 1);
    size_t lo = std::min(static_cast<size_t>(pos), n_rows - 2);
    double frac = pos - static_cast<double>(lo);
    for (size_t c = 0; c < n_cols; ++c) {
      double a = values[lo * n_cols + c];
      double b = values[(lo + 1) * n_cols + c];
      out[i * n_cols + c] = a + frac * (b - a);
    }
  }
  return out;
}

// Piecewise-linear evaluation at `target` uniformly spaced timestamps
// spanning [t_first, t_last].
inline std::vector<double> resample_rows(const std::vector<double>& values, size_t n_rows,
                                         size_t n_cols, const std::vector<int64_t>& timestamps,
                                         size_t target) {
  if (timestamps.size() != n_rows) fail(Errc::shape_mismatch, "timestamp count != row count");
  for (size_t i = 1; i < n_rows; ++i)
    if (timestamps[i] <= timestamps[i - 1])
      fail(Errc::non_increasing_timestamps, "timestamps must be strictly increasing");
  if (target < 2) fail(Errc::bad_config, "resample target must be >= 2");

  std::vector<double> out(target * n_cols);
  double t0 = static_cast<double>(timestamps.front());
  double t1 = static_cast<double>(timestamps.back());
  size_t seg = 0;
  for (size_t i = 0; i < target; ++i) {
    double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(target - 1);
    while (seg + 2 < n_rows && static_cast<double>(timestamps[seg + 1]) < t) ++seg;
    double ta = static_cast<double>(timestamps[seg]);
    double tb = static_cast<double>(timestamps[seg + 1]);
    double frac = (t - ta) / (tb - ta);
    frac = std::clamp(frac, 0.0, 1.0);
    for (size_t c = 0; c < n_cols; ++c) {
      double a = values[seg * n_cols + c];
      double b = values[(seg + 1) * n_cols + c];
      out[i * n_cols + c] = a + frac * (b - a);
    }
  }
  return out;
}

// Equal-time-interval segmentation: cut into window_seconds windows anchored
// at the first timestamp, then per window with N frames
//   N < n_norm*fraction            -> drop
//   n_norm*fraction <= N < n_norm  -> linear interpolation up to n_norm
//   N > n_norm                     -> resample down to n_norm
//   N = n_norm                     -> pass through
// Every emitted Sample has exactly n_norm rows; window index and start
// timestamp are recorded in the sample meta.
inline std::vector<Sample> segment(const CsiSequence& seq, const SegmentationConfig& cfg) {
  cfg.validate();
  if (seq.frames.empty()) fail(Errc::empty_sequence, "no frames to segment");

  size_t n_cols = seq.width();
  int64_t window_us = static_cast<int64_t>(std::llround(cfg.window_seconds * 1e6));
  int64_t anchor = seq.frames.front().timestamp_us;
  size_t min_keep = static_cast<size_t>(
      std::ceil(static_cast<double>(cfg.n_norm) * cfg.discard_threshold_fraction));

  std::vector<Sample> out;
  size_t i = 0;
  while (i < seq.frames.size()) {
    int64_t w = (seq.frames[i].timestamp_us - anchor) / window_us;
    int64_t w_end = anchor + (w + 1) * window_us;
    size_t j = i;
    while (j < seq.frames.size() && seq.frames[j].timestamp_us < w_end) ++j;
    size_t n = j - i;

    // Below-threshold (or degenerate single-frame) windows are discarded.
    if (n >= min_keep && n >= 2) {
      std::vector<double> mat(n * n_cols);
      std::vector<int64_t> ts(n);
      for (size_t r = 0; r < n; ++r) {
        const CsiFrame& f = seq.frames[i + r];
        ts[r] = f.timestamp_us;
        std::copy(f.amplitudes.begin(), f.amplitudes.end(), mat.begin() + r * n_cols);
      }
      size_t n_norm = static_cast<size_t>(cfg.n_norm);
      Sample s(n_norm, n_cols);
      if (n < n_norm)
        s.values = interpolate_rows(mat, n, n_cols, n_norm);
      else if (n > n_norm)
        s.values = resample_rows(mat, n, n_cols, ts, n_norm);
      else
        s.values = std::move(mat);
      s.meta["window_index"] = std::to_string(w);
      s.meta["window_start_us"] = std::to_string(anchor + w * window_us);
      s.meta["source_id"] = seq.frames[i].source_id;
      out.push_back(std::move(s));
    }
    i = j;
  }
  return out;
}

// Per-subcarrier z-score (population sigma). Constant columns map to zeros.
inline Sample normalize_sample(const Sample& s) {
  Sample out = s;
  for (size_t c = 0; c < s.n_cols; ++c) {
    double mean = 0.0;
    for (size_t r = 0; r < s.n_rows; ++r) mean += s.at(r, c);
    mean /= static_cast<double>(s.n_rows);
    double var = 0.0;
    for (size_t r = 0; r < s.n_rows; ++r) {
      double d = s.at(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(s.n_rows);
    if (var == 0.0) {
      for (size_t r = 0; r < s.n_rows; ++r) out.at(r, c) = 0.0;
    } else {
      double inv = 1.0 / std::sqrt(var);
      for (size_t r = 0; r < s.n_rows; ++r) out.at(r, c) = (s.at(r, c) - mean) * inv;
    }
  }
  return out;
}

// Burr-noise rule: flag subcarriers whose high-frequency energy fraction
// (sum of squared first differences over total variance) exceeds the given
// percentile across subcarriers of a silence calibration sequence.
// Returns centered subcarrier indices to exclude.
inline std::vector<int> detect_burr_subcarriers(const CsiSequence& calibration,
                                                double percentile = 99.0) {
  if (calibration.frames.size() < 3) fail(Errc::empty_sequence, "calibration too short");
  size_t n_cols = calibration.width();
  size_t n = calibration.frames.size();
  std::vector<double> frac(n_cols, 0.0);
  for (size_t c = 0; c < n_cols; ++c) {
    double mean = 0.0;
    for (size_t r = 0; r < n; ++r) mean += calibration.frames[r].amplitudes[c];
    mean /= static_cast<double>(n);
    double var = 0.0, hf = 0.0;
    for (size_t r = 0; r < n; ++r) {
      double d = calibration.frames[r].amplitudes[c] - mean;
      var += d * d;
      if (r + 1 < n) {
        double diff = calibration.frames[r + 1].amplitudes[c] - calibration.frames[r].amplitudes[c];
        hf += diff * diff;
      }
    }
    frac[c] = var > 0.0 ? hf / var : 0.0;
  }
  std::vector<double> sorted = frac;
  std::sort(sorted.begin(), sorted.end());
  size_t rank = static_cast<size_t>(std::clamp(percentile, 0.0, 100.0) / 100.0 *
                                    static_cast<double>(n_cols - 1));
  double cutoff = sorted[rank];

  int half = static_cast<int>(n_cols) / 2;
  std::vector<int> excluded;
  for (size_t c = 0; c < n_cols; ++c)
    if (frac[c] > cutoff) excluded.push_back(static_cast<int>(c) - half);
  return excluded;
}

// Column-wise wavelet denoising of a sample (analysis tooling; ships
// disabled by default).
inline Sample wavelet_denoise_sample(const Sample& s, const WaveletConfig& cfg) {
  Sample out = s;
  std::vector<double> col(s.n_rows);
  for (size_t c = 0; c < s.n_cols; ++c) {
    for (size_t r = 0; r < s.n_rows; ++r) col[r] = s.at(r, c);
    std::vector<double> den = wavelet_denoise(col, cfg);
    for (size_t r = 0; r < s.n_rows; ++r) out.at(r, c) = den[r];
  }
  return out;
}

}  // namespace csi2dig
