#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "csi2dig/errors.hpp"

namespace csi2dig {

enum class BandwidthTag { BW20 };

// Which OFDM bins of a capture are kept. Indices are centered: amplitude
// position i of a raw frame corresponds to subcarrier index i - total/2,
// so BW20 spans [-32, 31] with DC at 0.
struct SubcarrierLayout {
  BandwidthTag bandwidth_tag = BandwidthTag::BW20;
  int total_subcarriers = 64;
  std::vector<int> excluded_indices;  // sorted, unique, centered indices
  int retained_count = 64;

  static SubcarrierLayout make(int total, std::vector<int> excluded) {
    SubcarrierLayout l;
    l.total_subcarriers = total;
    std::sort(excluded.begin(), excluded.end());
    excluded.erase(std::unique(excluded.begin(), excluded.end()), excluded.end());
    for (int idx : excluded) {
      if (idx < -total / 2 || idx >= total - total / 2)
        fail(Errc::bad_config, "excluded subcarrier index " + std::to_string(idx) +
                                   " outside [-" + std::to_string(total / 2) + ", " +
                                   std::to_string(total - total / 2 - 1) + "]");
    }
    l.excluded_indices = std::move(excluded);
    l.retained_count = total - static_cast<int>(l.excluded_indices.size());
    return l;
  }

  // Guard bands and DC for a 20 MHz channel. Pilots stay in by default.
  static SubcarrierLayout bw20_default() {
    return make(64, {-32, -31, -30, -29, 0, 29, 30, 31});
  }

  static const std::vector<int>& bw20_pilots() {
    static const std::vector<int> p = {-21, -7, 7, 21};
    return p;
  }

  bool is_excluded(int centered_index) const {
    return std::binary_search(excluded_indices.begin(), excluded_indices.end(), centered_index);
  }
};

// One timestamped CSI measurement: |H(f_n)| per subcarrier. Phase is not stored.
struct CsiFrame {
  int64_t timestamp_us = 0;
  std::string source_id;
  std::vector<double> amplitudes;
};

struct CsiSequence {
  SubcarrierLayout layout;
  std::vector<CsiFrame> frames;

  // Validating constructor: uniform width, non-decreasing timestamps,
  // finite non-negative amplitudes. Downstream code relies on these holding
  // and never re-checks.
  static CsiSequence create(SubcarrierLayout layout, std::vector<CsiFrame> frames) {
    size_t width = frames.empty() ? static_cast<size_t>(layout.retained_count)
                                  : frames.front().amplitudes.size();
    int64_t prev_ts = INT64_MIN;
    for (size_t i = 0; i < frames.size(); ++i) {
      const CsiFrame& f = frames[i];
      if (f.amplitudes.size() != width)
        fail(Errc::malformed_row, "frame " + std::to_string(i) + " has " +
                                      std::to_string(f.amplitudes.size()) +
                                      " amplitudes, expected " + std::to_string(width));
      for (double a : f.amplitudes) {
        if (!std::isfinite(a) || a < 0.0)
          fail(Errc::malformed_row,
               "frame " + std::to_string(i) + " has negative or non-finite amplitude");
      }
      if (f.timestamp_us < prev_ts)
        fail(Errc::non_monotonic_timestamp,
             "timestamp decreases at frame " + std::to_string(i));
      prev_ts = f.timestamp_us;
    }
    CsiSequence s;
    s.layout = std::move(layout);
    s.frames = std::move(frames);
    return s;
  }

  size_t width() const {
    return frames.empty() ? static_cast<size_t>(layout.retained_count)
                          : frames.front().amplitudes.size();
  }
};

// Fixed-size N_t x N_s amplitude matrix; the unit of training/inference.
struct Sample {
  size_t n_rows = 0;
  size_t n_cols = 0;
  std::vector<double> values;  // row-major
  std::optional<int> label;
  std::map<std::string, std::string> meta;

  Sample() = default;
  Sample(size_t rows, size_t cols) : n_rows(rows), n_cols(cols), values(rows * cols, 0.0) {}

  double& at(size_t r, size_t c) { return values[r * n_cols + c]; }
  double at(size_t r, size_t c) const { return values[r * n_cols + c]; }
};

struct Dataset {
  std::vector<Sample> samples;
  std::vector<std::string> class_names;

  static std::vector<std::string> default_class_names() {
    std::vector<std::string> names;
    for (int d = 0; d <= 9; ++d) names.push_back(std::to_string(d));
    names.push_back("silence");
    return names;
  }

  size_t num_classes() const { return class_names.size(); }

  void validate() const {
    if (samples.empty()) return;
    size_t rows = samples.front().n_rows;
    size_t cols = samples.front().n_cols;
    for (size_t i = 0; i < samples.size(); ++i) {
      const Sample& s = samples[i];
      if (s.n_rows != rows || s.n_cols != cols)
        fail(Errc::shape_mismatch, "sample " + std::to_string(i) + " shape differs");
      if (s.label && (*s.label < 0 || static_cast<size_t>(*s.label) >= class_names.size()))
        fail(Errc::bad_config, "sample " + std::to_string(i) + " label out of range");
    }
  }
};

}  // namespace csi2dig
