#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "csi2dig/csi.hpp"
#include "csi2dig/errors.hpp"
#include "csi2dig/preprocess.hpp"
#include "csi2dig/rng.hpp"

namespace csi2dig {

// Generator configuration. Digit identity is carried by the per-class
// subcarrier signature (the spatial distribution); the temporal envelope is
// only loosely class-dependent.
struct SynthSpec {
  int num_classes = 11;  // last class is silence
  int subcarriers = 64;
  double rate_hz = 100.0;
  double rate_jitter_min_hz = 60.0;
  double rate_jitter_max_hz = 150.0;
  double burst_amplitude = 3.0;
  double noise_sigma = 0.1;
  double drop_probability = 0.05;
  double window_seconds = 2.0;
  int repetitions = 30;
  uint64_t seed = 1;
  double baseline_mean = 10.0;
  double baseline_spread = 0.0;  // per-subcarrier baseline variation
  double drift_amplitude = 0.3;  // slow row-constant drift

  void validate() const {
    if (num_classes < 1) fail(Errc::bad_config, "num_classes must be >= 1");
    if (subcarriers < 2) fail(Errc::bad_config, "subcarriers must be >= 2");
    if (!(rate_jitter_min_hz <= rate_hz && rate_hz <= rate_jitter_max_hz))
      fail(Errc::bad_config, "rate_hz must lie within the jitter range");
    if (!(rate_jitter_min_hz > 0.0)) fail(Errc::bad_config, "jitter range must be positive");
    if (!(drop_probability >= 0.0 && drop_probability < 1.0))
      fail(Errc::bad_config, "drop_probability must be in [0, 1)");
    if (!(window_seconds > 0.0)) fail(Errc::bad_config, "window_seconds must be positive");
    if (repetitions < 1) fail(Errc::bad_config, "repetitions must be >= 1");
    if (noise_sigma < 0.0 || burst_amplitude < 0.0)
      fail(Errc::bad_config, "amplitudes must be >= 0");
  }

  int silence_class() const { return num_classes - 1; }
};

struct SynthOutput {
  CsiSequence sequence;
  std::vector<int> window_labels;  // class of each generated window
};

// Per-class subcarrier signatures, standard normal entries, rejection-sampled
// until pairwise |cosine| <= 0.6. Pure function of the spec seed.
inline std::vector<std::vector<double>> synth_class_signatures(const SynthSpec& spec) {
  Rng rng = Rng(spec.seed).fork("signatures");
  std::vector<std::vector<double>> sigs;
  int wanted = spec.num_classes - 1;  // silence has no signature
  for (int c = 0; c < wanted; ++c) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      std::vector<double> g(spec.subcarriers);
      double norm = 0.0;
      for (double& v : g) {
        v = rng.gaussian();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      bool ok = norm > 0.0;
      for (const auto& other : sigs) {
        double dot = 0.0, on = 0.0;
        for (int s = 0; s < spec.subcarriers; ++s) {
          dot += g[s] * other[s];
          on += other[s] * other[s];
        }
        if (std::abs(dot) / (norm * std::sqrt(on)) > 0.6) {
          ok = false;
          break;
        }
      }
      if (ok) {
        sigs.push_back(std::move(g));
        break;
      }
    }
    if (sigs.size() != static_cast<size_t>(c + 1))
      fail(Errc::numeric_failure, "could not draw non-collinear class signatures");
  }
  return sigs;
}

// Deterministic synthetic CSI: one window per (repetition, class), window w
// holding class w % num_classes. Per non-silence window the amplitude is
//   baseline_s + drift(t) + burst_amplitude * g_c[s] * envelope(tau) + noise,
// clamped at zero; silence windows drop the burst term. Noise draws are
// consumed even when noise_sigma is 0, so the same seed yields the identical
// stream structure with and without noise.
inline SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  auto signatures = synth_class_signatures(spec);

  Rng base_rng = Rng(spec.seed).fork("baseline");
  std::vector<double> baseline(spec.subcarriers);
  for (double& b : baseline) b = spec.baseline_mean + spec.baseline_spread * base_rng.uniform(-1.0, 1.0);
  double drift_phase = base_rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double drift_hz = 0.13;

  Rng class_rng = Rng(spec.seed).fork("class-envelopes");
  std::vector<double> class_center_shift(spec.num_classes, 0.0);
  std::vector<double> class_width(spec.num_classes, 0.0);
  for (int c = 0; c < spec.num_classes; ++c) {
    class_center_shift[c] = class_rng.uniform(-0.04, 0.04);
    class_width[c] = 0.16 * (1.0 + class_rng.uniform(-0.15, 0.15));
  }

  Rng rng = Rng(spec.seed).fork("stream");
  size_t total_windows = static_cast<size_t>(spec.repetitions) *
                         static_cast<size_t>(spec.num_classes);
  SynthOutput out;
  out.window_labels.reserve(total_windows);
  for (size_t w = 0; w < total_windows; ++w)
    out.window_labels.push_back(static_cast<int>(w % static_cast<size_t>(spec.num_classes)));

  std::vector<CsiFrame> frames;
  double span = spec.window_seconds * static_cast<double>(total_windows);
  double t = 0.0;
  size_t current_window = SIZE_MAX;
  double env_center = 0.5, env_width = 0.16;
  std::vector<double> noise(spec.subcarriers);

  while (t < span) {
    size_t w = static_cast<size_t>(t / spec.window_seconds);
    if (w >= total_windows) break;
    if (w != current_window) {
      current_window = w;
      int cls = out.window_labels[w];
      env_center = 0.5 + class_center_shift[cls] + rng.uniform(-0.05, 0.05);
      env_width = class_width[cls] * (1.0 + rng.uniform(-0.1, 0.1));
    }
    bool dropped = rng.uniform() < spec.drop_probability;
    for (double& z : noise) z = rng.gaussian();

    if (!dropped) {
      int cls = out.window_labels[w];
      double tau = (t - static_cast<double>(w) * spec.window_seconds) / spec.window_seconds;
      double env = std::exp(-(tau - env_center) * (tau - env_center) /
                            (2.0 * env_width * env_width));
      double drift = spec.drift_amplitude *
                     std::sin(2.0 * std::numbers::pi * drift_hz * t + drift_phase);
      CsiFrame f;
      f.timestamp_us = static_cast<int64_t>(std::llround(t * 1e6));
      f.source_id = "synth";
      f.amplitudes.resize(spec.subcarriers);
      bool silent = cls == spec.silence_class();
      for (int s = 0; s < spec.subcarriers; ++s) {
        double a = baseline[s] + drift + spec.noise_sigma * noise[s];
        if (!silent) a += spec.burst_amplitude * signatures[cls][s] * env;
        f.amplitudes[s] = std::max(0.0, a);
      }
      frames.push_back(std::move(f));
    }
    double rate = rng.uniform(spec.rate_jitter_min_hz, spec.rate_jitter_max_hz);
    t += 1.0 / rate;
  }

  auto layout = SubcarrierLayout::make(spec.subcarriers, {});
  out.sequence = CsiSequence::create(std::move(layout), std::move(frames));
  return out;
}

// generate -> select_subcarriers -> segment -> normalize, with ground-truth
// labels attached by the generator window containing each segment's midpoint.
inline Dataset make_fixture_dataset(const SynthSpec& spec) {
  SynthOutput gen = generate(spec);

  SubcarrierLayout layout = spec.subcarriers == 64
                                ? SubcarrierLayout::bw20_default()
                                : SubcarrierLayout::make(spec.subcarriers, {});
  CsiSequence selected = select_subcarriers(gen.sequence, layout);

  SegmentationConfig seg;
  seg.window_seconds = spec.window_seconds;
  seg.n_norm = static_cast<int>(std::llround(spec.rate_hz * spec.window_seconds));
  std::vector<Sample> samples = segment(selected, seg);

  int64_t window_us = static_cast<int64_t>(std::llround(spec.window_seconds * 1e6));
  Dataset ds;
  if (spec.num_classes == 11) {
    ds.class_names = Dataset::default_class_names();
  } else {
    for (int c = 0; c + 1 < spec.num_classes; ++c) ds.class_names.push_back(std::to_string(c));
    ds.class_names.push_back("silence");
  }
  for (Sample& s : samples) {
    int64_t start = std::stoll(s.meta.at("window_start_us"));
    int64_t mid = start + window_us / 2;
    size_t genw = static_cast<size_t>(mid / window_us);
    if (genw >= gen.window_labels.size()) continue;  // trailing partial window
    Sample norm = normalize_sample(s);
    norm.label = gen.window_labels[genw];
    ds.samples.push_back(std::move(norm));
  }
  if (ds.samples.empty()) fail(Errc::all_windows_dropped, "no windows survived segmentation");
  ds.validate();
  return ds;
}

}  // namespace csi2dig
