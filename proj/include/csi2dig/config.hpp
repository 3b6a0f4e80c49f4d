#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "csi2dig/autoencoder.hpp"
#include "csi2dig/csv_io.hpp"
#include "csi2dig/errors.hpp"
#include "csi2dig/optim.hpp"
#include "csi2dig/preprocess.hpp"
#include "csi2dig/synth.hpp"
#include "csi2dig/tsnet.hpp"
#include "csi2dig/wavelet.hpp"

namespace csi2dig {

// Merged pipeline configuration, loadable from a `key = value` text file
// (# comments, blank lines allowed). CLI flags override file values.
struct PipelineConfig {
  SegmentationConfig segmentation;
  WaveletConfig wavelet;
  AeConfig ae;
  TsNetConfig tsnet;
  TrainConfig train;
  SynthSpec synth;

  void validate() const {
    segmentation.validate();
    ae.validate();
    tsnet.validate();
    train.validate();
    synth.validate();
  }
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double to_double(std::string_view v, const std::string& key) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(Errc::bad_config, "bad value for " + key);
  return out;
}

inline int to_int(std::string_view v, const std::string& key) {
  int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(Errc::bad_config, "bad value for " + key);
  return out;
}

inline uint64_t to_u64(std::string_view v, const std::string& key) {
  uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(Errc::bad_config, "bad value for " + key);
  return out;
}

inline bool to_bool(std::string_view v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(Errc::bad_config, "bad boolean for " + key);
}

}  // namespace config_detail

inline void apply_config_key(PipelineConfig& cfg, const std::string& key, std::string_view value) {
  using namespace config_detail;
  if (key == "segmentation.window_seconds") cfg.segmentation.window_seconds = to_double(value, key);
  else if (key == "segmentation.n_norm") cfg.segmentation.n_norm = to_int(value, key);
  else if (key == "segmentation.discard_threshold_fraction")
    cfg.segmentation.discard_threshold_fraction = to_double(value, key);
  else if (key == "wavelet.levels") cfg.wavelet.levels = to_int(value, key);
  else if (key == "wavelet.enabled") cfg.wavelet.enabled = to_bool(value, key);
  else if (key == "ae.enc1") cfg.ae.encoder_widths[0] = to_int(value, key);
  else if (key == "ae.enc2") cfg.ae.encoder_widths[1] = to_int(value, key);
  else if (key == "ae.enc3") cfg.ae.encoder_widths[2] = to_int(value, key);
  else if (key == "ae.xi") cfg.ae.xi = to_double(value, key);
  else if (key == "ae.loss_variant") cfg.ae.loss_variant = ae_loss_variant_from(std::string(value));
  else if (key == "ae.recon_weight") cfg.ae.recon_weight = to_double(value, key);
  else if (key == "ae.contrastive_weight") cfg.ae.contrastive_weight = to_double(value, key);
  else if (key == "tsnet.lstm_hidden") cfg.tsnet.lstm_hidden = to_int(value, key);
  else if (key == "tsnet.conv1") cfg.tsnet.conv_channels[0] = to_int(value, key);
  else if (key == "tsnet.conv2") cfg.tsnet.conv_channels[1] = to_int(value, key);
  else if (key == "tsnet.conv3") cfg.tsnet.conv_channels[2] = to_int(value, key);
  else if (key == "tsnet.kernel1") cfg.tsnet.kernel_sizes[0] = to_int(value, key);
  else if (key == "tsnet.kernel2") cfg.tsnet.kernel_sizes[1] = to_int(value, key);
  else if (key == "tsnet.kernel3") cfg.tsnet.kernel_sizes[2] = to_int(value, key);
  else if (key == "tsnet.alpha") cfg.tsnet.alpha = to_double(value, key);
  else if (key == "tsnet.beta") cfg.tsnet.beta = to_double(value, key);
  else if (key == "tsnet.fusion_dim") cfg.tsnet.fusion_dim = to_int(value, key);
  else if (key == "tsnet.num_classes") cfg.tsnet.num_classes = to_int(value, key);
  else if (key == "tsnet.conv_axis")
    cfg.tsnet.conv_axis = value == "time" ? ConvAxis::Time : ConvAxis::Subcarrier;
  else if (key == "train.learning_rate") cfg.train.learning_rate = to_double(value, key);
  else if (key == "train.weight_decay") cfg.train.weight_decay = to_double(value, key);
  else if (key == "train.dropout_p") cfg.train.dropout_p = to_double(value, key);
  else if (key == "train.epochs") cfg.train.epochs = to_int(value, key);
  else if (key == "train.batch_size") cfg.train.batch_size = to_int(value, key);
  else if (key == "train.seed") cfg.train.seed = to_u64(value, key);
  else if (key == "train.coupled_weight_decay") cfg.train.coupled_weight_decay = to_bool(value, key);
  else if (key == "synth.num_classes") cfg.synth.num_classes = to_int(value, key);
  else if (key == "synth.subcarriers") cfg.synth.subcarriers = to_int(value, key);
  else if (key == "synth.rate_hz") cfg.synth.rate_hz = to_double(value, key);
  else if (key == "synth.rate_jitter_min_hz") cfg.synth.rate_jitter_min_hz = to_double(value, key);
  else if (key == "synth.rate_jitter_max_hz") cfg.synth.rate_jitter_max_hz = to_double(value, key);
  else if (key == "synth.burst_amplitude") cfg.synth.burst_amplitude = to_double(value, key);
  else if (key == "synth.noise_sigma") cfg.synth.noise_sigma = to_double(value, key);
  else if (key == "synth.drop_probability") cfg.synth.drop_probability = to_double(value, key);
  else if (key == "synth.window_seconds") cfg.synth.window_seconds = to_double(value, key);
  else if (key == "synth.repetitions") cfg.synth.repetitions = to_int(value, key);
  else if (key == "synth.seed") cfg.synth.seed = to_u64(value, key);
  else if (key == "synth.baseline_mean") cfg.synth.baseline_mean = to_double(value, key);
  else if (key == "synth.baseline_spread") cfg.synth.baseline_spread = to_double(value, key);
  else if (key == "synth.drift_amplitude") cfg.synth.drift_amplitude = to_double(value, key);
  else fail(Errc::bad_config, "unknown config key " + key);
}

inline PipelineConfig parse_pipeline_config(std::string_view text) {
  using namespace config_detail;
  PipelineConfig cfg;
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(Errc::bad_config, "line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    apply_config_key(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::string& path) {
  return parse_pipeline_config(read_file(path));
}

}  // namespace csi2dig
