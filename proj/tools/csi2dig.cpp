// csi2dig: synthetic-oracle pipeline for recovering digit classes from WiFi
// CSI amplitude sequences. Subcommands: synth, convert, segment, analyze,
// train-ae, train, eval.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include <csi2dig/csi2dig.hpp>

namespace fs = std::filesystem;
using namespace csi2dig;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  int threads = 0;
  bool quiet = false;
};

void add_global(CLI::App* cmd, GlobalOpts& g) {
  cmd->add_option("--config", g.config_path, "pipeline config file (key = value lines)");
  cmd->add_option("--seed", g.seed, "seed governing all randomness of this command");
  cmd->add_option("--threads", g.threads, "worker thread cap (default: all cores)");
  cmd->add_flag("--quiet", g.quiet, "suppress progress output");
}

PipelineConfig resolve_config(const GlobalOpts& g) {
  PipelineConfig cfg;
  if (!g.config_path.empty()) cfg = load_pipeline_config(g.config_path);
  if (g.seed) {
    cfg.train.seed = *g.seed;
    cfg.synth.seed = *g.seed;
  }
#ifdef _OPENMP
  if (g.threads > 0) omp_set_num_threads(g.threads);
#endif
  return cfg;
}

void say(const GlobalOpts& g, const std::string& msg) {
  if (!g.quiet) std::cout << msg << "\n";
}

std::string matrix_csv(const CorrelationMatrix& m) {
  std::string out;
  for (size_t i = 0; i < m.dim; ++i) {
    for (size_t j = 0; j < m.dim; ++j) {
      if (j) out += ',';
      out += format_double(m.at(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string vector_csv(const std::vector<double>& v, const char* header) {
  std::string out = header;
  out += '\n';
  for (size_t i = 0; i < v.size(); ++i)
    out += std::to_string(i) + ',' + format_double(v[i]) + '\n';
  return out;
}

Sample sequence_as_sample(const CsiSequence& seq) {
  Sample s(seq.frames.size(), seq.width());
  for (size_t r = 0; r < seq.frames.size(); ++r)
    for (size_t c = 0; c < s.n_cols; ++c) s.at(r, c) = seq.frames[r].amplitudes[c];
  return s;
}

std::vector<int> load_window_labels(const std::string& path) {
  std::string text = read_file(path);
  std::vector<int> labels;
  size_t pos = 0;
  size_t row = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++row;
    if (line.empty()) continue;
    if (row == 1) {
      if (line != "window_index,label") fail(Errc::malformed_row, "bad window label header");
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != 2) fail(Errc::malformed_row, "window label row " + std::to_string(row));
    size_t idx = static_cast<size_t>(parse_int_field(fields[0], row));
    if (idx != labels.size()) fail(Errc::malformed_row, "window indices must be consecutive");
    labels.push_back(static_cast<int>(parse_int_field(fields[1], row)));
  }
  return labels;
}

void attach_labels(std::vector<Sample>& samples, const std::vector<int>& window_labels,
                   double window_seconds) {
  int64_t window_us = static_cast<int64_t>(window_seconds * 1e6);
  std::vector<Sample> kept;
  for (Sample& s : samples) {
    int64_t start = std::stoll(s.meta.at("window_start_us"));
    size_t genw = static_cast<size_t>((start + window_us / 2) / window_us);
    if (genw >= window_labels.size()) continue;
    s.label = window_labels[genw];
    kept.push_back(std::move(s));
  }
  samples = std::move(kept);
}

Dataset maybe_denoise(const Dataset& ds, const std::string& ae_path, const GlobalOpts& g) {
  if (ae_path.empty() || ae_path == "none") return ds;
  ModelCheckpoint ckpt = load_checkpoint_file(ae_path);
  say(g, "denoising " + std::to_string(ds.samples.size()) + " samples through " + ae_path);
  AutoencoderRuntime rt = AutoencoderRuntime::from_checkpoint(ckpt);
  Dataset out;
  out.class_names = ds.class_names;
  size_t dim = rt.model.input_dim;
  for (const Sample& s : ds.samples) {
    if (s.n_rows != rt.n_t || s.n_cols != rt.n_s)
      fail(Errc::shape_mismatch, "sample shape does not match autoencoder checkpoint");
    std::vector<float> x(dim);
    for (size_t i = 0; i < dim; ++i) x[i] = static_cast<float>(s.values[i]);
    std::vector<float> r = rt.reconstruct_flat(x.data(), 1);
    Sample d = s;
    for (size_t i = 0; i < dim; ++i) d.values[i] = static_cast<double>(r[i]);
    out.samples.push_back(std::move(d));
  }
  return out;
}

int run_synth(const GlobalOpts& g, const std::string& out_dir) {
  PipelineConfig cfg = resolve_config(g);
  fs::create_directories(out_dir);
  SynthOutput gen = generate(cfg.synth);
  save_csi_file((fs::path(out_dir) / "csi.csv").string(), gen.sequence);
  std::string gt = "window_index,label\n";
  for (size_t w = 0; w < gen.window_labels.size(); ++w)
    gt += std::to_string(w) + ',' + std::to_string(gen.window_labels[w]) + '\n';
  write_file((fs::path(out_dir) / "gt_windows.csv").string(), gt);
  say(g, "wrote " + std::to_string(gen.sequence.frames.size()) + " frames, " +
             std::to_string(gen.window_labels.size()) + " windows to " + out_dir);
  return 0;
}

int run_convert(const GlobalOpts& g, const std::string& in_path, const std::string& out_path,
                bool select, bool exclude_pilots, const std::string& burr_calibration,
                double burr_percentile, bool wavelet) {
  PipelineConfig cfg = resolve_config(g);
  CsiSequence seq = load_csi_file(in_path);
  if (select) {
    SubcarrierLayout layout = SubcarrierLayout::bw20_default();
    std::vector<int> excluded = layout.excluded_indices;
    if (exclude_pilots)
      for (int p : SubcarrierLayout::bw20_pilots()) excluded.push_back(p);
    if (!burr_calibration.empty()) {
      CsiSequence cal = load_csi_file(burr_calibration);
      for (int idx : detect_burr_subcarriers(cal, burr_percentile)) excluded.push_back(idx);
    }
    layout = SubcarrierLayout::make(layout.total_subcarriers, excluded);
    seq = select_subcarriers(seq, layout);
    say(g, "retained " + std::to_string(layout.retained_count) + " subcarriers");
  }
  if (wavelet) {
    cfg.wavelet.enabled = true;
    Sample m = sequence_as_sample(seq);
    Sample den = wavelet_denoise_sample(m, cfg.wavelet);
    for (size_t r = 0; r < seq.frames.size(); ++r)
      for (size_t c = 0; c < den.n_cols; ++c)
        seq.frames[r].amplitudes[c] = std::max(0.0, den.at(r, c));
  }
  save_csi_file(out_path, seq);
  say(g, "wrote " + out_path);
  return 0;
}

int run_segment(const GlobalOpts& g, const std::string& in_path, const std::string& out_dir,
                const std::string& labels_path, bool no_select, bool no_normalize) {
  PipelineConfig cfg = resolve_config(g);
  CsiSequence seq = load_csi_file(in_path);
  if (!no_select) seq = select_subcarriers(seq, SubcarrierLayout::bw20_default());
  std::vector<Sample> samples = segment(seq, cfg.segmentation);
  if (!labels_path.empty())
    attach_labels(samples, load_window_labels(labels_path), cfg.segmentation.window_seconds);
  Dataset ds;
  ds.class_names = cfg.tsnet.num_classes == 11
                       ? Dataset::default_class_names()
                       : [&] {
                           std::vector<std::string> names;
                           for (int c = 0; c + 1 < cfg.tsnet.num_classes; ++c)
                             names.push_back(std::to_string(c));
                           names.push_back("silence");
                           return names;
                         }();
  for (Sample& s : samples) ds.samples.push_back(no_normalize ? s : normalize_sample(s));
  ds.validate();
  write_dataset(out_dir, ds);
  say(g, "wrote " + std::to_string(ds.samples.size()) + " samples to " + out_dir);
  return 0;
}

int run_analyze(const GlobalOpts& g, const std::string& in_path, const std::string& vs_path,
                const std::string& out_dir, bool no_select, bool wavelet) {
  PipelineConfig cfg = resolve_config(g);
  fs::create_directories(out_dir);
  auto prepare = [&](const std::string& path) {
    CsiSequence seq = load_csi_file(path);
    if (!no_select) seq = select_subcarriers(seq, SubcarrierLayout::bw20_default());
    Sample m = sequence_as_sample(seq);
    if (wavelet) {
      cfg.wavelet.enabled = true;
      m = wavelet_denoise_sample(m, cfg.wavelet);
    }
    return m;
  };

  Sample a = prepare(in_path);
  CorrelationMatrix ct = temporal_corr_matrix(a);
  CorrelationMatrix cs = spatial_corr_matrix(a);
  write_file((fs::path(out_dir) / "temporal_corr.csv").string(), matrix_csv(ct));
  write_file((fs::path(out_dir) / "spatial_corr.csv").string(), matrix_csv(cs));
  write_file((fs::path(out_dir) / "temporal_profile.csv").string(),
             vector_csv(column_mean_profile(ct), "subcarrier,mean_corr"));
  write_file((fs::path(out_dir) / "spatial_profile.csv").string(),
             vector_csv(column_mean_profile(cs), "measurement,mean_corr"));

  if (!vs_path.empty()) {
    Sample b = prepare(vs_path);
    double pcc = cross_mean_pcc(a, b);
    double dtw = dtw_distance(normalize_sample(a), normalize_sample(b));
    std::string cross = "metric,value\ncross_mean_pcc," + format_double(pcc) +
                        "\ndtw_distance," + format_double(dtw) + '\n';
    write_file((fs::path(out_dir) / "cross.csv").string(), cross);
    say(g, "cross_mean_pcc=" + format_double(pcc) + " dtw=" + format_double(dtw));
  }
  say(g, "analysis written to " + out_dir);
  return 0;
}

int run_train_ae(const GlobalOpts& g, const std::string& data_dir, const std::string& out_path,
                 std::optional<double> xi, const std::string& loss_variant,
                 std::optional<double> recon_weight, std::optional<int> epochs) {
  PipelineConfig cfg = resolve_config(g);
  if (xi) cfg.ae.xi = *xi;
  if (!loss_variant.empty()) cfg.ae.loss_variant = ae_loss_variant_from(loss_variant);
  if (recon_weight) cfg.ae.recon_weight = *recon_weight;
  if (epochs) cfg.train.epochs = *epochs;

  Dataset ds = read_dataset(data_dir);
  AeTrainResult result = train_autoencoder(ds, cfg.ae, cfg.train);
  save_checkpoint_file(out_path, result.checkpoint);
  if (!g.quiet) {
    for (size_t e = 0; e < result.loss_history.size(); ++e)
      std::printf("epoch %zu loss %.6f\n", e, result.loss_history[e]);
    if (result.constant_vector_events)
      std::printf("constant-vector pairs skipped: %zu\n", result.constant_vector_events);
  }
  say(g, "checkpoint written to " + out_path);
  return 0;
}

int run_train(const GlobalOpts& g, const std::string& data_dir, const std::string& out_path,
              std::optional<double> alpha, std::optional<double> beta, std::optional<int> epochs,
              const std::string& ae_path) {
  PipelineConfig cfg = resolve_config(g);
  if (alpha && !beta) {
    cfg.tsnet.alpha = *alpha;
    cfg.tsnet.beta = 1.0 - *alpha;
  } else if (beta && !alpha) {
    cfg.tsnet.beta = *beta;
    cfg.tsnet.alpha = 1.0 - *beta;
  } else if (alpha && beta) {
    cfg.tsnet.alpha = *alpha;
    cfg.tsnet.beta = *beta;
  }
  if (epochs) cfg.train.epochs = *epochs;

  Dataset ds = maybe_denoise(read_dataset(data_dir), ae_path, g);
  TsNetTrainResult result = train_tsnet(ds, cfg.tsnet, cfg.train);
  save_checkpoint_file(out_path, result.checkpoint);
  if (!g.quiet)
    for (size_t e = 0; e < result.history.size(); ++e)
      std::printf("epoch %zu loss %.6f train_p1 %.4f\n", e, result.history[e].loss,
                  result.history[e].train_p1);
  say(g, "checkpoint written to " + out_path);
  return 0;
}

int run_eval(const GlobalOpts& g, const std::string& model_path, const std::string& data_dir,
             const std::string& out_dir, int topn, bool per_class, const std::string& ae_path) {
  resolve_config(g);
  ModelCheckpoint ckpt = load_checkpoint_file(model_path);
  Dataset ds = maybe_denoise(read_dataset(data_dir), ae_path, g);
  EvalReport report = evaluate_topn(ckpt, ds, topn);
  fs::create_directories(out_dir);

  std::string overall = "n,p_n\n";
  for (int n = 1; n <= topn; ++n)
    overall += std::to_string(n) + ',' + format_double(report.top_n[n - 1]) + '\n';
  write_file((fs::path(out_dir) / "eval.csv").string(), overall);

  if (per_class) {
    std::string table = "class";
    for (int n = 1; n <= topn; ++n) table += ",P" + std::to_string(n);
    table += '\n';
    for (size_t c = 0; c < report.per_class.size(); ++c) {
      table += std::to_string(c);
      for (int n = 1; n <= topn; ++n)
        table += ',' + format_double(report.per_class[c][n - 1]);
      table += '\n';
    }
    write_file((fs::path(out_dir) / "per_class.csv").string(), table);
  }
  if (!g.quiet)
    for (int n = 1; n <= topn; ++n) std::printf("P%d = %.4f\n", n, report.top_n[n - 1]);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CSI2Dig pipeline: synthetic CSI, preprocessing, similarity analytics, "
               "contrastive autoencoder, and the TS-Net temporal/spatial fusion classifier"};
  app.require_subcommand(1);

  GlobalOpts g_synth, g_convert, g_segment, g_analyze, g_train_ae, g_train, g_eval;

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic CSI capture");
  std::string synth_out;
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  add_global(synth_cmd, g_synth);

  auto* convert_cmd = app.add_subcommand("convert", "validate/convert a CSI CSV capture");
  std::string convert_in, convert_out, burr_calibration;
  bool convert_select = false, convert_pilots = false, convert_wavelet = false;
  double burr_percentile = 99.0;
  convert_cmd->add_option("--in", convert_in, "input CSI CSV")->required();
  convert_cmd->add_option("--out", convert_out, "output CSI CSV")->required();
  convert_cmd->add_flag("--select", convert_select, "apply BW20 guard/DC subcarrier selection");
  convert_cmd->add_flag("--exclude-pilots", convert_pilots, "also exclude pilot subcarriers");
  convert_cmd->add_option("--burr-calibration", burr_calibration,
                          "silence capture used to auto-exclude burr-noise subcarriers");
  convert_cmd->add_option("--burr-percentile", burr_percentile,
                          "percentile for the burr rule (default 99)");
  convert_cmd->add_flag("--wavelet", convert_wavelet, "wavelet-denoise each subcarrier");
  add_global(convert_cmd, g_convert);

  auto* segment_cmd = app.add_subcommand("segment", "cut a capture into fixed-size samples");
  std::string segment_in, segment_out, segment_labels;
  bool segment_no_select = false, segment_no_normalize = false;
  segment_cmd->add_option("--in", segment_in, "input CSI CSV")->required();
  segment_cmd->add_option("--out", segment_out, "output dataset directory")->required();
  segment_cmd->add_option("--labels", segment_labels, "window ground-truth CSV (from synth)");
  segment_cmd->add_flag("--no-select", segment_no_select, "skip subcarrier selection");
  segment_cmd->add_flag("--no-normalize", segment_no_normalize, "skip per-subcarrier z-scoring");
  add_global(segment_cmd, g_segment);

  auto* analyze_cmd = app.add_subcommand("analyze", "correlation matrices, profiles, DTW/PCC");
  std::string analyze_in, analyze_vs, analyze_out;
  bool analyze_no_select = false, analyze_wavelet = false;
  analyze_cmd->add_option("--in", analyze_in, "input CSI CSV")->required();
  analyze_cmd->add_option("--vs", analyze_vs, "second capture for cross-sequence metrics");
  analyze_cmd->add_option("--out", analyze_out, "output directory")->required();
  analyze_cmd->add_flag("--no-select", analyze_no_select, "skip subcarrier selection");
  analyze_cmd->add_flag("--wavelet", analyze_wavelet, "wavelet-denoise before analysis");
  add_global(analyze_cmd, g_analyze);

  auto* train_ae_cmd = app.add_subcommand("train-ae", "train the two-branch autoencoder");
  std::string ae_data, ae_out, ae_loss_variant;
  std::optional<double> ae_xi, ae_recon_weight;
  std::optional<int> ae_epochs;
  train_ae_cmd->add_option("--data", ae_data, "dataset directory")->required();
  train_ae_cmd->add_option("--out", ae_out, "output checkpoint path")->required();
  train_ae_cmd->add_option("--xi", ae_xi, "correlation margin (default 0.85)");
  train_ae_cmd->add_option("--loss-variant", ae_loss_variant,
                           "paper-literal | corrected-distance");
  train_ae_cmd->add_option("--recon-weight", ae_recon_weight, "reconstruction MSE weight");
  train_ae_cmd->add_option("--epochs", ae_epochs, "training epochs");
  add_global(train_ae_cmd, g_train_ae);

  auto* train_cmd = app.add_subcommand("train", "train the TS-Net classifier");
  std::string train_data, train_out, train_ae_ckpt = "none";
  std::optional<double> train_alpha, train_beta;
  std::optional<int> train_epochs;
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--out", train_out, "output checkpoint path")->required();
  train_cmd->add_option("--alpha", train_alpha, "temporal fusion weight");
  train_cmd->add_option("--beta", train_beta, "spatial fusion weight");
  train_cmd->add_option("--epochs", train_epochs, "training epochs");
  train_cmd->add_option("--ae", train_ae_ckpt, "autoencoder checkpoint or 'none'");
  add_global(train_cmd, g_train);

  auto* eval_cmd = app.add_subcommand("eval", "top-N evaluation of a trained model");
  std::string eval_model, eval_data, eval_out, eval_ae = "none";
  int eval_topn = 5;
  bool eval_per_class = false;
  eval_cmd->add_option("--model", eval_model, "TS-Net checkpoint")->required();
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--out", eval_out, "output directory")->required();
  eval_cmd->add_option("--topn", eval_topn, "largest N to report (default 5)");
  eval_cmd->add_flag("--per-class", eval_per_class, "emit the per-class P_N table");
  eval_cmd->add_option("--ae", eval_ae, "autoencoder checkpoint or 'none'");
  add_global(eval_cmd, g_eval);

  try {
    app.parse(argc, argv);
    if (synth_cmd->parsed()) return run_synth(g_synth, synth_out);
    if (convert_cmd->parsed())
      return run_convert(g_convert, convert_in, convert_out, convert_select, convert_pilots,
                         burr_calibration, burr_percentile, convert_wavelet);
    if (segment_cmd->parsed())
      return run_segment(g_segment, segment_in, segment_out, segment_labels, segment_no_select,
                         segment_no_normalize);
    if (analyze_cmd->parsed())
      return run_analyze(g_analyze, analyze_in, analyze_vs, analyze_out, analyze_no_select,
                         analyze_wavelet);
    if (train_ae_cmd->parsed())
      return run_train_ae(g_train_ae, ae_data, ae_out, ae_xi, ae_loss_variant, ae_recon_weight,
                          ae_epochs);
    if (train_cmd->parsed())
      return run_train(g_train, train_data, train_out, train_alpha, train_beta, train_epochs,
                       train_ae_ckpt);
    if (eval_cmd->parsed())
      return run_eval(g_eval, eval_model, eval_data, eval_out, eval_topn, eval_per_class,
                      eval_ae);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const CsiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
