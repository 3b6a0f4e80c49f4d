#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "csi2dig/analysis.hpp"
#include "csi2dig/checkpoint.hpp"
#include "csi2dig/csi.hpp"
#include "csi2dig/csv_io.hpp"
#include "csi2dig/errors.hpp"
#include "csi2dig/layers.hpp"
#include "csi2dig/model_io.hpp"
#include "csi2dig/optim.hpp"
#include "csi2dig/rng.hpp"
#include "csi2dig/tensor.hpp"

namespace csi2dig {

enum class AeLossVariant { PaperLiteral, CorrectedDistance };

inline const char* ae_loss_variant_name(AeLossVariant v) {
  return v == AeLossVariant::PaperLiteral ? "paper-literal" : "corrected-distance";
}

inline AeLossVariant ae_loss_variant_from(const std::string& s) {
  if (s == "paper-literal") return AeLossVariant::PaperLiteral;
  if (s == "corrected-distance") return AeLossVariant::CorrectedDistance;
  fail(Errc::bad_config, "unknown loss variant " + s);
}

struct AeConfig {
  std::array<int, 3> encoder_widths = {512, 256, 128};
  double xi = 0.85;
  AeLossVariant loss_variant = AeLossVariant::CorrectedDistance;
  double recon_weight = 1.0;
  double contrastive_weight = 1.0;

  void validate() const {
    if (!(xi > 0.0 && xi < 1.0)) fail(Errc::bad_config, "xi must be in (0, 1)");
    for (int w : encoder_widths)
      if (w < 1) fail(Errc::bad_config, "encoder widths must be positive");
    if (recon_weight < 0.0 || contrastive_weight < 0.0)
      fail(Errc::bad_config, "loss weights must be >= 0");
  }
};

// Per-pair contrastive term on reconstruction correlation (unaveraged; the
// training objective applies the 1/(2 N_c) prefactor over the batch).
//   PaperLiteral:       y*c^2        + (1-y)*max(xi - c, 0)^2
//   CorrectedDistance:  y*(1-c)^2    + (1-y)*max(c - xi, 0)^2
inline double contrastive_term(double corr, int y, double xi, AeLossVariant variant) {
  if (variant == AeLossVariant::PaperLiteral) {
    double hinge = std::max(xi - corr, 0.0);
    return y * corr * corr + (1 - y) * hinge * hinge;
  }
  double hinge = std::max(corr - xi, 0.0);
  return y * (1.0 - corr) * (1.0 - corr) + (1 - y) * hinge * hinge;
}

inline double contrastive_term_dcorr(double corr, int y, double xi, AeLossVariant variant) {
  if (variant == AeLossVariant::PaperLiteral)
    return 2.0 * y * corr - 2.0 * (1 - y) * std::max(xi - corr, 0.0);
  return -2.0 * y * (1.0 - corr) + 2.0 * (1 - y) * std::max(corr - xi, 0.0);
}

// Correlation-based contrastive loss of a reconstruction pair. A constant
// vector leaves the correlation undefined; the contribution is 0 and the
// caller may count the event.
inline double contrastive_loss(const std::vector<double>& r1, const std::vector<double>& r2,
                               int y, double xi,
                               AeLossVariant variant = AeLossVariant::CorrectedDistance,
                               bool* constant_vector = nullptr) {
  if (r1.size() != r2.size()) fail(Errc::length_mismatch, "reconstruction lengths differ");
  double c = pearson(r1, r2);
  bool degenerate = false;
  if (c == 0.0) {
    // pearson returns 0 for constant vectors; distinguish a genuine zero.
    auto is_constant = [](const std::vector<double>& v) {
      for (double x : v)
        if (x != v.front()) return false;
      return true;
    };
    degenerate = is_constant(r1) || is_constant(r2);
  }
  if (constant_vector) *constant_vector = degenerate;
  if (degenerate) return 0.0;
  return contrastive_term(c, y, xi, variant);
}

// Three linear+ReLU encoder layers, then two linear+ReLU and a final plain
// linear decoder layer; weights are shared between the two branches by
// construction (both branches run the same ParamSet).
template <typename T>
struct AutoencoderModel {
  AeConfig cfg;
  size_t input_dim = 0;

  struct Cache {
    size_t batch = 0;
    const T* x = nullptr;
    std::vector<T> act[5];  // post-ReLU activations of the 5 hidden layers
    std::vector<T> recon;
  };

  std::array<size_t, 6> layer_in() const {
    size_t w1 = cfg.encoder_widths[0], w2 = cfg.encoder_widths[1], w3 = cfg.encoder_widths[2];
    return {input_dim, w1, w2, w3, w2, w1};
  }
  std::array<size_t, 6> layer_out() const {
    size_t w1 = cfg.encoder_widths[0], w2 = cfg.encoder_widths[1], w3 = cfg.encoder_widths[2];
    return {w1, w2, w3, w2, w1, input_dim};
  }
  static std::array<const char*, 6> layer_names() {
    return {"enc1", "enc2", "enc3", "dec1", "dec2", "dec3"};
  }

  void init_params(ParamSet<T>& ps, Rng& rng) const {
    auto in = layer_in();
    auto out = layer_out();
    auto names = layer_names();
    for (size_t l = 0; l < 6; ++l) {
      double bound = 1.0 / std::sqrt(static_cast<double>(in[l]));
      Tensor<T> w({in[l], out[l]});
      for (T& v : w.data) v = T(rng.uniform(-bound, bound));
      Tensor<T> b({out[l]});
      for (T& v : b.data) v = T(rng.uniform(-bound, bound));
      ps.add(std::string(names[l]) + ".w", std::move(w));
      ps.add(std::string(names[l]) + ".b", std::move(b));
    }
  }

  void forward(const T* x, size_t batch, ParamSet<T>& ps, Cache& cache) const {
    auto in = layer_in();
    auto out = layer_out();
    auto names = layer_names();
    cache.batch = batch;
    cache.x = x;
    const T* cur = x;
    for (size_t l = 0; l < 6; ++l) {
      std::vector<T>& dst = l < 5 ? cache.act[l] : cache.recon;
      dst.resize(batch * out[l]);
      linear_forward(cur, ps.value(std::string(names[l]) + ".w").ptr(),
                     ps.value(std::string(names[l]) + ".b").ptr(), dst.data(), batch, in[l],
                     out[l]);
      if (l < 5) relu_forward(dst.data(), dst.size());
      cur = dst.data();
    }
  }

  void backward(const Cache& cache, std::vector<T> drecon, ParamSet<T>& ps) const {
    auto in = layer_in();
    auto out = layer_out();
    auto names = layer_names();
    std::vector<T> dcur = std::move(drecon);
    for (size_t l = 6; l-- > 0;) {
      const T* layer_x = l == 0 ? cache.x : cache.act[l - 1].data();
      if (l < 5) relu_backward(cache.act[l].data(), dcur.data(), dcur.size());
      std::vector<T> dx;
      if (l > 0) dx.resize(cache.batch * in[l]);
      linear_backward(layer_x, ps.value(std::string(names[l]) + ".w").ptr(), dcur.data(),
                      l > 0 ? dx.data() : nullptr, ps.grad(std::string(names[l]) + ".w").ptr(),
                      ps.grad(std::string(names[l]) + ".b").ptr(), cache.batch, in[l], out[l]);
      dcur = std::move(dx);
    }
  }
};

struct AeTrainResult {
  ModelCheckpoint checkpoint;
  std::vector<double> loss_history;      // mean total loss per epoch
  size_t constant_vector_events = 0;
};

namespace ae_detail {

template <typename T>
std::vector<T> flatten_samples(const Dataset& ds) {
  size_t dim = ds.samples.front().n_rows * ds.samples.front().n_cols;
  std::vector<T> out(ds.samples.size() * dim);
  for (size_t i = 0; i < ds.samples.size(); ++i)
    for (size_t j = 0; j < dim; ++j) out[i * dim + j] = T(ds.samples[i].values[j]);
  return out;
}

// corr of two length-n vectors plus d corr / d u and d corr / d v,
// all accumulated in double. Returns false when either vector is constant.
template <typename T>
bool pearson_with_grad(const T* u, const T* v, size_t n, double& corr, std::vector<double>& du,
                       std::vector<double>& dv) {
  double mu = 0.0, mv = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mu += static_cast<double>(u[i]);
    mv += static_cast<double>(v[i]);
  }
  mu /= static_cast<double>(n);
  mv /= static_cast<double>(n);
  double suu = 0.0, svv = 0.0, suv = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double a = static_cast<double>(u[i]) - mu;
    double b = static_cast<double>(v[i]) - mv;
    suu += a * a;
    svv += b * b;
    suv += a * b;
  }
  if (suu == 0.0 || svv == 0.0) return false;
  double norm = std::sqrt(suu * svv);
  corr = suv / norm;
  du.resize(n);
  dv.resize(n);
  for (size_t i = 0; i < n; ++i) {
    double a = static_cast<double>(u[i]) - mu;
    double b = static_cast<double>(v[i]) - mv;
    du[i] = b / norm - corr * a / suu;
    dv[i] = a / norm - corr * b / svv;
  }
  return true;
}

}  // namespace ae_detail

inline ModelCheckpoint make_ae_checkpoint(const AeConfig& cfg, size_t n_t, size_t n_s,
                                          const ParamSet<float>& ps) {
  ModelCheckpoint ckpt;
  ckpt.kind = CheckpointKind::Autoencoder;
  ckpt.tensors = tensors_from_model(ps);
  ckpt.hyperparams["n_t"] = std::to_string(n_t);
  ckpt.hyperparams["n_s"] = std::to_string(n_s);
  for (int l = 0; l < 3; ++l)
    ckpt.hyperparams["enc" + std::to_string(l + 1)] = std::to_string(cfg.encoder_widths[l]);
  ckpt.hyperparams["xi"] = format_double(cfg.xi);
  ckpt.hyperparams["loss_variant"] = ae_loss_variant_name(cfg.loss_variant);
  ckpt.hyperparams["recon_weight"] = format_double(cfg.recon_weight);
  ckpt.hyperparams["contrastive_weight"] = format_double(cfg.contrastive_weight);
  return ckpt;
}

struct AutoencoderRuntime {
  AeConfig cfg;
  size_t n_t = 0, n_s = 0;
  AutoencoderModel<float> model;
  ParamSet<float> params;

  static AutoencoderRuntime from_checkpoint(const ModelCheckpoint& ckpt) {
    if (ckpt.kind != CheckpointKind::Autoencoder)
      fail(Errc::wrong_checkpoint_kind, "expected an autoencoder checkpoint");
    AutoencoderRuntime rt;
    rt.n_t = std::stoul(ckpt.hyper("n_t"));
    rt.n_s = std::stoul(ckpt.hyper("n_s"));
    for (int l = 0; l < 3; ++l)
      rt.cfg.encoder_widths[l] = std::stoi(ckpt.hyper("enc" + std::to_string(l + 1)));
    rt.cfg.xi = std::stod(ckpt.hyper("xi"));
    rt.cfg.loss_variant = ae_loss_variant_from(ckpt.hyper("loss_variant"));
    rt.cfg.recon_weight = std::stod(ckpt.hyper("recon_weight"));
    rt.cfg.contrastive_weight = std::stod(ckpt.hyper("contrastive_weight"));
    rt.model.cfg = rt.cfg;
    rt.model.input_dim = rt.n_t * rt.n_s;
    Rng dummy(0);
    rt.model.init_params(rt.params, dummy);
    load_model_tensors(ckpt, rt.params);
    return rt;
  }

  std::vector<float> reconstruct_flat(const float* x, size_t batch) {
    typename AutoencoderModel<float>::Cache cache;
    model.forward(x, batch, params, cache);
    return std::move(cache.recon);
  }
};

// Reconstruction of one sample through a trained autoencoder; label and meta
// are preserved.
inline Sample denoise(const Sample& s, const ModelCheckpoint& ckpt) {
  AutoencoderRuntime rt = AutoencoderRuntime::from_checkpoint(ckpt);
  if (s.n_rows != rt.n_t || s.n_cols != rt.n_s)
    fail(Errc::shape_mismatch, "sample is " + std::to_string(s.n_rows) + "x" +
                                   std::to_string(s.n_cols) + ", checkpoint expects " +
                                   std::to_string(rt.n_t) + "x" + std::to_string(rt.n_s));
  std::vector<float> x(rt.model.input_dim);
  for (size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(s.values[i]);
  std::vector<float> r = rt.reconstruct_flat(x.data(), 1);
  Sample out = s;
  for (size_t i = 0; i < r.size(); ++i) out.values[i] = static_cast<double>(r[i]);
  return out;
}

// Two-branch training on balanced same/different pairs: total loss is
// recon_weight * (MSE(r1,x1) + MSE(r2,x2)) summed over both branches plus
// contrastive_weight/(2 N_c) * sum of per-pair terms.
inline AeTrainResult train_autoencoder(const Dataset& dataset, const AeConfig& ae_cfg,
                                       const TrainConfig& train_cfg) {
  ae_cfg.validate();
  train_cfg.validate();
  dataset.validate();
  if (dataset.samples.empty()) fail(Errc::empty_dataset, "no samples");

  std::map<int, std::vector<size_t>> by_class;
  for (size_t i = 0; i < dataset.samples.size(); ++i) {
    if (!dataset.samples[i].label) fail(Errc::unlabeled_sample, "sample " + std::to_string(i));
    by_class[*dataset.samples[i].label].push_back(i);
  }
  std::vector<int> rich_classes;  // classes usable for same-pairs
  for (const auto& [cls, members] : by_class)
    if (members.size() >= 2) rich_classes.push_back(cls);
  if (by_class.size() < 2 || rich_classes.size() < 2)
    fail(Errc::insufficient_pairs, "need >= 2 classes with >= 2 samples each");

  std::vector<int> all_classes;
  for (const auto& [cls, members] : by_class) all_classes.push_back(cls);

  size_t n_t = dataset.samples.front().n_rows;
  size_t n_s = dataset.samples.front().n_cols;
  size_t dim = n_t * n_s;
  std::vector<float> flat = ae_detail::flatten_samples<float>(dataset);

  AutoencoderModel<float> model;
  model.cfg = ae_cfg;
  model.input_dim = dim;
  ParamSet<float> ps;
  Rng init_rng = Rng(train_cfg.seed).fork("ae-init");
  model.init_params(ps, init_rng);

  Rng pair_rng = Rng(train_cfg.seed).fork("ae-pairs");
  size_t pairs = static_cast<size_t>(train_cfg.batch_size);
  size_t steps_per_epoch = std::max<size_t>(1, dataset.samples.size() / pairs);

  AeTrainResult result;
  std::vector<float> x1(pairs * dim), x2(pairs * dim);
  std::vector<int> pair_y(pairs);

  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (size_t step = 0; step < steps_per_epoch; ++step) {
      for (size_t p = 0; p < pairs; ++p) {
        size_t ia, ib;
        if (p % 2 == 0) {  // same-class pair
          int cls = rich_classes[pair_rng.uniform_int(rich_classes.size())];
          const auto& members = by_class[cls];
          ia = members[pair_rng.uniform_int(members.size())];
          do {
            ib = members[pair_rng.uniform_int(members.size())];
          } while (ib == ia);
          pair_y[p] = 1;
        } else {  // different-class pair
          int ca = all_classes[pair_rng.uniform_int(all_classes.size())];
          int cb;
          do {
            cb = all_classes[pair_rng.uniform_int(all_classes.size())];
          } while (cb == ca);
          ia = by_class[ca][pair_rng.uniform_int(by_class[ca].size())];
          ib = by_class[cb][pair_rng.uniform_int(by_class[cb].size())];
          pair_y[p] = 0;
        }
        std::copy_n(flat.data() + ia * dim, dim, x1.data() + p * dim);
        std::copy_n(flat.data() + ib * dim, dim, x2.data() + p * dim);
      }

      typename AutoencoderModel<float>::Cache cache1, cache2;
      model.forward(x1.data(), pairs, ps, cache1);
      model.forward(x2.data(), pairs, ps, cache2);

      std::vector<float> dr1(pairs * dim, 0.0f), dr2(pairs * dim, 0.0f);
      double loss = 0.0;

      if (ae_cfg.recon_weight > 0.0) {
        double scale = ae_cfg.recon_weight / static_cast<double>(pairs * dim);
        double mse1 = 0.0, mse2 = 0.0;
        for (size_t i = 0; i < pairs * dim; ++i) {
          double e1 = static_cast<double>(cache1.recon[i]) - static_cast<double>(x1[i]);
          double e2 = static_cast<double>(cache2.recon[i]) - static_cast<double>(x2[i]);
          mse1 += e1 * e1;
          mse2 += e2 * e2;
          dr1[i] += static_cast<float>(2.0 * scale * e1);
          dr2[i] += static_cast<float>(2.0 * scale * e2);
        }
        loss += scale * (mse1 + mse2);
      }

      if (ae_cfg.contrastive_weight > 0.0) {
        double pair_scale = ae_cfg.contrastive_weight / (2.0 * static_cast<double>(pairs));
        std::vector<double> du, dv;
        for (size_t p = 0; p < pairs; ++p) {
          double corr;
          if (!ae_detail::pearson_with_grad(cache1.recon.data() + p * dim,
                                            cache2.recon.data() + p * dim, dim, corr, du, dv)) {
            ++result.constant_vector_events;
            continue;
          }
          loss += pair_scale * contrastive_term(corr, pair_y[p], ae_cfg.xi, ae_cfg.loss_variant);
          double dterm = pair_scale *
                         contrastive_term_dcorr(corr, pair_y[p], ae_cfg.xi, ae_cfg.loss_variant);
          for (size_t i = 0; i < dim; ++i) {
            dr1[p * dim + i] += static_cast<float>(dterm * du[i]);
            dr2[p * dim + i] += static_cast<float>(dterm * dv[i]);
          }
        }
      }

      if (!std::isfinite(loss)) fail(Errc::numeric_failure, "autoencoder loss is not finite");

      ps.zero_grad();
      model.backward(cache1, std::move(dr1), ps);
      model.backward(cache2, std::move(dr2), ps);
      adam_step(ps, train_cfg);
      epoch_loss += loss;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(steps_per_epoch));
  }

  result.checkpoint = make_ae_checkpoint(ae_cfg, n_t, n_s, ps);
  return result;
}

struct ReconCorrelationStats {
  double mean_same = 0.0;
  double mean_cross = 0.0;
  size_t same_pairs = 0;
  size_t cross_pairs = 0;
};

// Mean pairwise reconstruction correlation within and across classes;
// the criterion metric for the contrastive objective.
inline ReconCorrelationStats reconstruction_correlation_stats(const Dataset& ds,
                                                              AutoencoderRuntime& rt) {
  size_t dim = rt.model.input_dim;
  size_t n = ds.samples.size();
  std::vector<float> flat = ae_detail::flatten_samples<float>(ds);
  std::vector<float> recon = rt.reconstruct_flat(flat.data(), n);

  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < dim; ++j) rows[i][j] = static_cast<double>(recon[i * dim + j]);

  ReconCorrelationStats stats;
  double sum_same = 0.0, sum_cross = 0.0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double c = pearson(rows[i], rows[j]);
      if (ds.samples[i].label == ds.samples[j].label) {
        sum_same += c;
        ++stats.same_pairs;
      } else {
        sum_cross += c;
        ++stats.cross_pairs;
      }
    }
  }
  if (stats.same_pairs) stats.mean_same = sum_same / static_cast<double>(stats.same_pairs);
  if (stats.cross_pairs) stats.mean_cross = sum_cross / static_cast<double>(stats.cross_pairs);
  return stats;
}

}  // namespace csi2dig
