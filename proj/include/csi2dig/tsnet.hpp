#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

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

enum class ConvAxis { Subcarrier, Time };

struct TsNetConfig {
  int lstm_hidden = 128;
  std::array<int, 3> conv_channels = {32, 64, 64};
  std::array<int, 3> kernel_sizes = {7, 5, 3};
  double alpha = 0.2;
  double beta = 0.8;
  int fusion_dim = 128;
  int num_classes = 11;
  ConvAxis conv_axis = ConvAxis::Subcarrier;

  void validate() const {
    if (std::abs(alpha + beta - 1.0) > 1e-9)
      fail(Errc::weight_constraint_violated, "alpha + beta must equal 1");
    if (alpha < 0.0 || beta < 0.0)
      fail(Errc::weight_constraint_violated, "alpha and beta must be non-negative");
    if (lstm_hidden < 1 || fusion_dim < 1) fail(Errc::bad_config, "dims must be positive");
    if (num_classes < 2) fail(Errc::bad_config, "need >= 2 classes");
    for (int c : conv_channels)
      if (c < 1) fail(Errc::bad_config, "conv channels must be positive");
    for (int k : kernel_sizes)
      if (k < 1) fail(Errc::bad_config, "kernel sizes must be positive");
  }
};

struct Prediction {
  std::vector<double> probabilities;
  std::vector<int> ranked_classes;  // descending probability, ties by ascending id
};

inline Prediction make_prediction(std::vector<double> probs) {
  Prediction p;
  p.ranked_classes.resize(probs.size());
  std::iota(p.ranked_classes.begin(), p.ranked_classes.end(), 0);
  std::stable_sort(p.ranked_classes.begin(), p.ranked_classes.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  p.probabilities = std::move(probs);
  return p;
}

// F = alpha*F_t + beta*F_s with alpha + beta = 1.
template <typename T>
Tensor<T> fuse(const Tensor<T>& f_t, const Tensor<T>& f_s, double alpha, double beta) {
  if (std::abs(alpha + beta - 1.0) > 1e-9)
    fail(Errc::weight_constraint_violated, "alpha + beta must equal 1");
  if (f_t.shape != f_s.shape) fail(Errc::shape_mismatch, "fusion inputs differ in shape");
  Tensor<T> out(f_t.shape);
  for (size_t i = 0; i < out.size(); ++i)
    out.data[i] = T(alpha) * f_t.data[i] + T(beta) * f_s.data[i];
  return out;
}

// TS-Net: a one-layer LSTM over the time axis feeds the temporal feature;
// three conv1d+ReLU+BatchNorm+Dropout blocks over the subcarrier axis feed
// the spatial feature. Block 1 runs conv+ReLU on every time slice and then
// averages the rectified maps over time (the per-column z-scored input has
// zero time-mean, so the aggregation must sit behind the nonlinearity).
// Both branch outputs are projected to fusion_dim, fused as alpha*Ft+beta*Fs,
// and classified by a final linear layer.
template <typename T>
struct TsNetModel {
  TsNetConfig cfg;
  size_t n_t = 0, n_s = 0;

  size_t slice_count() const { return cfg.conv_axis == ConvAxis::Subcarrier ? n_t : n_s; }
  size_t slice_len() const { return cfg.conv_axis == ConvAxis::Subcarrier ? n_s : n_t; }
  size_t conv_len(int block) const {
    size_t l = slice_len();
    for (int i = 0; i <= block; ++i) {
      size_t k = static_cast<size_t>(cfg.kernel_sizes[i]);
      if (k > l) fail(Errc::kernel_too_large, "conv block " + std::to_string(i + 1) +
                                                  " kernel exceeds input length");
      l = l - k + 1;
    }
    return l;
  }

  void init_params(ParamSet<T>& ps, Rng& rng) const {
    size_t hidden = static_cast<size_t>(cfg.lstm_hidden);
    size_t fusion = static_cast<size_t>(cfg.fusion_dim);
    size_t classes = static_cast<size_t>(cfg.num_classes);
    auto uniform_tensor = [&](std::vector<size_t> shape, double bound) {
      Tensor<T> t(std::move(shape));
      for (T& v : t.data) v = T(rng.uniform(-bound, bound));
      return t;
    };

    double kh = 1.0 / std::sqrt(static_cast<double>(hidden));
    ps.add("lstm.wx", uniform_tensor({n_s, 4 * hidden}, kh));
    ps.add("lstm.wh", uniform_tensor({hidden, 4 * hidden}, kh));
    ps.add("lstm.b", uniform_tensor({4 * hidden}, kh));
    ps.add("proj_t.w", uniform_tensor({hidden, fusion}, kh));
    ps.add("proj_t.b", Tensor<T>({fusion}));

    size_t c_prev = 1;
    for (int blk = 0; blk < 3; ++blk) {
      size_t c = static_cast<size_t>(cfg.conv_channels[blk]);
      size_t k = static_cast<size_t>(cfg.kernel_sizes[blk]);
      double kb = 1.0 / std::sqrt(static_cast<double>(c_prev * k));
      std::string base = "conv" + std::to_string(blk + 1);
      ps.add(base + ".w", uniform_tensor({c, c_prev, k}, kb));
      ps.add(base + ".b", uniform_tensor({c}, kb));
      Tensor<T> gamma({c});
      gamma.fill(T(1));
      ps.add("bn" + std::to_string(blk + 1) + ".gamma", std::move(gamma));
      ps.add("bn" + std::to_string(blk + 1) + ".beta", Tensor<T>({c}));
      c_prev = c;
    }
    size_t c3 = static_cast<size_t>(cfg.conv_channels[2]);
    size_t l3 = conv_len(2);
    double kl = 1.0 / std::sqrt(static_cast<double>(l3));
    ps.add("chanlin.w", uniform_tensor({c3, l3}, kl));
    ps.add("chanlin.b", uniform_tensor({c3}, kl));
    double kc = 1.0 / std::sqrt(static_cast<double>(c3));
    ps.add("proj_s.w", uniform_tensor({c3, fusion}, kc));
    ps.add("proj_s.b", Tensor<T>({fusion}));
    double kf = 1.0 / std::sqrt(static_cast<double>(fusion));
    ps.add("head.w", uniform_tensor({fusion, classes}, kf));
    ps.add("head.b", uniform_tensor({classes}, kf));
  }

  std::map<std::string, Tensor<T>> init_state() const {
    std::map<std::string, Tensor<T>> state;
    for (int blk = 0; blk < 3; ++blk) {
      size_t c = static_cast<size_t>(cfg.conv_channels[blk]);
      std::string base = "bn" + std::to_string(blk + 1);
      state[base + ".running_mean"] = Tensor<T>({c});
      Tensor<T> var({c});
      var.fill(T(1));
      state[base + ".running_var"] = std::move(var);
    }
    return state;
  }

  struct Cache {
    size_t batch = 0;
    const T* x = nullptr;
    std::vector<T> slices;  // transposed input when convolving along time
    LstmCache<T> lstm;
    std::vector<T> h_last;                       // B x H
    std::vector<T> a1;                           // (B*S) x C1 x L1, post-ReLU
    std::vector<T> m1;                           // B x C1 x L1, pre-BN time mean
    std::vector<T> block_out[3];                 // post-dropout block outputs
    std::vector<T> relu_out[3];                  // post-ReLU copies (blocks 2,3)
    BatchNormCache<T> bn[3];
    std::vector<T> drop_mask[3];
    std::vector<T> fs_raw;  // B x C3
    std::vector<T> f_t, f_s, fused;
  };

  const T* conv_slices(const T* x, size_t batch, Cache& cache) const {
    if (cfg.conv_axis == ConvAxis::Subcarrier) return x;  // rows are slices already
    cache.slices.resize(batch * n_s * n_t);
    for (size_t b = 0; b < batch; ++b)
      for (size_t t = 0; t < n_t; ++t)
        for (size_t s = 0; s < n_s; ++s)
          cache.slices[(b * n_s + s) * n_t + t] = x[b * n_t * n_s + t * n_s + s];
    return cache.slices.data();
  }

  // x: batch rows of flattened N_t x N_s samples. Returns logits (B x M_c).
  std::vector<T> forward(const T* x, size_t batch, ParamSet<T>& ps,
                         std::map<std::string, Tensor<T>>& state, Mode mode, double dropout_p,
                         Rng* dropout_rng, Cache& cache) const {
    size_t hidden = static_cast<size_t>(cfg.lstm_hidden);
    size_t fusion = static_cast<size_t>(cfg.fusion_dim);
    size_t classes = static_cast<size_t>(cfg.num_classes);
    cache.batch = batch;
    cache.x = x;
    Rng eval_rng(0);  // untouched outside Train mode
    Rng& drng = (mode == Mode::Train && dropout_rng) ? *dropout_rng : eval_rng;

    // temporal branch
    std::vector<T> h0(batch * hidden, T(0)), c0(batch * hidden, T(0));
    lstm_forward(x, batch, n_t, n_s, hidden, ps.value("lstm.wx").ptr(),
                 ps.value("lstm.wh").ptr(), ps.value("lstm.b").ptr(), h0.data(), c0.data(),
                 cache.lstm);
    cache.h_last.resize(batch * hidden);
    for (size_t b = 0; b < batch; ++b)
      std::copy_n(cache.lstm.hidden_states.data() + (b * n_t + (n_t - 1)) * hidden, hidden,
                  cache.h_last.data() + b * hidden);
    cache.f_t.resize(batch * fusion);
    linear_forward(cache.h_last.data(), ps.value("proj_t.w").ptr(), ps.value("proj_t.b").ptr(),
                   cache.f_t.data(), batch, hidden, fusion);

    // spatial branch, block 1: conv+ReLU per slice, mean over slices
    size_t S = slice_count(), len = slice_len();
    size_t c1 = static_cast<size_t>(cfg.conv_channels[0]);
    size_t l1 = conv_len(0);
    const T* slices = conv_slices(x, batch, cache);
    cache.a1.resize(batch * S * c1 * l1);
    conv1d_forward(slices, ps.value("conv1.w").ptr(), ps.value("conv1.b").ptr(), cache.a1.data(),
                   batch * S, 1, len, c1, static_cast<size_t>(cfg.kernel_sizes[0]));
    relu_forward(cache.a1.data(), cache.a1.size());
    cache.m1.assign(batch * c1 * l1, T(0));
    T inv_s = T(1.0 / static_cast<double>(S));
    for (size_t b = 0; b < batch; ++b) {
      T* dst = cache.m1.data() + b * c1 * l1;
      for (size_t sl = 0; sl < S; ++sl) {
        const T* src = cache.a1.data() + (b * S + sl) * c1 * l1;
        for (size_t i = 0; i < c1 * l1; ++i) dst[i] += src[i];
      }
      for (size_t i = 0; i < c1 * l1; ++i) dst[i] *= inv_s;
    }
    cache.block_out[0] = cache.m1;  // BN and dropout applied in place below
    batchnorm_forward(cache.block_out[0].data(), batch, c1, l1, ps.value("bn1.gamma").ptr(),
                      ps.value("bn1.beta").ptr(), state.at("bn1.running_mean").ptr(),
                      state.at("bn1.running_var").ptr(), mode, cache.bn[0]);
    dropout_forward(cache.block_out[0].data(), cache.block_out[0].size(), dropout_p, mode, drng,
                    cache.drop_mask[0]);

    // blocks 2 and 3
    size_t c_prev = c1, l_prev = l1;
    for (int blk = 1; blk < 3; ++blk) {
      size_t c = static_cast<size_t>(cfg.conv_channels[blk]);
      size_t k = static_cast<size_t>(cfg.kernel_sizes[blk]);
      size_t l = l_prev - k + 1;
      std::string conv = "conv" + std::to_string(blk + 1);
      std::string bn = "bn" + std::to_string(blk + 1);
      cache.relu_out[blk].resize(batch * c * l);
      conv1d_forward(cache.block_out[blk - 1].data(), ps.value(conv + ".w").ptr(),
                     ps.value(conv + ".b").ptr(), cache.relu_out[blk].data(), batch, c_prev,
                     l_prev, c, k);
      relu_forward(cache.relu_out[blk].data(), cache.relu_out[blk].size());
      cache.block_out[blk] = cache.relu_out[blk];
      batchnorm_forward(cache.block_out[blk].data(), batch, c, l, ps.value(bn + ".gamma").ptr(),
                        ps.value(bn + ".beta").ptr(), state.at(bn + ".running_mean").ptr(),
                        state.at(bn + ".running_var").ptr(), mode, cache.bn[blk]);
      dropout_forward(cache.block_out[blk].data(), cache.block_out[blk].size(), dropout_p, mode,
                      drng, cache.drop_mask[blk]);
      c_prev = c;
      l_prev = l;
    }

    // per-channel linear map to one value, then projection
    size_t c3 = c_prev, l3 = l_prev;
    cache.fs_raw.resize(batch * c3);
    const T* clw = ps.value("chanlin.w").ptr();
    const T* clb = ps.value("chanlin.b").ptr();
    for (size_t b = 0; b < batch; ++b)
      for (size_t c = 0; c < c3; ++c) {
        T sum = clb[c];
        const T* row = cache.block_out[2].data() + (b * c3 + c) * l3;
        for (size_t l = 0; l < l3; ++l) sum += row[l] * clw[c * l3 + l];
        cache.fs_raw[b * c3 + c] = sum;
      }
    cache.f_s.resize(batch * fusion);
    linear_forward(cache.fs_raw.data(), ps.value("proj_s.w").ptr(), ps.value("proj_s.b").ptr(),
                   cache.f_s.data(), batch, c3, fusion);

    // Eq. 17 fusion and classifier head
    cache.fused.resize(batch * fusion);
    T a = T(cfg.alpha), be = T(cfg.beta);
    for (size_t i = 0; i < cache.fused.size(); ++i)
      cache.fused[i] = a * cache.f_t[i] + be * cache.f_s[i];
    std::vector<T> logits(batch * classes);
    linear_forward(cache.fused.data(), ps.value("head.w").ptr(), ps.value("head.b").ptr(),
                   logits.data(), batch, fusion, classes);
    return logits;
  }

  void backward(Cache& cache, const T* dlogits, ParamSet<T>& ps) const {
    size_t batch = cache.batch;
    size_t hidden = static_cast<size_t>(cfg.lstm_hidden);
    size_t fusion = static_cast<size_t>(cfg.fusion_dim);
    size_t classes = static_cast<size_t>(cfg.num_classes);

    std::vector<T> dfused(batch * fusion);
    linear_backward(cache.fused.data(), ps.value("head.w").ptr(), dlogits, dfused.data(),
                    ps.grad("head.w").ptr(), ps.grad("head.b").ptr(), batch, fusion, classes);

    std::vector<T> df_t(batch * fusion), df_s(batch * fusion);
    T a = T(cfg.alpha), be = T(cfg.beta);
    for (size_t i = 0; i < dfused.size(); ++i) {
      df_t[i] = a * dfused[i];
      df_s[i] = be * dfused[i];
    }

    // temporal branch
    std::vector<T> dh_last(batch * hidden);
    linear_backward(cache.h_last.data(), ps.value("proj_t.w").ptr(), df_t.data(), dh_last.data(),
                    ps.grad("proj_t.w").ptr(), ps.grad("proj_t.b").ptr(), batch, hidden, fusion);
    std::vector<T> dh_all(batch * n_t * hidden, T(0));
    for (size_t b = 0; b < batch; ++b)
      std::copy_n(dh_last.data() + b * hidden, hidden,
                  dh_all.data() + (b * n_t + (n_t - 1)) * hidden);
    lstm_backward(cache.lstm, ps.value("lstm.wx").ptr(), ps.value("lstm.wh").ptr(), dh_all.data(),
                  ps.grad("lstm.wx").ptr(), ps.grad("lstm.wh").ptr(), ps.grad("lstm.b").ptr(),
                  static_cast<T*>(nullptr));

    // spatial branch
    size_t c3 = static_cast<size_t>(cfg.conv_channels[2]);
    size_t l3 = conv_len(2);
    std::vector<T> dfs_raw(batch * c3);
    linear_backward(cache.fs_raw.data(), ps.value("proj_s.w").ptr(), df_s.data(), dfs_raw.data(),
                    ps.grad("proj_s.w").ptr(), ps.grad("proj_s.b").ptr(), batch, c3, fusion);

    std::vector<T> dblock(batch * c3 * l3);
    {
      const T* clw = ps.value("chanlin.w").ptr();
      T* dclw = ps.grad("chanlin.w").ptr();
      T* dclb = ps.grad("chanlin.b").ptr();
      for (size_t b = 0; b < batch; ++b)
        for (size_t c = 0; c < c3; ++c) {
          T d = dfs_raw[b * c3 + c];
          dclb[c] += d;
          const T* row = cache.block_out[2].data() + (b * c3 + c) * l3;
          T* drow = dblock.data() + (b * c3 + c) * l3;
          for (size_t l = 0; l < l3; ++l) {
            dclw[c * l3 + l] += d * row[l];
            drow[l] = d * clw[c * l3 + l];
          }
        }
    }

    // blocks 3 and 2: dropout -> BN -> ReLU -> conv
    for (int blk = 2; blk >= 1; --blk) {
      size_t c = static_cast<size_t>(cfg.conv_channels[blk]);
      size_t k = static_cast<size_t>(cfg.kernel_sizes[blk]);
      size_t l = conv_len(blk);
      size_t c_prev = static_cast<size_t>(cfg.conv_channels[blk - 1]);
      size_t l_prev = conv_len(blk - 1);
      std::string conv = "conv" + std::to_string(blk + 1);
      std::string bn = "bn" + std::to_string(blk + 1);

      dropout_backward(dblock.data(), dblock.size(), cache.drop_mask[blk]);
      std::vector<T> dpre_bn(batch * c * l);
      batchnorm_backward(cache.bn[blk], ps.value(bn + ".gamma").ptr(), dblock.data(),
                         ps.grad(bn + ".gamma").ptr(), ps.grad(bn + ".beta").ptr(),
                         dpre_bn.data());
      relu_backward(cache.relu_out[blk].data(), dpre_bn.data(), dpre_bn.size());
      std::vector<T> dx(batch * c_prev * l_prev, T(0));
      conv1d_backward(cache.block_out[blk - 1].data(), ps.value(conv + ".w").ptr(),
                      dpre_bn.data(), dx.data(), ps.grad(conv + ".w").ptr(),
                      ps.grad(conv + ".b").ptr(), batch, c_prev, l_prev, c, k);
      dblock = std::move(dx);
    }

    // block 1: dropout -> BN -> time mean -> ReLU -> conv (weights only)
    size_t S = slice_count(), len = slice_len();
    size_t c1 = static_cast<size_t>(cfg.conv_channels[0]);
    size_t l1 = conv_len(0);
    dropout_backward(dblock.data(), dblock.size(), cache.drop_mask[0]);
    std::vector<T> dm1(batch * c1 * l1);
    batchnorm_backward(cache.bn[0], ps.value("bn1.gamma").ptr(), dblock.data(),
                       ps.grad("bn1.gamma").ptr(), ps.grad("bn1.beta").ptr(), dm1.data());
    std::vector<T> da1(batch * S * c1 * l1);
    T inv_s = T(1.0 / static_cast<double>(S));
    for (size_t b = 0; b < batch; ++b) {
      const T* dsrc = dm1.data() + b * c1 * l1;
      for (size_t sl = 0; sl < S; ++sl) {
        T* ddst = da1.data() + (b * S + sl) * c1 * l1;
        const T* act = cache.a1.data() + (b * S + sl) * c1 * l1;
        for (size_t i = 0; i < c1 * l1; ++i) ddst[i] = act[i] > T(0) ? dsrc[i] * inv_s : T(0);
      }
    }
    const T* slices =
        cfg.conv_axis == ConvAxis::Subcarrier ? cache.x : cache.slices.data();
    conv1d_backward(slices, ps.value("conv1.w").ptr(), da1.data(), static_cast<T*>(nullptr),
                    ps.grad("conv1.w").ptr(), ps.grad("conv1.b").ptr(), batch * S, 1, len, c1,
                    static_cast<size_t>(cfg.kernel_sizes[0]));
  }
};

// ------------------------------------------------------------ training

struct TsNetEpochStats {
  double loss = 0.0;
  double train_p1 = 0.0;
};

struct TsNetTrainResult {
  ModelCheckpoint checkpoint;
  std::vector<TsNetEpochStats> history;
};

inline ModelCheckpoint make_tsnet_checkpoint(const TsNetConfig& cfg, size_t n_t, size_t n_s,
                                             const ParamSet<float>& ps,
                                             const std::map<std::string, Tensor<float>>& state) {
  ModelCheckpoint ckpt;
  ckpt.kind = CheckpointKind::TsNet;
  ckpt.tensors = tensors_from_model(ps, state);
  ckpt.hyperparams["n_t"] = std::to_string(n_t);
  ckpt.hyperparams["n_s"] = std::to_string(n_s);
  ckpt.hyperparams["lstm_hidden"] = std::to_string(cfg.lstm_hidden);
  for (int i = 0; i < 3; ++i) {
    ckpt.hyperparams["conv" + std::to_string(i + 1)] = std::to_string(cfg.conv_channels[i]);
    ckpt.hyperparams["kernel" + std::to_string(i + 1)] = std::to_string(cfg.kernel_sizes[i]);
  }
  ckpt.hyperparams["alpha"] = format_double(cfg.alpha);
  ckpt.hyperparams["beta"] = format_double(cfg.beta);
  ckpt.hyperparams["fusion_dim"] = std::to_string(cfg.fusion_dim);
  ckpt.hyperparams["num_classes"] = std::to_string(cfg.num_classes);
  ckpt.hyperparams["conv_axis"] =
      cfg.conv_axis == ConvAxis::Subcarrier ? "subcarrier" : "time";
  return ckpt;
}

struct TsNetRuntime {
  TsNetConfig cfg;
  size_t n_t = 0, n_s = 0;
  TsNetModel<float> model;
  ParamSet<float> params;
  std::map<std::string, Tensor<float>> state;

  static TsNetRuntime from_checkpoint(const ModelCheckpoint& ckpt) {
    if (ckpt.kind != CheckpointKind::TsNet)
      fail(Errc::wrong_checkpoint_kind, "expected a tsnet checkpoint");
    TsNetRuntime rt;
    rt.cfg.lstm_hidden = std::stoi(ckpt.hyper("lstm_hidden"));
    for (int i = 0; i < 3; ++i) {
      rt.cfg.conv_channels[i] = std::stoi(ckpt.hyper("conv" + std::to_string(i + 1)));
      rt.cfg.kernel_sizes[i] = std::stoi(ckpt.hyper("kernel" + std::to_string(i + 1)));
    }
    rt.cfg.alpha = std::stod(ckpt.hyper("alpha"));
    rt.cfg.beta = std::stod(ckpt.hyper("beta"));
    rt.cfg.fusion_dim = std::stoi(ckpt.hyper("fusion_dim"));
    rt.cfg.num_classes = std::stoi(ckpt.hyper("num_classes"));
    rt.cfg.conv_axis =
        ckpt.hyper("conv_axis") == "time" ? ConvAxis::Time : ConvAxis::Subcarrier;
    rt.n_t = std::stoul(ckpt.hyper("n_t"));
    rt.n_s = std::stoul(ckpt.hyper("n_s"));
    rt.model.cfg = rt.cfg;
    rt.model.n_t = rt.n_t;
    rt.model.n_s = rt.n_s;
    Rng dummy(0);
    rt.model.init_params(rt.params, dummy);
    rt.state = rt.model.init_state();
    load_model_tensors(ckpt, rt.params, &rt.state);
    return rt;
  }

  // Eval-mode logits for a batch of flattened samples.
  std::vector<float> logits(const float* x, size_t batch) {
    typename TsNetModel<float>::Cache cache;
    return model.forward(x, batch, params, state, Mode::Eval, 0.0, nullptr, cache);
  }

  Prediction predict(const Sample& s) {
    if (s.n_rows != n_t || s.n_cols != n_s)
      fail(Errc::shape_mismatch, "sample is " + std::to_string(s.n_rows) + "x" +
                                     std::to_string(s.n_cols) + ", checkpoint expects " +
                                     std::to_string(n_t) + "x" + std::to_string(n_s));
    std::vector<float> x(n_t * n_s);
    for (size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(s.values[i]);
    std::vector<float> lg = logits(x.data(), 1);
    return make_prediction(softmax_row(lg.data(), static_cast<size_t>(cfg.num_classes)));
  }
};

namespace tsnet_detail {

inline void validate_labeled_dataset(const Dataset& ds, int num_classes) {
  if (ds.samples.empty()) fail(Errc::empty_dataset, "no samples");
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    if (!ds.samples[i].label) fail(Errc::unlabeled_sample, "sample " + std::to_string(i));
    int l = *ds.samples[i].label;
    if (l < 0 || l >= num_classes)
      fail(Errc::bad_config, "sample " + std::to_string(i) + " label out of range");
  }
}

}  // namespace tsnet_detail

// Mini-batch Adam on the Eq. 18 objective; dropout/batchnorm in Train mode,
// per-epoch training-set P1 snapshots in Eval mode. Reproducible given seed.
inline TsNetTrainResult train_tsnet(const Dataset& dataset, const TsNetConfig& tsnet_cfg,
                                    const TrainConfig& train_cfg) {
  tsnet_cfg.validate();
  train_cfg.validate();
  tsnet_detail::validate_labeled_dataset(dataset, tsnet_cfg.num_classes);
  {
    int first = *dataset.samples.front().label;
    bool multi = false;
    for (const Sample& s : dataset.samples)
      if (*s.label != first) multi = true;
    if (!multi) fail(Errc::single_class, "training needs >= 2 classes");
  }

  size_t n = dataset.samples.size();
  size_t n_t = dataset.samples.front().n_rows;
  size_t n_s = dataset.samples.front().n_cols;
  size_t dim = n_t * n_s;
  size_t classes = static_cast<size_t>(tsnet_cfg.num_classes);

  std::vector<float> flat(n * dim);
  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < dim; ++j) flat[i * dim + j] = static_cast<float>(dataset.samples[i].values[j]);
    labels[i] = *dataset.samples[i].label;
  }

  TsNetModel<float> model;
  model.cfg = tsnet_cfg;
  model.n_t = n_t;
  model.n_s = n_s;
  model.conv_len(2);  // validates kernel sizes against the slice length

  ParamSet<float> ps;
  Rng init_rng = Rng(train_cfg.seed).fork("tsnet-init");
  model.init_params(ps, init_rng);
  auto state = model.init_state();
  Rng dropout_rng = Rng(train_cfg.seed).fork("tsnet-dropout");
  Rng shuffle_rng = Rng(train_cfg.seed).fork("tsnet-shuffle");

  size_t batch_size = static_cast<size_t>(train_cfg.batch_size);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<float> xb(batch_size * dim);
  std::vector<float> yb(batch_size * classes);

  TsNetTrainResult result;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    size_t batches = 0;
    for (size_t start = 0; start < n; start += batch_size) {
      size_t b = std::min(batch_size, n - start);
      for (size_t r = 0; r < b; ++r) {
        size_t src = order[start + r];
        std::copy_n(flat.data() + src * dim, dim, xb.data() + r * dim);
        std::fill_n(yb.data() + r * classes, classes, 0.0f);
        yb[r * classes + static_cast<size_t>(labels[src])] = 1.0f;
      }
      typename TsNetModel<float>::Cache cache;
      std::vector<float> logits = model.forward(xb.data(), b, ps, state, Mode::Train,
                                                train_cfg.dropout_p, &dropout_rng, cache);
      auto sce = softmax_cross_entropy(logits.data(), yb.data(), b, classes);
      if (!std::isfinite(sce.loss)) fail(Errc::numeric_failure, "training loss is not finite");
      ps.zero_grad();
      model.backward(cache, sce.grad_logits.data(), ps);
      adam_step(ps, train_cfg);
      loss_sum += sce.loss;
      ++batches;
    }

    // Eval-mode snapshot of training top-1.
    size_t hits = 0;
    for (size_t start = 0; start < n; start += batch_size) {
      size_t b = std::min(batch_size, n - start);
      typename TsNetModel<float>::Cache cache;
      std::vector<float> logits = model.forward(flat.data() + start * dim, b, ps, state,
                                                Mode::Eval, 0.0, nullptr, cache);
      for (size_t r = 0; r < b; ++r) {
        Prediction p = make_prediction(softmax_row(logits.data() + r * classes, classes));
        if (p.ranked_classes.front() == labels[start + r]) ++hits;
      }
    }
    result.history.push_back({loss_sum / static_cast<double>(std::max<size_t>(1, batches)),
                              static_cast<double>(hits) / static_cast<double>(n)});
  }

  result.checkpoint = make_tsnet_checkpoint(tsnet_cfg, n_t, n_s, ps, state);
  return result;
}

// ------------------------------------------------------------ evaluation

inline std::vector<int> predict_topn(const ModelCheckpoint& ckpt, const Sample& sample, int n) {
  TsNetRuntime rt = TsNetRuntime::from_checkpoint(ckpt);
  if (n < 1 || n > rt.cfg.num_classes) fail(Errc::bad_n, "N must be in [1, num_classes]");
  Prediction p = rt.predict(sample);
  return std::vector<int>(p.ranked_classes.begin(), p.ranked_classes.begin() + n);
}

struct EvalReport {
  std::vector<double> top_n;                  // P_1..P_Nmax
  std::vector<std::vector<double>> per_class; // M_c rows of P_1..P_Nmax
  std::vector<size_t> class_counts;
};

// P_N = (1/M) sum 1(rank_i < N) for N = 1..n_max, from 0-based ranks of the
// true label in each sample's ranked predictions.
inline std::vector<double> topn_curve(const std::vector<size_t>& ranks, size_t n_max) {
  std::vector<double> curve(n_max, 0.0);
  if (ranks.empty()) return curve;
  for (size_t r : ranks)
    for (size_t n = r; n < n_max; ++n) curve[n] += 1.0;
  for (double& v : curve) v /= static_cast<double>(ranks.size());
  return curve;
}

// P_N = (1/M) sum 1(y_i in first N ranked predictions), for N = 1..n_max,
// plus the per-class table.
inline EvalReport evaluate_topn(const ModelCheckpoint& ckpt, const Dataset& dataset, int n_max) {
  TsNetRuntime rt = TsNetRuntime::from_checkpoint(ckpt);
  if (n_max < 1 || n_max > rt.cfg.num_classes) fail(Errc::bad_n, "N must be in [1, num_classes]");
  tsnet_detail::validate_labeled_dataset(dataset, rt.cfg.num_classes);

  size_t classes = static_cast<size_t>(rt.cfg.num_classes);
  size_t n = dataset.samples.size();
  size_t dim = rt.n_t * rt.n_s;
  if (dataset.samples.front().n_rows != rt.n_t || dataset.samples.front().n_cols != rt.n_s)
    fail(Errc::shape_mismatch, "dataset shape does not match checkpoint");

  std::vector<size_t> all_ranks;
  all_ranks.reserve(n);
  std::vector<std::vector<size_t>> class_ranks(classes);

  constexpr size_t kEvalBatch = 32;
  std::vector<float> xb(kEvalBatch * dim);
  for (size_t start = 0; start < n; start += kEvalBatch) {
    size_t b = std::min(kEvalBatch, n - start);
    for (size_t r = 0; r < b; ++r)
      for (size_t j = 0; j < dim; ++j)
        xb[r * dim + j] = static_cast<float>(dataset.samples[start + r].values[j]);
    std::vector<float> logits = rt.logits(xb.data(), b);
    for (size_t r = 0; r < b; ++r) {
      Prediction p = make_prediction(softmax_row(logits.data() + r * classes, classes));
      int label = *dataset.samples[start + r].label;
      size_t rank = 0;
      while (p.ranked_classes[rank] != label) ++rank;
      all_ranks.push_back(rank);
      class_ranks[static_cast<size_t>(label)].push_back(rank);
    }
  }

  EvalReport report;
  report.top_n = topn_curve(all_ranks, static_cast<size_t>(n_max));
  report.per_class.reserve(classes);
  report.class_counts.reserve(classes);
  for (size_t c = 0; c < classes; ++c) {
    report.per_class.push_back(topn_curve(class_ranks[c], static_cast<size_t>(n_max)));
    report.class_counts.push_back(class_ranks[c].size());
  }
  return report;
}

}  // namespace csi2dig
