#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "csi2dig/errors.hpp"
#include "csi2dig/rng.hpp"
#include "csi2dig/tensor.hpp"

namespace csi2dig {

enum class Mode { Train, Eval };

template <typename T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

// ---------------------------------------------------------------- linear

// y[B x O] = x[B x I] * w[I x O] + b
template <typename T>
void linear_forward(const T* x, const T* w, const T* b, T* y, size_t batch, size_t in,
                    size_t out) {
  matmul(x, w, y, batch, in, out);
  for (size_t r = 0; r < batch; ++r)
    for (size_t j = 0; j < out; ++j) y[r * out + j] += b[j];
}

// Accumulates dw/db; writes dx when non-null.
template <typename T>
void linear_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, size_t batch,
                     size_t in, size_t out) {
  if (dx) matmul_bt(dy, w, dx, batch, out, in);
  matmul_at(x, dy, dw, batch, in, out, /*accumulate=*/true);
  for (size_t r = 0; r < batch; ++r)
    for (size_t j = 0; j < out; ++j) db[j] += dy[r * out + j];
}

// ---------------------------------------------------------------- relu

template <typename T>
void relu_forward(T* x, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (x[i] < T(0)) x[i] = T(0);
}

// `y` is the post-activation buffer from the forward pass.
template <typename T>
void relu_backward(const T* y, T* dy, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (y[i] <= T(0)) dy[i] = T(0);
}

// ---------------------------------------------------------------- dropout

// Train: zero with probability p, scale survivors by 1/(1-p); Eval: identity.
// The mask doubles as the local gradient.
template <typename T>
void dropout_forward(T* x, size_t n, double p, Mode mode, Rng& rng, std::vector<T>& mask) {
  if (mode == Mode::Eval || p == 0.0) {
    mask.clear();
    return;
  }
  mask.resize(n);
  T scale = T(1.0 / (1.0 - p));
  for (size_t i = 0; i < n; ++i) {
    mask[i] = rng.uniform() < p ? T(0) : scale;
    x[i] *= mask[i];
  }
}

template <typename T>
void dropout_backward(T* dy, size_t n, const std::vector<T>& mask) {
  if (mask.empty()) return;
  for (size_t i = 0; i < n; ++i) dy[i] *= mask[i];
}

// ---------------------------------------------------------------- batchnorm

template <typename T>
struct BatchNormCache {
  Mode mode = Mode::Train;
  size_t batch = 0, channels = 0, len = 0;
  std::vector<T> xhat;
  std::vector<T> inv_std;  // per channel
};

// Per-channel normalization of a (B, C, L) activation over the B*L positions,
// eps 1e-5, learned scale/shift, running stats with momentum 0.1 for Eval.
template <typename T>
void batchnorm_forward(T* x, size_t batch, size_t channels, size_t len, const T* gamma,
                       const T* beta, T* running_mean, T* running_var, Mode mode,
                       BatchNormCache<T>& cache, double momentum = 0.1, double eps = 1e-5) {
  size_t count = batch * len;
  cache.mode = mode;
  cache.batch = batch;
  cache.channels = channels;
  cache.len = len;
  cache.inv_std.resize(channels);
  cache.xhat.resize(batch * channels * len);

  if (mode == Mode::Train && count < 2)
    fail(Errc::batch_too_small, "batchnorm needs >= 2 positions per channel in Train mode");

  auto idx = [&](size_t b, size_t c, size_t l) { return (b * channels + c) * len + l; };

  for (size_t c = 0; c < channels; ++c) {
    double mean, var;
    if (mode == Mode::Train) {
      double sum = 0.0;
      for (size_t b = 0; b < batch; ++b)
        for (size_t l = 0; l < len; ++l) sum += static_cast<double>(x[idx(b, c, l)]);
      mean = sum / static_cast<double>(count);
      double sq = 0.0;
      for (size_t b = 0; b < batch; ++b)
        for (size_t l = 0; l < len; ++l) {
          double d = static_cast<double>(x[idx(b, c, l)]) - mean;
          sq += d * d;
        }
      var = sq / static_cast<double>(count);
      running_mean[c] = T((1.0 - momentum) * static_cast<double>(running_mean[c]) + momentum * mean);
      running_var[c] = T((1.0 - momentum) * static_cast<double>(running_var[c]) + momentum * var);
    } else {
      mean = static_cast<double>(running_mean[c]);
      var = static_cast<double>(running_var[c]);
    }
    double inv = 1.0 / std::sqrt(var + eps);
    cache.inv_std[c] = T(inv);
    for (size_t b = 0; b < batch; ++b)
      for (size_t l = 0; l < len; ++l) {
        T xh = T((static_cast<double>(x[idx(b, c, l)]) - mean) * inv);
        cache.xhat[idx(b, c, l)] = xh;
        x[idx(b, c, l)] = gamma[c] * xh + beta[c];
      }
  }
}

template <typename T>
void batchnorm_backward(const BatchNormCache<T>& cache, const T* gamma, T* dy, T* dgamma,
                        T* dbeta, T* dx) {
  size_t batch = cache.batch, channels = cache.channels, len = cache.len;
  size_t count = batch * len;
  auto idx = [&](size_t b, size_t c, size_t l) { return (b * channels + c) * len + l; };

  for (size_t c = 0; c < channels; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (size_t b = 0; b < batch; ++b)
      for (size_t l = 0; l < len; ++l) {
        size_t i = idx(b, c, l);
        sum_dy += static_cast<double>(dy[i]);
        sum_dy_xhat += static_cast<double>(dy[i]) * static_cast<double>(cache.xhat[i]);
      }
    dgamma[c] += T(sum_dy_xhat);
    dbeta[c] += T(sum_dy);

    double g = static_cast<double>(gamma[c]);
    double inv = static_cast<double>(cache.inv_std[c]);
    if (cache.mode == Mode::Train) {
      double mean_dy = sum_dy / static_cast<double>(count);
      double mean_dy_xhat = sum_dy_xhat / static_cast<double>(count);
      for (size_t b = 0; b < batch; ++b)
        for (size_t l = 0; l < len; ++l) {
          size_t i = idx(b, c, l);
          double dxhat = static_cast<double>(dy[i]) * g;
          dx[i] = T(inv * (dxhat - g * mean_dy - static_cast<double>(cache.xhat[i]) * g * mean_dy_xhat));
        }
    } else {
      // running stats are constants in Eval mode
      for (size_t b = 0; b < batch; ++b)
        for (size_t l = 0; l < len; ++l) {
          size_t i = idx(b, c, l);
          dx[i] = T(static_cast<double>(dy[i]) * g * inv);
        }
    }
  }
}

// ---------------------------------------------------------------- conv1d

// y[B x Co x Lo] = cross-correlation of x[B x Ci x L] with w[Co x Ci x K],
// stride 1, no padding: y(t) = sum_k sum_c x(c, t+k) * w(c, k).
template <typename T>
void conv1d_forward(const T* x, const T* w, const T* b, T* y, size_t batch, size_t c_in,
                    size_t len, size_t c_out, size_t kernel) {
  if (kernel > len) fail(Errc::kernel_too_large, "kernel larger than input length");
  size_t lo = len - kernel + 1;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(batch); ++bi) {
    const T* xb = x + bi * c_in * len;
    T* yb = y + bi * c_out * lo;
    for (size_t co = 0; co < c_out; ++co) {
      T* yrow = yb + co * lo;
      for (size_t t = 0; t < lo; ++t) yrow[t] = b ? b[co] : T(0);
      for (size_t ci = 0; ci < c_in; ++ci) {
        const T* xrow = xb + ci * len;
        const T* wrow = w + (co * c_in + ci) * kernel;
        for (size_t k = 0; k < kernel; ++k) {
          T wv = wrow[k];
          for (size_t t = 0; t < lo; ++t) yrow[t] += wv * xrow[t + k];
        }
      }
    }
  }
}

// Accumulates dw/db; writes dx when non-null (dx must be zeroed by caller).
template <typename T>
void conv1d_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db, size_t batch,
                     size_t c_in, size_t len, size_t c_out, size_t kernel) {
  size_t lo = len - kernel + 1;
  for (size_t bi = 0; bi < batch; ++bi) {
    const T* xb = x + bi * c_in * len;
    const T* dyb = dy + bi * c_out * lo;
    T* dxb = dx ? dx + bi * c_in * len : nullptr;
    for (size_t co = 0; co < c_out; ++co) {
      const T* dyrow = dyb + co * lo;
      if (db)
        for (size_t t = 0; t < lo; ++t) db[co] += dyrow[t];
      for (size_t ci = 0; ci < c_in; ++ci) {
        const T* xrow = xb + ci * len;
        T* dwrow = dw + (co * c_in + ci) * kernel;
        const T* wrow = w + (co * c_in + ci) * kernel;
        for (size_t k = 0; k < kernel; ++k) {
          T acc = T(0);
          for (size_t t = 0; t < lo; ++t) acc += dyrow[t] * xrow[t + k];
          dwrow[k] += acc;
        }
        if (dxb) {
          T* dxrow = dxb + ci * len;
          for (size_t k = 0; k < kernel; ++k) {
            T wv = wrow[k];
            for (size_t t = 0; t < lo; ++t) dxrow[t + k] += wv * dyrow[t];
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------- lstm

template <typename T>
struct LstmCache {
  size_t batch = 0, steps = 0, input = 0, hidden = 0;
  const T* x = nullptr;          // B x Tsteps x I (borrowed)
  std::vector<T> gates;          // B x Tsteps x 4H, post-activation [f i g o]
  std::vector<T> cell;           // B x Tsteps x H
  std::vector<T> tanh_cell;      // B x Tsteps x H
  std::vector<T> hidden_states;  // B x Tsteps x H
  std::vector<T> h0, c0;         // B x H
};

// Single-layer LSTM over the time axis, gate order [f i g o]:
//   f = sigma(Wf.[h,x]+bf), i = sigma(...), g = tanh(...), o = sigma(...)
//   c_t = f.c_{t-1} + i.g ; h_t = o.tanh(c_t)
// Weights are split as wx[I x 4H], wh[H x 4H], b[4H]; the input transform for
// all steps is one GEMM up front.
template <typename T>
void lstm_forward(const T* x, size_t batch, size_t steps, size_t input, size_t hidden,
                  const T* wx, const T* wh, const T* b, const T* h0, const T* c0,
                  LstmCache<T>& cache) {
  size_t h4 = 4 * hidden;
  cache.batch = batch;
  cache.steps = steps;
  cache.input = input;
  cache.hidden = hidden;
  cache.x = x;
  cache.gates.resize(batch * steps * h4);
  cache.cell.resize(batch * steps * hidden);
  cache.tanh_cell.resize(batch * steps * hidden);
  cache.hidden_states.resize(batch * steps * hidden);
  cache.h0.assign(h0, h0 + batch * hidden);
  cache.c0.assign(c0, c0 + batch * hidden);

  // xg[(b*steps + t) x 4H] = x * wx
  std::vector<T> xg(batch * steps * h4);
  matmul(x, wx, xg.data(), batch * steps, input, h4);

  std::vector<T> h_prev(cache.h0);
  std::vector<T> c_prev(cache.c0);
  std::vector<T> z(batch * h4);

  for (size_t t = 0; t < steps; ++t) {
    matmul(h_prev.data(), wh, z.data(), batch, hidden, h4);
    for (size_t bi = 0; bi < batch; ++bi) {
      const T* xgrow = xg.data() + (bi * steps + t) * h4;
      T* zrow = z.data() + bi * h4;
      T* grow = cache.gates.data() + (bi * steps + t) * h4;
      T* crow = cache.cell.data() + (bi * steps + t) * hidden;
      T* tcrow = cache.tanh_cell.data() + (bi * steps + t) * hidden;
      T* hrow = cache.hidden_states.data() + (bi * steps + t) * hidden;
      const T* cprow = c_prev.data() + bi * hidden;
      for (size_t j = 0; j < hidden; ++j) {
        T zf = zrow[j] + xgrow[j] + b[j];
        T zi = zrow[hidden + j] + xgrow[hidden + j] + b[hidden + j];
        T zg = zrow[2 * hidden + j] + xgrow[2 * hidden + j] + b[2 * hidden + j];
        T zo = zrow[3 * hidden + j] + xgrow[3 * hidden + j] + b[3 * hidden + j];
        T f = sigmoid(zf), i = sigmoid(zi), g = std::tanh(zg), o = sigmoid(zo);
        grow[j] = f;
        grow[hidden + j] = i;
        grow[2 * hidden + j] = g;
        grow[3 * hidden + j] = o;
        T c = f * cprow[j] + i * g;
        crow[j] = c;
        T tc = std::tanh(c);
        tcrow[j] = tc;
        hrow[j] = o * tc;
      }
    }
    for (size_t bi = 0; bi < batch; ++bi) {
      std::copy_n(cache.hidden_states.data() + (bi * steps + t) * hidden, hidden,
                  h_prev.data() + bi * hidden);
      std::copy_n(cache.cell.data() + (bi * steps + t) * hidden, hidden,
                  c_prev.data() + bi * hidden);
    }
  }
}

// BPTT. dh_all is B x Tsteps x H (zero-filled except where the loss touches
// the hidden sequence). Accumulates dwx/dwh/db; dx optional.
template <typename T>
void lstm_backward(const LstmCache<T>& cache, const T* wx, const T* wh, const T* dh_all,
                   T* dwx, T* dwh, T* db, T* dx) {
  size_t batch = cache.batch, steps = cache.steps, input = cache.input, hidden = cache.hidden;
  size_t h4 = 4 * hidden;

  std::vector<T> dz_all(batch * steps * h4);
  std::vector<T> dh_next(batch * hidden, T(0));
  std::vector<T> dc_next(batch * hidden, T(0));
  std::vector<T> dz(batch * h4);
  std::vector<T> hprev_t(batch * hidden);

  for (size_t t = steps; t-- > 0;) {
    for (size_t bi = 0; bi < batch; ++bi) {
      const T* grow = cache.gates.data() + (bi * steps + t) * h4;
      const T* tcrow = cache.tanh_cell.data() + (bi * steps + t) * hidden;
      const T* cprev = t == 0 ? cache.c0.data() + bi * hidden
                              : cache.cell.data() + (bi * steps + (t - 1)) * hidden;
      T* dzrow = dz.data() + bi * h4;
      for (size_t j = 0; j < hidden; ++j) {
        T dh = dh_all[(bi * steps + t) * hidden + j] + dh_next[bi * hidden + j];
        T f = grow[j], i = grow[hidden + j], g = grow[2 * hidden + j], o = grow[3 * hidden + j];
        T tc = tcrow[j];
        T dov = dh * tc;
        T dc = dc_next[bi * hidden + j] + dh * o * (T(1) - tc * tc);
        T dfv = dc * cprev[j];
        T div = dc * g;
        T dgv = dc * i;
        dc_next[bi * hidden + j] = dc * f;
        dzrow[j] = dfv * f * (T(1) - f);
        dzrow[hidden + j] = div * i * (T(1) - i);
        dzrow[2 * hidden + j] = dgv * (T(1) - g * g);
        dzrow[3 * hidden + j] = dov * o * (T(1) - o);
      }
      std::copy_n(dzrow, h4, dz_all.data() + (bi * steps + t) * h4);
      const T* hp = t == 0 ? cache.h0.data() + bi * hidden
                           : cache.hidden_states.data() + (bi * steps + (t - 1)) * hidden;
      std::copy_n(hp, hidden, hprev_t.data() + bi * hidden);
    }
    // dh_{t-1} = dz * wh^T ; dwh += h_{t-1}^T * dz
    matmul_bt(dz.data(), wh, dh_next.data(), batch, h4, hidden);
    matmul_at(hprev_t.data(), dz.data(), dwh, batch, hidden, h4, /*accumulate=*/true);
    for (size_t bi = 0; bi < batch; ++bi)
      for (size_t j = 0; j < h4; ++j) db[j] += dz[bi * h4 + j];
  }

  // dwx += x^T * dz_all over all (b, t) rows at once.
  matmul_at(cache.x, dz_all.data(), dwx, batch * steps, input, h4, /*accumulate=*/true);
  if (dx) matmul_bt(dz_all.data(), wx, dx, batch * steps, h4, input);
}

// One recurrence step (batch 1 x arbitrary): used to check that a length-T
// forward equals T chained steps.
template <typename T>
void lstm_step(const T* x, size_t batch, size_t input, size_t hidden, const T* wx, const T* wh,
               const T* b, const T* h_prev, const T* c_prev, T* h_out, T* c_out) {
  LstmCache<T> cache;
  lstm_forward(x, batch, /*steps=*/1, input, hidden, wx, wh, b, h_prev, c_prev, cache);
  std::copy_n(cache.hidden_states.data(), batch * hidden, h_out);
  std::copy_n(cache.cell.data(), batch * hidden, c_out);
}

// ------------------------------------------------- softmax cross-entropy

template <typename T>
struct SoftmaxCrossEntropyResult {
  double loss = 0.0;
  std::vector<T> probs;        // B x M
  std::vector<T> grad_logits;  // (probs - onehot) / B
};

// Row-wise softmax with max subtraction; loss averaged over the batch.
template <typename T>
SoftmaxCrossEntropyResult<T> softmax_cross_entropy(const T* logits, const T* one_hot,
                                                   size_t batch, size_t classes) {
  SoftmaxCrossEntropyResult<T> res;
  res.probs.resize(batch * classes);
  res.grad_logits.resize(batch * classes);
  double loss = 0.0;
  for (size_t b = 0; b < batch; ++b) {
    const T* row = logits + b * classes;
    const T* yrow = one_hot + b * classes;
    size_t ones = 0;
    for (size_t j = 0; j < classes; ++j) {
      if (yrow[j] != T(0) && yrow[j] != T(1))
        fail(Errc::invalid_one_hot, "label entries must be 0 or 1");
      if (yrow[j] == T(1)) ++ones;
    }
    if (ones != 1) fail(Errc::invalid_one_hot, "label row must have exactly one 1");

    T mx = row[0];
    for (size_t j = 1; j < classes; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (size_t j = 0; j < classes; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    for (size_t j = 0; j < classes; ++j) {
      double p = std::exp(static_cast<double>(row[j] - mx)) / denom;
      res.probs[b * classes + j] = T(p);
      if (yrow[j] == T(1)) loss -= std::log(p);
      res.grad_logits[b * classes + j] =
          T((p - static_cast<double>(yrow[j])) / static_cast<double>(batch));
    }
  }
  res.loss = loss / static_cast<double>(batch);
  return res;
}

template <typename T>
std::vector<double> softmax_row(const T* logits, size_t classes) {
  double mx = static_cast<double>(logits[0]);
  for (size_t j = 1; j < classes; ++j) mx = std::max(mx, static_cast<double>(logits[j]));
  std::vector<double> p(classes);
  double denom = 0.0;
  for (size_t j = 0; j < classes; ++j) {
    p[j] = std::exp(static_cast<double>(logits[j]) - mx);
    denom += p[j];
  }
  for (double& v : p) v /= denom;
  return p;
}

}  // namespace csi2dig
