#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "csi2dig/errors.hpp"

namespace csi2dig {

// Dense row-major n-d array. Training runs in float, gradient checking and
// analysis in double; everything downstream is templated on the scalar.
template <typename T>
struct Tensor {
  std::vector<size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> s) : shape(std::move(s)) {
    data.assign(element_count(shape), T(0));
  }
  Tensor(std::vector<size_t> s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != element_count(shape)) fail(Errc::shape_mismatch, "tensor data/shape mismatch");
  }

  static size_t element_count(const std::vector<size_t>& s) {
    size_t n = 1;
    for (size_t d : s) n *= d;
    return n;
  }

  size_t size() const { return data.size(); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

// C[M x N] (+)= A[M x K] * B[K x N]. i-k-j order keeps the inner loop
// contiguous; parallelism is over output rows, so each element is always
// accumulated in the same sequential order regardless of thread count.
template <typename T>
void matmul(const T* a, const T* b, T* c, size_t m, size_t k, size_t n, bool accumulate = false) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
    T* crow = c + i * n;
    if (!accumulate)
      for (size_t j = 0; j < n; ++j) crow[j] = T(0);
    const T* arow = a + i * k;
    for (size_t p = 0; p < k; ++p) {
      T av = arow[p];
      const T* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[K x N] (+)= A^T[K x M] * B[M x N]  (A is M x K)
template <typename T>
void matmul_at(const T* a, const T* b, T* c, size_t m, size_t k, size_t n,
               bool accumulate = false) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(k); ++i) {
    T* crow = c + i * n;
    if (!accumulate)
      for (size_t j = 0; j < n; ++j) crow[j] = T(0);
    for (size_t p = 0; p < m; ++p) {
      T av = a[p * k + i];
      const T* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[M x K] (+)= A[M x N] * B^T[N x K]  (B is K x N)
template <typename T>
void matmul_bt(const T* a, const T* b, T* c, size_t m, size_t n, size_t k,
               bool accumulate = false) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
    T* crow = c + i * k;
    const T* arow = a + i * n;
    for (size_t j = 0; j < k; ++j) {
      T sum = accumulate ? crow[j] : T(0);
      const T* brow = b + j * n;
      for (size_t p = 0; p < n; ++p) sum += arow[p] * brow[p];
      crow[j] = sum;
    }
  }
}

// Named trainable parameters with co-indexed gradients and Adam moments.
// std::map keeps iteration order (and thus checkpoints and updates)
// deterministic.
template <typename T>
struct ParamSet {
  struct Slot {
    Tensor<T> value;
    Tensor<T> grad;
    Tensor<T> m;
    Tensor<T> v;
  };

  std::map<std::string, Slot> slots;
  int64_t step = 0;

  Tensor<T>& add(const std::string& name, Tensor<T> init) {
    if (slots.count(name)) fail(Errc::bad_config, "duplicate parameter " + name);
    Slot s;
    s.grad = Tensor<T>(init.shape);
    s.m = Tensor<T>(init.shape);
    s.v = Tensor<T>(init.shape);
    s.value = std::move(init);
    return slots.emplace(name, std::move(s)).first->second.value;
  }

  Tensor<T>& value(const std::string& name) {
    auto it = slots.find(name);
    if (it == slots.end()) fail(Errc::bad_config, "unknown parameter " + name);
    return it->second.value;
  }
  const Tensor<T>& value(const std::string& name) const {
    auto it = slots.find(name);
    if (it == slots.end()) fail(Errc::bad_config, "unknown parameter " + name);
    return it->second.value;
  }
  Tensor<T>& grad(const std::string& name) {
    auto it = slots.find(name);
    if (it == slots.end()) fail(Errc::bad_config, "unknown parameter " + name);
    return it->second.grad;
  }

  void zero_grad() {
    for (auto& [name, slot] : slots) slot.grad.fill(T(0));
  }

  size_t parameter_count() const {
    size_t n = 0;
    for (const auto& [name, slot] : slots) n += slot.value.size();
    return n;
  }
};

}  // namespace csi2dig
