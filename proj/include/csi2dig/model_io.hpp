#pragma once

#include <map>
#include <string>
#include <vector>

#include "csi2dig/checkpoint.hpp"
#include "csi2dig/errors.hpp"
#include "csi2dig/tensor.hpp"

namespace csi2dig {

template <typename T>
NamedTensor named_tensor_from(const std::string& name, const Tensor<T>& t) {
  NamedTensor nt;
  nt.name = name;
  nt.shape.reserve(t.shape.size());
  for (size_t d : t.shape) nt.shape.push_back(static_cast<uint32_t>(d));
  nt.data.reserve(t.size());
  for (T v : t.data) nt.data.push_back(static_cast<float>(v));
  return nt;
}

// Parameters first (sorted by name via ParamSet's map), then model state
// tensors such as batchnorm running statistics.
template <typename T>
std::vector<NamedTensor> tensors_from_model(const ParamSet<T>& params,
                                            const std::map<std::string, Tensor<T>>& state = {}) {
  std::vector<NamedTensor> out;
  for (const auto& [name, slot] : params.slots) out.push_back(named_tensor_from(name, slot.value));
  for (const auto& [name, t] : state) out.push_back(named_tensor_from(name, t));
  return out;
}

template <typename T>
void load_tensor_into(const NamedTensor& src, Tensor<T>& dst) {
  if (src.data.size() != dst.size())
    fail(Errc::shape_mismatch, "checkpoint tensor " + src.name + " has " +
                                   std::to_string(src.data.size()) + " elements, expected " +
                                   std::to_string(dst.size()));
  for (size_t i = 0; i < src.data.size(); ++i) dst.data[i] = static_cast<T>(src.data[i]);
}

// Overwrites an initialized ParamSet/state from a checkpoint, matching by
// name; every slot must be present.
template <typename T>
void load_model_tensors(const ModelCheckpoint& ckpt, ParamSet<T>& params,
                        std::map<std::string, Tensor<T>>* state = nullptr) {
  for (auto& [name, slot] : params.slots) {
    const NamedTensor* t = ckpt.find(name);
    if (!t) fail(Errc::corrupt_payload, "checkpoint missing tensor " + name);
    load_tensor_into(*t, slot.value);
  }
  if (state) {
    for (auto& [name, tensor] : *state) {
      const NamedTensor* t = ckpt.find(name);
      if (!t) fail(Errc::corrupt_payload, "checkpoint missing state tensor " + name);
      load_tensor_into(*t, tensor);
    }
  }
}

}  // namespace csi2dig
