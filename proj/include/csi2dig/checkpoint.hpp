#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "csi2dig/errors.hpp"

namespace csi2dig {

enum class CheckpointKind { Autoencoder, TsNet };

inline const char* checkpoint_kind_name(CheckpointKind k) {
  return k == CheckpointKind::Autoencoder ? "autoencoder" : "tsnet";
}

struct NamedTensor {
  std::string name;
  std::vector<uint32_t> shape;
  std::vector<float> data;

  size_t element_count() const {
    size_t n = 1;
    for (uint32_t d : shape) n *= d;
    return n;
  }
};

// Serialized model parameters: versioned header, name/shape manifest with raw
// little-endian f32 payloads, then a JSON hyperparameter block. The kind is
// carried in the JSON block under the reserved key "kind".
struct ModelCheckpoint {
  static constexpr uint32_t kFormatVersion = 1;
  static constexpr std::string_view kMagic = "CSI2DIGCKPT";

  CheckpointKind kind = CheckpointKind::TsNet;
  std::map<std::string, std::string> hyperparams;
  std::vector<NamedTensor> tensors;
  uint32_t format_version = kFormatVersion;

  const NamedTensor* find(std::string_view name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  }

  std::string hyper(const std::string& key) const {
    auto it = hyperparams.find(key);
    if (it == hyperparams.end()) fail(Errc::corrupt_payload, "missing hyperparam " + key);
    return it->second;
  }
};

namespace detail {

inline void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct ByteReader {
  std::string_view buf;
  size_t pos = 0;

  void need(size_t n) {
    if (pos + n > buf.size()) fail(Errc::corrupt_payload, "truncated checkpoint");
  }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(buf[pos++]);
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint8_t>(buf[pos]) | (static_cast<uint16_t>(static_cast<uint8_t>(buf[pos + 1])) << 8);
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::string_view bytes(size_t n) {
    need(n);
    std::string_view v = buf.substr(pos, n);
    pos += n;
    return v;
  }
};

}  // namespace detail

inline std::string save_checkpoint(const ModelCheckpoint& ckpt) {
  std::string out(ModelCheckpoint::kMagic);
  detail::put_u32(out, ckpt.format_version);
  detail::put_u32(out, static_cast<uint32_t>(ckpt.tensors.size()));
  for (const NamedTensor& t : ckpt.tensors) {
    if (t.name.size() > UINT16_MAX) fail(Errc::bad_config, "tensor name too long");
    if (t.data.size() != t.element_count())
      fail(Errc::corrupt_payload, "tensor " + t.name + " payload length mismatch");
    detail::put_u16(out, static_cast<uint16_t>(t.name.size()));
    out += t.name;
    out.push_back(static_cast<char>(t.shape.size()));
    for (uint32_t d : t.shape) detail::put_u32(out, d);
    for (float f : t.data) {
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::put_u32(out, bits);
    }
  }
  nlohmann::json j;
  j["kind"] = checkpoint_kind_name(ckpt.kind);
  for (const auto& [k, v] : ckpt.hyperparams) j[k] = v;
  std::string hp = j.dump();
  detail::put_u32(out, static_cast<uint32_t>(hp.size()));
  out += hp;
  return out;
}

inline ModelCheckpoint load_checkpoint(std::string_view bytes) {
  detail::ByteReader r{bytes};
  std::string_view magic = r.bytes(ModelCheckpoint::kMagic.size());
  if (magic != ModelCheckpoint::kMagic) fail(Errc::corrupt_payload, "bad magic");
  ModelCheckpoint ckpt;
  ckpt.format_version = r.u32();
  if (ckpt.format_version != ModelCheckpoint::kFormatVersion)
    fail(Errc::version_mismatch,
         "checkpoint format v" + std::to_string(ckpt.format_version) + ", expected v" +
             std::to_string(ModelCheckpoint::kFormatVersion));
  uint32_t count = r.u32();
  ckpt.tensors.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    uint16_t name_len = r.u16();
    t.name = std::string(r.bytes(name_len));
    uint8_t rank = r.u8();
    t.shape.resize(rank);
    size_t elems = 1;
    for (uint8_t d = 0; d < rank; ++d) {
      t.shape[d] = r.u32();
      elems *= t.shape[d];
    }
    t.data.resize(elems);
    for (size_t e = 0; e < elems; ++e) {
      uint32_t bits = r.u32();
      std::memcpy(&t.data[e], &bits, 4);
    }
    for (const NamedTensor& prev : ckpt.tensors)
      if (prev.name == t.name) fail(Errc::corrupt_payload, "duplicate tensor name " + t.name);
    ckpt.tensors.push_back(std::move(t));
  }
  uint32_t hp_len = r.u32();
  std::string_view hp = r.bytes(hp_len);
  if (r.pos != bytes.size()) fail(Errc::corrupt_payload, "trailing bytes after hyperparams");
  nlohmann::json j = nlohmann::json::parse(hp, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(Errc::corrupt_payload, "bad hyperparameter block");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) fail(Errc::corrupt_payload, "hyperparam values must be strings");
    if (it.key() == "kind") {
      std::string k = it.value().get<std::string>();
      if (k == "autoencoder") ckpt.kind = CheckpointKind::Autoencoder;
      else if (k == "tsnet") ckpt.kind = CheckpointKind::TsNet;
      else fail(Errc::corrupt_payload, "unknown checkpoint kind " + k);
    } else {
      ckpt.hyperparams[it.key()] = it.value().get<std::string>();
    }
  }
  return ckpt;
}

inline void save_checkpoint_file(const std::string& path, const ModelCheckpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::bad_config, "cannot write " + path);
  std::string bytes = save_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline ModelCheckpoint load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::corrupt_payload, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_checkpoint(bytes);
}

}  // namespace csi2dig
