#include "ntrocr/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "ntrocr/errors.hpp"
#include "ntrocr/io.hpp"

namespace ntrocr {

namespace {

constexpr char kMagic[] = "NTRC1";
constexpr size_t kMagicLen = 5;

std::array<uint32_t, 256> make_crc_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    }
    table[i] = c;
  }
  return table;
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_string(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  Reader(const uint8_t* data, size_t n) : data_(data), n_(n) {}

  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(data_[pos_]) |
                 static_cast<uint32_t>(data_[pos_ + 1]) << 8 |
                 static_cast<uint32_t>(data_[pos_ + 2]) << 16 |
                 static_cast<uint32_t>(data_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string str() {
    uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }

  bool done() const { return pos_ == n_; }

 private:
  void need(size_t k) {
    if (n_ - pos_ < k) throw ValidationError("checkpoint: truncated");
  }

  const uint8_t* data_;
  size_t n_;
  size_t pos_ = 0;
};

}  // namespace

uint32_t crc32_ieee(const uint8_t* data, size_t n) {
  static const std::array<uint32_t, 256> table = make_crc_table();
  uint32_t crc = 0xFFFFFFFFu;
  for (size_t i = 0; i < n; ++i) {
    crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

uint32_t crc32_ieee(const std::string& bytes) {
  return crc32_ieee(reinterpret_cast<const uint8_t*>(bytes.data()),
                    bytes.size());
}

std::string encode_checkpoint(const RunConfig& config, const Vocab& vocab,
                              const ModelParams& params) {
  std::string payload;
  put_string(payload, serialize_config(config));

  put_u32(payload, static_cast<uint32_t>(vocab.id_to_cluster.size()));
  for (const std::string& cluster : vocab.id_to_cluster) {
    put_string(payload, cluster);
  }

  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for_each_param(params, [&tensors](const std::string& name, const Tensor& t) {
    tensors.emplace_back(name, &t);
  });
  put_u32(payload, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put_string(payload, name);
    put_u32(payload, static_cast<uint32_t>(t->shape.size()));
    for (int d : t->shape) put_u32(payload, static_cast<uint32_t>(d));
    for (float v : t->data) put_u32(payload, std::bit_cast<uint32_t>(v));
  }

  std::string out(kMagic, kMagicLen);
  out += payload;
  put_u32(out, crc32_ieee(payload));
  return out;
}

CheckpointData decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < kMagicLen + 4) {
    throw ValidationError("checkpoint: truncated");
  }
  if (bytes.compare(0, 4, "NTRC") != 0) {
    throw ValidationError("checkpoint: bad magic");
  }
  if (bytes.compare(0, kMagicLen, kMagic) != 0) {
    throw ValidationError("checkpoint: unsupported version '" +
                          bytes.substr(4, 1) + "'");
  }

  size_t payload_len = bytes.size() - kMagicLen - 4;
  const uint8_t* payload =
      reinterpret_cast<const uint8_t*>(bytes.data()) + kMagicLen;
  uint32_t stored = 0;
  std::memcpy(&stored, bytes.data() + kMagicLen + payload_len, 4);
  if (crc32_ieee(payload, payload_len) != stored) {
    throw ValidationError("checkpoint: CRC mismatch");
  }

  Reader r(payload, payload_len);
  CheckpointData ckpt;
  ckpt.config = parse_config(r.str());

  uint32_t vocab_count = r.u32();
  if (vocab_count < 4) {
    throw ValidationError("checkpoint: vocabulary lacks the special tokens");
  }
  ckpt.vocab.id_to_cluster.reserve(vocab_count);
  for (uint32_t i = 0; i < vocab_count; ++i) {
    ckpt.vocab.id_to_cluster.push_back(r.str());
  }
  for (uint32_t i = 4; i < vocab_count; ++i) {
    ckpt.vocab.cluster_to_id[ckpt.vocab.id_to_cluster[i]] =
        static_cast<int>(i);
  }

  ModelConfig mc = model_config(ckpt.config, static_cast<int>(vocab_count));
  validate_config(mc);
  ckpt.params = zeros_like_params(mc);

  std::map<std::string, Tensor*> slots;
  for_each_param(ckpt.params, [&slots](const std::string& name, Tensor& t) {
    slots[name] = &t;
  });

  uint32_t tensor_count = r.u32();
  if (tensor_count != slots.size()) {
    throw ValidationError("checkpoint: expected " +
                          std::to_string(slots.size()) + " tensors, found " +
                          std::to_string(tensor_count));
  }
  std::set<std::string> filled;
  for (uint32_t i = 0; i < tensor_count; ++i) {
    std::string name = r.str();
    auto it = slots.find(name);
    if (it == slots.end()) {
      throw ValidationError("checkpoint: unexpected tensor '" + name + "'");
    }
    if (!filled.insert(name).second) {
      throw ValidationError("checkpoint: duplicate tensor '" + name + "'");
    }
    Tensor& t = *it->second;
    uint32_t rank = r.u32();
    std::vector<int> shape(rank);
    for (uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<int>(r.u32());
    }
    if (shape != t.shape) {
      throw ValidationError("checkpoint: tensor '" + name +
                            "' shape mismatch");
    }
    for (float& v : t.data) v = r.f32();
  }
  if (!r.done()) {
    throw ValidationError("checkpoint: trailing bytes after tensor data");
  }
  return ckpt;
}

void save_checkpoint(const std::string& path, const RunConfig& config,
                     const Vocab& vocab, const ModelParams& params) {
  write_file(path, encode_checkpoint(config, vocab, params));
}

CheckpointData load_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace ntrocr
