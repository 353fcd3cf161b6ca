#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "ntrocr/config.hpp"
#include "ntrocr/model.hpp"
#include "ntrocr/script.hpp"

namespace ntrocr {

// Reflected CRC-32, polynomial 0xEDB88320 ("123456789" -> 0xCBF43926).
uint32_t crc32_ieee(const uint8_t* data, size_t n);
uint32_t crc32_ieee(const std::string& bytes);

struct CheckpointData {
  RunConfig config;
  Vocab vocab;
  ModelParams params;
};

// Layout: "NTRC1" magic, then a payload of the serialized run config, the
// vocabulary strings in id order, and every parameter tensor (name, shape,
// little-endian float32 data) in visitation order, then a little-endian
// CRC-32 of the payload. Loading verifies magic, CRC, and tensor shapes.
std::string encode_checkpoint(const RunConfig& config, const Vocab& vocab,
                              const ModelParams& params);
CheckpointData decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const RunConfig& config,
                     const Vocab& vocab, const ModelParams& params);
CheckpointData load_checkpoint(const std::string& path);

}  // namespace ntrocr
