#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "aitpr/training.hpp"
#include "aitpr/vocabulary.hpp"

namespace aitpr {

inline constexpr std::string_view kCheckpointMagic = "AITPRCK1";
inline constexpr int kCheckpointFormatVersion = 1;

// Little-endian binary layout:
//   8-byte magic "AITPRCK1"
//   u64 length + UTF-8 JSON header (format_version, config, epoch, adam_step,
//     array_count, vocab, loss_trace)
//   array_count records: u32 name length, name, u32 rank, u64 dims[rank], f64 data
//     (parameters by name, then "adam.m/<name>" and "adam.v/<name>")
//   RNG record: u64 length + textual std::mt19937_64 state
struct Checkpoint {
  TrainState state;
  Vocabulary vocab;
};

std::string encode_checkpoint(const TrainState& state, const Vocabulary& vocab);
// Throws FormatError on bad magic or truncation, VersionError on an
// unsupported version or missing optimizer moments.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const TrainState& state, const Vocabulary& vocab);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aitpr
