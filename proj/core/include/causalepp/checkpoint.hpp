#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "causalepp/backbone.hpp"

namespace causalepp {

// Binary layout, all integers and floats little-endian:
//
//   offset  size  field
//   0       8     magic "CEPPCKPT"
//   8       4     u32 format version (1)
//   12      4     u32 backbone kind (0 = MF, 1 = LightGCN)
//   16      4     u32 num_layers
//   20      4     u32 reserved (0)
//   24      8     u64 num_users
//   32      8     u64 num_items
//   40      8     u64 dim
//   48      8     u64 hidden
//   56      ...   f64 arrays in order: user_emb (row-major), item_emb,
//                 quality, mlp_w1 (dim x hidden, row-major), mlp_b1,
//                 mlp_w2, mlp_b2
//
// A text sidecar "<path>.meta" holds `key = value` lines (sorted by key)
// describing how the parameters were trained.
inline constexpr char kCheckpointMagic[8] = {'C', 'E', 'P', 'P', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using Metadata = std::map<std::string, std::string>;

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const Metadata& meta);

struct Checkpoint {
  ModelParams params;
  Metadata meta;
};

// Throws IoError on missing files and ParseError on a corrupt layout.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::filesystem::path metadata_path(const std::filesystem::path& checkpoint);

}  // namespace causalepp
