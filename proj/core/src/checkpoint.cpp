#include "causalepp/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "causalepp/error.hpp"
#include "causalepp/kvfile.hpp"

namespace causalepp {

namespace {

constexpr std::size_t kHeaderBytes = 56;

template <typename T>
void put_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.append(bytes.data(), bytes.size());
}

class Reader {
 public:
  Reader(const std::string& data, std::string source) : data_(data), source_(std::move(source)) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > data_.size()) throw ParseError(source_, 0, "checkpoint truncated at byte " + std::to_string(pos_));
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), data_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
  }

  void expect_end() const {
    if (pos_ != data_.size()) throw ParseError(source_, 0, "trailing bytes after checkpoint payload");
  }

  const std::string& source() const { return source_; }

 private:
  const std::string& data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

std::filesystem::path metadata_path(const std::filesystem::path& checkpoint) {
  auto meta = checkpoint;
  meta += ".meta";
  return meta;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const Metadata& meta) {
  std::string out;
  out.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.kind));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.num_layers));
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.num_users()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.num_items()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.dim()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(params.hidden()));
  for (const auto block : params.blocks()) {
    for (double v : block) put_le<double>(out, v);
  }
  write_text_file(path, out);

  KeyValues sidecar(meta.begin(), meta.end());
  sidecar["backbone_kind"] = std::string(to_string(params.kind));
  sidecar["dim"] = std::to_string(params.dim());
  sidecar["num_layers"] = std::to_string(params.num_layers);
  write_key_values(metadata_path(path), sidecar, "causalepp checkpoint metadata");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  Reader in(data, path.string());
  if (data.size() < sizeof(kCheckpointMagic) ||
      std::memcmp(data.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw ParseError(path.string(), 0, "not a causalepp checkpoint (bad magic)");
  }
  for (std::size_t k = 0; k < sizeof(kCheckpointMagic); ++k) in.get<char>();
  const auto version = in.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError(path.string(), 0, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto kind = in.get<std::uint32_t>();
  if (kind > 1) throw ParseError(path.string(), 0, "unknown backbone kind " + std::to_string(kind));
  const auto layers = in.get<std::uint32_t>();
  in.get<std::uint32_t>();
  const auto users = in.get<std::uint64_t>();
  const auto items = in.get<std::uint64_t>();
  const auto dim = in.get<std::uint64_t>();
  const auto hidden = in.get<std::uint64_t>();
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 31;
  if (users == 0 || items == 0 || dim == 0 || hidden == 0 || users > kLimit || items > kLimit || dim > kLimit ||
      hidden > kLimit) {
    throw ParseError(path.string(), 0, "implausible checkpoint shape");
  }
  const std::uint64_t values = users * dim + items * dim + items + dim * hidden + 2 * hidden + 1;
  if (data.size() < kHeaderBytes || (data.size() - kHeaderBytes) / sizeof(double) < values) {
    throw ParseError(path.string(), 0, "checkpoint truncated: payload shorter than its header declares");
  }

  Checkpoint ckpt;
  ModelParams& p = ckpt.params;
  p.kind = static_cast<BackboneKind>(kind);
  p.num_layers = static_cast<int>(layers);
  const auto r = [](std::uint64_t v) { return static_cast<Eigen::Index>(v); };
  p.user_emb.resize(r(users), r(dim));
  p.item_emb.resize(r(items), r(dim));
  p.quality.resize(r(items));
  p.mlp_w1.resize(r(dim), r(hidden));
  p.mlp_b1.resize(r(hidden));
  p.mlp_w2.resize(r(hidden));
  for (auto block : p.blocks()) {
    for (double& v : block) v = in.get<double>();
  }
  in.expect_end();

  const auto meta_file = metadata_path(path);
  if (std::filesystem::exists(meta_file)) {
    const auto kv = read_key_values(meta_file);
    ckpt.meta.insert(kv.begin(), kv.end());
  }
  return ckpt;
}

}  // namespace causalepp
