#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "causalepp/checkpoint.hpp"
#include "causalepp/error.hpp"
#include "causalepp/kvfile.hpp"

using namespace causalepp;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "causalepp_test_checkpoint") {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

bool same(const ModelParams& a, const ModelParams& b) {
  return a.kind == b.kind && a.num_layers == b.num_layers && a.user_emb == b.user_emb && a.item_emb == b.item_emb &&
         a.quality == b.quality && a.mlp_w1 == b.mlp_w1 && a.mlp_b1 == b.mlp_b1 && a.mlp_w2 == b.mlp_w2 &&
         a.mlp_b2 == b.mlp_b2;
}

}  // namespace

TEST_CASE("checkpoints round-trip exactly") {
  TempDir dir;
  auto params = init_params(4, 6, 5, BackboneKind::kLightGCN, 2, 99);
  params.quality(3) = -0.125;
  params.mlp_b1(1) = 1e-300;
  params.mlp_b2 = 0.1;
  const auto file = dir.path / "model.ckpt";
  save_checkpoint(file, params, {{"alpha", "0.5"}, {"mode", "causalepp"}});

  const auto loaded = load_checkpoint(file);
  CHECK(same(loaded.params, params));
  CHECK(loaded.meta.at("alpha") == "0.5");
  CHECK(loaded.meta.at("backbone_kind") == "lightgcn");
  CHECK(loaded.meta.at("dim") == "5");
  CHECK(loaded.meta.at("num_layers") == "2");
  CHECK(std::filesystem::exists(metadata_path(file)));

  // 56-byte header plus the f64 payload.
  const auto expected_bytes = 56 + 8 * (4 * 5 + 6 * 5 + 6 + 5 * 2 + 2 + 2 + 1);
  CHECK(std::filesystem::file_size(file) == static_cast<std::uintmax_t>(expected_bytes));
}

TEST_CASE("saving twice gives identical bytes") {
  TempDir dir;
  const auto params = init_params(3, 3, 4, BackboneKind::kMF, 0, 1);
  save_checkpoint(dir.path / "a.ckpt", params, {{"seed", "1"}});
  save_checkpoint(dir.path / "b.ckpt", params, {{"seed", "1"}});
  CHECK(read_text_file(dir.path / "a.ckpt") == read_text_file(dir.path / "b.ckpt"));
  CHECK(read_text_file(dir.path / "a.ckpt.meta") == read_text_file(dir.path / "b.ckpt.meta"));
}

TEST_CASE("corrupt checkpoints are rejected") {
  TempDir dir;
  const auto params = init_params(2, 2, 2, BackboneKind::kMF, 0, 1);
  const auto file = dir.path / "m.ckpt";
  save_checkpoint(file, params, {});
  const std::string good = read_text_file(file);

  SUBCASE("missing file") { CHECK_THROWS_AS(load_checkpoint(dir.path / "nope.ckpt"), IoError); }
  SUBCASE("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    write_text_file(file, bad);
    CHECK_THROWS_AS(load_checkpoint(file), ParseError);
  }
  SUBCASE("truncated payload") {
    write_text_file(file, good.substr(0, good.size() - 3));
    CHECK_THROWS_AS(load_checkpoint(file), ParseError);
  }
  SUBCASE("trailing bytes") {
    write_text_file(file, good + "zz");
    CHECK_THROWS_AS(load_checkpoint(file), ParseError);
  }
  SUBCASE("unknown version") {
    std::string bad = good;
    bad[8] = 7;
    write_text_file(file, bad);
    CHECK_THROWS_AS(load_checkpoint(file), ParseError);
  }
}
