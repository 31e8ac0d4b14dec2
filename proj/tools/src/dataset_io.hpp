#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "causalepp/corpus.hpp"
#include "causalepp/kvfile.hpp"
#include "causalepp/synth.hpp"

namespace causalepp::cli {

// A prepared dataset directory:
//
//   train.tsv, validation.tsv, test.tsv   user_id, item_id, rating, timestamp
//                                          (dense ids, header row)
//   manifest.txt                           grid parameters and counts
//   user_ids.tsv, item_ids.tsv             dense id -> original id
struct PreparedData {
  SplitDataset split;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  KeyValues manifest;
};

void write_prepared(const std::filesystem::path& dir, const PreparedData& data);
PreparedData read_prepared(const std::filesystem::path& dir);

// Ground-truth tables of a synthetic corpus, written next to the split.
void write_ground_truth(const std::filesystem::path& dir, const SynthGroundTruth& truth);

std::string format_interactions(const std::vector<Interaction>& xs);

}  // namespace causalepp::cli
