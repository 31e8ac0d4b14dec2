#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace causalepp {

using UserId = std::int32_t;
using ItemId = std::int32_t;
using Timestamp = std::int64_t;

// One (user, item, timestamp) click event. Ids are dense after remapping.
struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  Timestamp timestamp = 0;
  std::optional<double> rating;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// Uniform binning of timestamps into discrete steps. The grid spans the
// training range; anything later is clamped onto the last step.
struct TimeGrid {
  Timestamp origin = 0;
  double step_duration = 1.0;  // seconds per step
  int num_steps = 100;
  int last_train_step = 0;

  // Builds a grid whose steps evenly cover [first, last].
  static TimeGrid over_range(Timestamp first, Timestamp last, int num_steps);

  // floor((ts - origin) / step_duration), clamped to [0, num_steps - 1].
  int step_of(Timestamp ts) const;

  // step_of() further clamped to last_train_step; used for statistic lookups.
  int lookup_step(Timestamp ts) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

struct SplitDataset {
  std::vector<Interaction> train;
  std::vector<Interaction> validation;
  std::vector<Interaction> test;
  TimeGrid grid;
  int num_users = 0;
  int num_items = 0;
};

// Result of reading an interaction log: the remapped events plus the
// original identifiers, indexed by dense id.
struct Corpus {
  std::vector<Interaction> interactions;
  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;

  int num_users() const { return static_cast<int>(user_ids.size()); }
  int num_items() const { return static_cast<int>(item_ids.size()); }
};

// Parses `user_id, item_id, rating, timestamp` rows (tab or comma separated,
// header auto-detected), applies iterative k-core filtering, remaps ids to
// dense ranges in order of first appearance and sorts by timestamp (stable).
// Throws ParseError on malformed rows and EmptyDatasetError when filtering
// leaves nothing.
Corpus load_interactions(const std::filesystem::path& path, int k_core);

// Same as load_interactions() but over in-memory text; `source` names the
// input in error messages.
Corpus parse_interactions(const std::string& text, int k_core,
                          const std::string& source = "<memory>");

// Repeatedly drops users and items with fewer than k interactions until the
// remaining graph is stable. Ids are left untouched.
std::vector<Interaction> k_core_filter(std::vector<Interaction> interactions, int k);

// First floor(n (parts-1) / parts) events go to train; the remainder is cut
// into validation (gets the odd one) then test. The grid covers the training
// range only.
SplitDataset chronological_split(std::span<const Interaction> interactions,
                                 int num_parts, int num_steps,
                                 int num_users, int num_items);

// Overload that infers the id ranges from the data.
SplitDataset chronological_split(std::span<const Interaction> interactions,
                                 int num_parts, int num_steps);

}  // namespace causalepp
