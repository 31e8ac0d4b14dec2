#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "causalepp/corpus.hpp"
#include "causalepp/inference.hpp"

namespace causalepp {

// Per-user held-out items, indexed by user id.
using TruthSets = std::vector<std::vector<ItemId>>;

// Groups events by user (duplicates kept, order preserved).
TruthSets group_by_user(std::span<const Interaction> events, int num_users);

// Users with at least one truth item, ascending.
std::vector<UserId> users_with_truth(const TruthSets& truth);

struct MetricsReport {
  double recall = 0.0;
  double precision = 0.0;
  double ndcg = 0.0;
  int num_users_evaluated = 0;
  int k = 0;
};

// Binary-relevance Recall/Precision/NDCG@k averaged over users with
// nonempty truth. Only the first k entries of each ranking count.
MetricsReport metrics(std::span<const RankingResult> rankings, const TruthSets& truth, int k);

struct BiasReport {
  std::vector<ItemId> popular_items;  // sorted ascending
  double popular_ratio_recommended = 0.0;
  double popular_ratio_ground_truth = 0.0;
  std::int64_t recommended_slots = 0;
  std::int64_t truth_interactions = 0;
};

// The `fraction` most-interacted items (ties by id), rounded up.
std::vector<ItemId> popular_item_set(std::span<const std::int64_t> global_counts, double fraction = 0.2);

// Share of recommended slots, and of held-out interactions, that land on the
// popular set.
BiasReport bias_report(std::span<const RankingResult> rankings, std::span<const std::int64_t> global_counts,
                       const TruthSets& truth, double fraction = 0.2);

// Rank correlation with average ranks for ties; 0 when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace causalepp
