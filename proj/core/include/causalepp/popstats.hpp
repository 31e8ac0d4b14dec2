#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "causalepp/corpus.hpp"

namespace causalepp {

// Per-item local popularity p_i^t over the sliding window (t - w, t], plus
// the aggregates derived from it. Series are stored item-major so that one
// item's timeline is contiguous.
struct PopularityTable {
  TimeGrid grid;
  int num_items = 0;
  int window_steps = 1;
  std::vector<double> local;                // num_items x num_steps
  std::vector<std::int64_t> window_total;   // |D| inside the window ending at each step
  std::vector<std::int64_t> global;         // d_i over all training time
  std::vector<double> avg_local;            // mean p_i^t over item i's own interactions

  int num_steps() const { return grid.num_steps; }
  double at(ItemId item, int step) const {
    return local[static_cast<std::size_t>(item) * static_cast<std::size_t>(grid.num_steps) +
                 static_cast<std::size_t>(step)];
  }
  std::span<const double> series(ItemId item) const {
    return {local.data() + static_cast<std::size_t>(item) * static_cast<std::size_t>(grid.num_steps),
            static_cast<std::size_t>(grid.num_steps)};
  }
};

// Evolving personal popularity s_u^t and the per-step high-popularity cutoff.
struct PersonalPopularityTable {
  int num_users = 0;
  int num_steps = 0;
  double quantile = 0.2;
  std::vector<double> personal;       // num_users x num_steps
  std::vector<double> threshold;      // per step; +inf when nothing is popular
  std::vector<std::uint8_t> fallback; // 1 where the user had no window activity

  double at(UserId user, int step) const {
    return personal[static_cast<std::size_t>(user) * static_cast<std::size_t>(num_steps) +
                    static_cast<std::size_t>(step)];
  }
  std::span<const double> series(UserId user) const {
    return {personal.data() + static_cast<std::size_t>(user) * static_cast<std::size_t>(num_steps),
            static_cast<std::size_t>(num_steps)};
  }
};

inline constexpr double kNoPopularItems = std::numeric_limits<double>::infinity();

// Converts a wall-clock window length to a step count, rounded up, at least 1.
int window_steps_for(const TimeGrid& grid, double window_seconds);

// Builds p_i^t, d_i and E_p[p_i]. Empty windows give p_i^t = 0 for all items.
PopularityTable local_popularity(std::span<const Interaction> train, const TimeGrid& grid,
                                 int window_steps, int num_items);

// Nearest-rank cutoff such that a `quantile` fraction of the items with
// nonzero popularity at `step` lie strictly above it. Returns kNoPopularItems
// if every item has zero popularity.
double high_pop_threshold(const PopularityTable& pop, int step, double quantile);

// s_u^t = share of the user's window interactions on items above the step's
// threshold. Users with an empty window fall back to their lifetime share
// (each interaction judged against its own step's threshold), 0 with no history.
PersonalPopularityTable personal_popularity(std::span<const Interaction> train, const PopularityTable& pop,
                                            int window_steps, double quantile, int num_users);

// Mean of p_i^t over the steps of item i's training interactions; 0 for
// items without interactions.
std::vector<double> avg_local_popularity(std::span<const Interaction> train, const PopularityTable& pop);

// Global mean of p_i^t over all training interactions (the literal
// sum_{(., i, t)} p_i^t / |D|). Used to flatten popularity across items.
double overall_avg_local_popularity(std::span<const Interaction> train, const PopularityTable& pop);

struct StatsConfig {
  int window_steps = 1;
  double quantile = 0.2;
};

struct PopularityStats {
  PopularityTable pop;
  PersonalPopularityTable personal;
  double overall_avg_local = 0.0;
};

PopularityStats compute_stats(const SplitDataset& split, const StatsConfig& config);

}  // namespace causalepp
