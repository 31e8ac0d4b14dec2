#pragma once

#include <cstdint>
#include <vector>

#include "causalepp/corpus.hpp"

namespace causalepp {

// Settings for the conformity-driven click simulator.
//
// Each item has a true quality drawn from a power law over a random ranking.
// A user's intrinsic preference for an item is quality times a latent taste
// match. At every step the simulator recomputes the local popularity of all
// items over its own recent output, and each click is drawn from
//   (1 - w_u^t) * preference(u, .) / sum + w_u^t * popularity^t
// where w_u^t is the user's conformity weight at that step.
struct SynthConfig {
  int num_users = 200;
  int num_items = 300;
  int num_steps = 100;              // simulator steps, one timestamp bucket each
  int interactions_per_step = 200;
  double long_tail_exponent = 1.5;
  int latent_dim = 8;
  double taste_sharpness = 3.0;

  // Conformity schedule: w_u^t = clamp(weight + spread * z_u + drift * (t / (steps - 1) - 0.5)).
  double conformity_weight = 0.6;
  double conformity_spread = 0.0;
  double conformity_drift = 0.0;

  int popularity_window = 5;  // simulator steps feeding its local popularity

  // Trend injection: `trend_items` items drawn from the lower half of the
  // quality ranking have their appeal multiplied by
  // 1 + trend_gain * progress over the last `trend_steps` steps.
  int trend_items = 0;
  int trend_steps = 20;
  double trend_gain = 0.0;

  Timestamp start_time = 1'600'000'000;
  Timestamp step_seconds = 86'400;

  // Split applied to the generated log.
  int num_parts = 10;
  int grid_steps = 100;
};

struct SynthGroundTruth {
  int num_users = 0;
  int num_items = 0;
  int num_steps = 0;
  std::vector<double> preference;         // num_users x num_items, row-major, in [0, 1]
  std::vector<double> conformity_weight;  // num_users x num_steps, row-major, in [0, 1]
  std::vector<double> item_quality_true;  // in [0, 1]
  std::vector<ItemId> trending_items;

  double pref(UserId u, ItemId i) const {
    return preference[static_cast<std::size_t>(u) * static_cast<std::size_t>(num_items) +
                      static_cast<std::size_t>(i)];
  }
  double conformity(UserId u, int step) const {
    return conformity_weight[static_cast<std::size_t>(u) * static_cast<std::size_t>(num_steps) +
                             static_cast<std::size_t>(step)];
  }
};

struct SynthResult {
  std::vector<Interaction> events;  // full log, sorted by timestamp
  SplitDataset split;
  SynthGroundTruth truth;
};

// Deterministic for a given (config, seed). Throws InvalidArgument on empty
// populations or inconsistent settings.
SynthResult generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace causalepp
