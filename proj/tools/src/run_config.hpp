#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "causalepp/forecast.hpp"
#include "causalepp/inference.hpp"
#include "causalepp/kvfile.hpp"
#include "causalepp/synth.hpp"
#include "causalepp/training.hpp"

namespace causalepp::cli {

// Environment variable naming the default configuration file.
inline constexpr const char* kConfigEnv = "CAUSALEPP_CONFIG";

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
  bool is_flag = false;  // boolean switch on the command line
};

// Every recognised configuration key with its default.
const std::vector<ConfigKey>& config_keys();

struct RunConfig {
  // corpus
  int k_core = 5;
  int num_parts = 10;
  int num_steps = 100;
  // popstats: window given in steps if window_steps > 0, else in months
  double window_months = 6.0;
  int window_steps = 0;
  double quantile = 0.2;
  // forecast
  double ma_fraction = 0.1;
  int delta_item = 5;
  int delta_user = 10;
  SlopeEstimator slope = SlopeEstimator::kBackwardDifference;
  // training
  TrainConfig train;
  // inference / evaluation
  int k = 20;
  Intervention intervention{InterventionMode::kIntervened, 0.0, 0.0};
  // synthetic generator
  SynthConfig synth;

  std::uint64_t seed() const { return train.seed; }
};

// defaults <- file <- overrides. Unknown keys and malformed values throw
// InvalidArgument naming the key; every value is range-checked.
RunConfig resolve_config(const KeyValues& file_values, const KeyValues& overrides);

// The merged key/value view (defaults filled in) that resolve_config reads.
KeyValues merged_values(const KeyValues& file_values, const KeyValues& overrides);

// Average Gregorian month.
inline constexpr double kSecondsPerMonth = 2'629'746.0;

}  // namespace causalepp::cli
