#include "causalepp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "causalepp/error.hpp"

namespace causalepp {

namespace {

// Draws an index from an unnormalized cumulative weight table.
std::size_t draw(const std::vector<double>& cumulative, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, cumulative.back());
  const double r = unit(rng);
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

void build_cumulative(const double* weights, std::size_t n, std::vector<double>& out) {
  out.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += weights[i];
    out[i] = acc;
  }
}

void validate(const SynthConfig& c) {
  if (c.num_users <= 0 || c.num_items <= 0) throw InvalidArgument("synthetic corpus needs users and items");
  if (c.num_steps <= 0 || c.interactions_per_step <= 0) {
    throw InvalidArgument("synthetic corpus needs positive steps and interactions per step");
  }
  if (c.long_tail_exponent < 0.0) throw InvalidArgument("long-tail exponent must be non-negative");
  if (c.latent_dim <= 0) throw InvalidArgument("latent_dim must be positive");
  if (c.popularity_window <= 0) throw InvalidArgument("popularity_window must be positive");
  if (c.trend_items < 0 || c.trend_items > c.num_items) throw InvalidArgument("trend_items out of range");
  if (c.trend_items > 0 && (c.trend_steps <= 0 || c.trend_steps > c.num_steps)) {
    throw InvalidArgument("trend_steps must lie in [1, num_steps]");
  }
  if (c.step_seconds <= 0) throw InvalidArgument("step_seconds must be positive");
}

}  // namespace

SynthResult generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
  validate(config);
  const auto num_users = static_cast<std::size_t>(config.num_users);
  const auto num_items = static_cast<std::size_t>(config.num_items);
  const auto num_steps = static_cast<std::size_t>(config.num_steps);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gaussian(0.0, 1.0);

  SynthResult result;
  SynthGroundTruth& truth = result.truth;
  truth.num_users = config.num_users;
  truth.num_items = config.num_items;
  truth.num_steps = config.num_steps;

  // Power-law quality over a random ranking; the best item has quality 1.
  std::vector<std::size_t> rank(num_items);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::shuffle(rank.begin(), rank.end(), rng);
  truth.item_quality_true.resize(num_items);
  for (std::size_t i = 0; i < num_items; ++i) {
    truth.item_quality_true[i] = std::pow(static_cast<double>(rank[i] + 1), -config.long_tail_exponent);
  }

  const auto dim = static_cast<std::size_t>(config.latent_dim);
  std::vector<double> user_taste(num_users * dim);
  std::vector<double> item_taste(num_items * dim);
  for (auto& v : user_taste) v = gaussian(rng);
  for (auto& v : item_taste) v = gaussian(rng);
  const double scale = config.taste_sharpness / std::sqrt(static_cast<double>(dim));
  truth.preference.resize(num_users * num_items);
  for (std::size_t u = 0; u < num_users; ++u) {
    for (std::size_t i = 0; i < num_items; ++i) {
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k) dot += user_taste[u * dim + k] * item_taste[i * dim + k];
      const double match = 1.0 / (1.0 + std::exp(-scale * dot));
      truth.preference[u * num_items + i] = truth.item_quality_true[i] * match;
    }
  }

  truth.conformity_weight.resize(num_users * num_steps);
  for (std::size_t u = 0; u < num_users; ++u) {
    const double offset = config.conformity_spread * gaussian(rng);
    for (std::size_t t = 0; t < num_steps; ++t) {
      const double progress = num_steps > 1 ? static_cast<double>(t) / static_cast<double>(num_steps - 1) : 0.5;
      const double w = config.conformity_weight + offset + config.conformity_drift * (progress - 0.5);
      truth.conformity_weight[u * num_steps + t] = std::clamp(w, 0.0, 1.0);
    }
  }

  // Trending items come from the lower half of the quality ranking so that
  // their rise is visible against the incumbents.
  std::vector<double> trend_multiplier(num_items, 1.0);
  if (config.trend_items > 0) {
    std::vector<std::size_t> lower;
    for (std::size_t i = 0; i < num_items; ++i) {
      if (rank[i] >= num_items / 2) lower.push_back(i);
    }
    std::shuffle(lower.begin(), lower.end(), rng);
    lower.resize(std::min(lower.size(), static_cast<std::size_t>(config.trend_items)));
    std::sort(lower.begin(), lower.end());
    for (auto i : lower) truth.trending_items.push_back(static_cast<ItemId>(i));
  }
  const auto trend_start = num_steps - static_cast<std::size_t>(std::max(config.trend_steps, 0));

  std::vector<std::vector<double>> preference_cdf(num_users);
  const auto rebuild_preference = [&]() {
    std::vector<double> row(num_items);
    for (std::size_t u = 0; u < num_users; ++u) {
      for (std::size_t i = 0; i < num_items; ++i) row[i] = truth.preference[u * num_items + i] * trend_multiplier[i];
      build_cumulative(row.data(), num_items, preference_cdf[u]);
    }
  };
  rebuild_preference();

  std::vector<std::vector<std::int64_t>> step_counts(num_steps, std::vector<std::int64_t>(num_items, 0));
  std::vector<double> popularity(num_items);
  std::vector<double> popularity_cdf;
  std::uniform_int_distribution<std::size_t> pick_user(0, num_users - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<Timestamp> jitter(0, config.step_seconds - 1);

  const auto window = static_cast<std::size_t>(config.popularity_window);
  for (std::size_t t = 0; t < num_steps; ++t) {
    if (!truth.trending_items.empty() && t >= trend_start) {
      const double progress = static_cast<double>(t - trend_start + 1) / static_cast<double>(num_steps - trend_start);
      for (auto i : truth.trending_items) {
        trend_multiplier[static_cast<std::size_t>(i)] = 1.0 + config.trend_gain * progress;
      }
      rebuild_preference();
    }

    // Local popularity over the simulator's previous window; before any
    // output exists the quality distribution stands in for it.
    std::fill(popularity.begin(), popularity.end(), 0.0);
    std::int64_t total = 0;
    for (std::size_t back = 1; back <= window && back <= t; ++back) {
      const auto& counts = step_counts[t - back];
      for (std::size_t i = 0; i < num_items; ++i) {
        popularity[i] += static_cast<double>(counts[i]);
        total += counts[i];
      }
    }
    if (total == 0) {
      for (std::size_t i = 0; i < num_items; ++i) popularity[i] = truth.item_quality_true[i] * trend_multiplier[i];
    }
    build_cumulative(popularity.data(), num_items, popularity_cdf);

    std::vector<Interaction> step_events;
    step_events.reserve(static_cast<std::size_t>(config.interactions_per_step));
    for (int e = 0; e < config.interactions_per_step; ++e) {
      const std::size_t u = pick_user(rng);
      const double w = truth.conformity_weight[u * num_steps + t];
      const std::size_t item = unit(rng) < w ? draw(popularity_cdf, rng) : draw(preference_cdf[u], rng);
      ++step_counts[t][item];
      Interaction x;
      x.user = static_cast<UserId>(u);
      x.item = static_cast<ItemId>(item);
      x.timestamp = config.start_time + static_cast<Timestamp>(t) * config.step_seconds + jitter(rng);
      step_events.push_back(x);
    }
    std::stable_sort(step_events.begin(), step_events.end(),
                     [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; });
    result.events.insert(result.events.end(), step_events.begin(), step_events.end());
  }

  result.split = chronological_split(result.events, config.num_parts, config.grid_steps,
                                     config.num_users, config.num_items);
  return result;
}

}  // namespace causalepp
