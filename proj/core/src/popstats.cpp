#include "causalepp/popstats.hpp"

#include <algorithm>
#include <cmath>

#include "causalepp/error.hpp"

namespace causalepp {

namespace {

std::vector<std::vector<const Interaction*>> bucket_by_step(std::span<const Interaction> train, const TimeGrid& grid) {
  std::vector<std::vector<const Interaction*>> buckets(static_cast<std::size_t>(grid.num_steps));
  for (const auto& x : train) buckets[static_cast<std::size_t>(grid.step_of(x.timestamp))].push_back(&x);
  return buckets;
}

}  // namespace

int window_steps_for(const TimeGrid& grid, double window_seconds) {
  if (!(window_seconds > 0.0)) throw InvalidArgument("window length must be positive");
  const double steps = std::ceil(window_seconds / grid.step_duration - 1e-9);
  return std::max(1, static_cast<int>(std::min(steps, static_cast<double>(grid.num_steps))));
}

PopularityTable local_popularity(std::span<const Interaction> train, const TimeGrid& grid, int window_steps,
                                 int num_items) {
  if (window_steps < 1) throw InvalidArgument("window_steps must be at least 1");
  if (num_items < 0) throw InvalidArgument("num_items must be non-negative");
  const auto steps = static_cast<std::size_t>(grid.num_steps);
  const auto items = static_cast<std::size_t>(num_items);

  PopularityTable table;
  table.grid = grid;
  table.num_items = num_items;
  table.window_steps = window_steps;
  table.global.assign(items, 0);

  // counts[i][t] then an inclusive prefix over steps.
  std::vector<std::int64_t> prefix(items * steps, 0);
  std::vector<std::int64_t> step_total(steps, 0);
  for (const auto& x : train) {
    if (x.item < 0 || x.item >= num_items) throw InvalidArgument("interaction item outside the table");
    const auto t = static_cast<std::size_t>(grid.step_of(x.timestamp));
    ++prefix[static_cast<std::size_t>(x.item) * steps + t];
    ++step_total[t];
    ++table.global[static_cast<std::size_t>(x.item)];
  }
  for (std::size_t i = 0; i < items; ++i) {
    for (std::size_t t = 1; t < steps; ++t) prefix[i * steps + t] += prefix[i * steps + t - 1];
  }
  for (std::size_t t = 1; t < steps; ++t) step_total[t] += step_total[t - 1];

  const auto w = static_cast<std::size_t>(window_steps);
  const auto window_count = [&](const std::int64_t* cumulative, std::size_t t) {
    return cumulative[t] - (t >= w ? cumulative[t - w] : 0);
  };

  table.window_total.resize(steps);
  table.local.assign(items * steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::int64_t total = window_count(step_total.data(), t);
    table.window_total[t] = total;
    if (total == 0) continue;
    for (std::size_t i = 0; i < items; ++i) {
      const std::int64_t count = window_count(prefix.data() + i * steps, t);
      table.local[i * steps + t] = static_cast<double>(count) / static_cast<double>(total);
    }
  }
  table.avg_local = avg_local_popularity(train, table);
  return table;
}

double high_pop_threshold(const PopularityTable& pop, int step, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0)) throw InvalidArgument("quantile must lie in (0, 1)");
  if (step < 0 || step >= pop.num_steps()) throw InvalidArgument("step outside the time grid");
  std::vector<double> nonzero;
  for (ItemId i = 0; i < pop.num_items; ++i) {
    const double p = pop.at(i, step);
    if (p > 0.0) nonzero.push_back(p);
  }
  if (nonzero.empty()) return kNoPopularItems;
  std::sort(nonzero.begin(), nonzero.end());
  const double n = static_cast<double>(nonzero.size());
  // The small slack keeps e.g. (1 - 0.2) * 5 from rounding up to rank 5.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - quantile) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, nonzero.size());
  return nonzero[rank - 1];
}

PersonalPopularityTable personal_popularity(std::span<const Interaction> train, const PopularityTable& pop,
                                            int window_steps, double quantile, int num_users) {
  if (window_steps < 1) throw InvalidArgument("window_steps must be at least 1");
  if (window_steps != pop.window_steps) throw InvalidArgument("personal popularity window differs from the popularity table");
  const TimeGrid& grid = pop.grid;
  const auto steps = static_cast<std::size_t>(grid.num_steps);
  const auto users = static_cast<std::size_t>(num_users);

  PersonalPopularityTable table;
  table.num_users = num_users;
  table.num_steps = grid.num_steps;
  table.quantile = quantile;
  table.threshold.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) table.threshold[t] = high_pop_threshold(pop, static_cast<int>(t), quantile);

  const auto buckets = bucket_by_step(train, grid);
  const auto is_popular_at = [&](ItemId item, std::size_t t) { return pop.at(item, static_cast<int>(t)) > table.threshold[t]; };

  // Lifetime share, each interaction judged at its own step.
  std::vector<std::int64_t> life_total(users, 0);
  std::vector<std::int64_t> life_popular(users, 0);
  for (const auto& x : train) {
    if (x.user < 0 || x.user >= num_users) throw InvalidArgument("interaction user outside the table");
    const auto t = static_cast<std::size_t>(grid.step_of(x.timestamp));
    ++life_total[static_cast<std::size_t>(x.user)];
    if (is_popular_at(x.item, t)) ++life_popular[static_cast<std::size_t>(x.user)];
  }
  std::vector<double> lifetime(users, 0.0);
  for (std::size_t u = 0; u < users; ++u) {
    if (life_total[u] > 0) lifetime[u] = static_cast<double>(life_popular[u]) / static_cast<double>(life_total[u]);
  }

  table.personal.assign(users * steps, 0.0);
  table.fallback.assign(users * steps, 1);
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t t = 0; t < steps; ++t) table.personal[u * steps + t] = lifetime[u];
  }

  std::vector<std::int64_t> total(users, 0);
  std::vector<std::int64_t> popular(users, 0);
  std::vector<std::size_t> touched;
  const auto w = static_cast<std::size_t>(window_steps);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t first = t + 1 >= w ? t + 1 - w : 0;
    for (std::size_t k = first; k <= t; ++k) {
      for (const Interaction* x : buckets[k]) {
        const auto u = static_cast<std::size_t>(x->user);
        if (total[u] == 0) touched.push_back(u);
        ++total[u];
        if (is_popular_at(x->item, t)) ++popular[u];
      }
    }
    for (auto u : touched) {
      table.personal[u * steps + t] = static_cast<double>(popular[u]) / static_cast<double>(total[u]);
      table.fallback[u * steps + t] = 0;
      total[u] = 0;
      popular[u] = 0;
    }
    touched.clear();
  }
  return table;
}

std::vector<double> avg_local_popularity(std::span<const Interaction> train, const PopularityTable& pop) {
  const auto items = static_cast<std::size_t>(pop.num_items);
  std::vector<double> sum(items, 0.0);
  std::vector<std::int64_t> count(items, 0);
  for (const auto& x : train) {
    const auto i = static_cast<std::size_t>(x.item);
    sum[i] += pop.at(x.item, pop.grid.step_of(x.timestamp));
    ++count[i];
  }
  for (std::size_t i = 0; i < items; ++i) {
    if (count[i] > 0) sum[i] /= static_cast<double>(count[i]);
  }
  return sum;
}

double overall_avg_local_popularity(std::span<const Interaction> train, const PopularityTable& pop) {
  if (train.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& x : train) sum += pop.at(x.item, pop.grid.step_of(x.timestamp));
  return sum / static_cast<double>(train.size());
}

PopularityStats compute_stats(const SplitDataset& split, const StatsConfig& config) {
  PopularityStats stats;
  stats.pop = local_popularity(split.train, split.grid, config.window_steps, split.num_items);
  stats.personal = personal_popularity(split.train, stats.pop, config.window_steps, config.quantile, split.num_users);
  stats.overall_avg_local = overall_avg_local_popularity(split.train, stats.pop);
  return stats;
}

}  // namespace causalepp
