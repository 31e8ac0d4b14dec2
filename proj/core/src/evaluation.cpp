#include "causalepp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "causalepp/error.hpp"

namespace causalepp {

TruthSets group_by_user(std::span<const Interaction> events, int num_users) {
  TruthSets truth(static_cast<std::size_t>(num_users));
  for (const auto& x : events) {
    if (x.user < 0 || x.user >= num_users) throw InvalidArgument("event user outside the id range");
    truth[static_cast<std::size_t>(x.user)].push_back(x.item);
  }
  return truth;
}

std::vector<UserId> users_with_truth(const TruthSets& truth) {
  std::vector<UserId> users;
  for (std::size_t u = 0; u < truth.size(); ++u) {
    if (!truth[u].empty()) users.push_back(static_cast<UserId>(u));
  }
  return users;
}

MetricsReport metrics(std::span<const RankingResult> rankings, const TruthSets& truth, int k) {
  if (k <= 0) throw InvalidArgument("k must be positive");
  std::unordered_map<UserId, const RankingResult*> by_user;
  for (const auto& r : rankings) by_user[r.user] = &r;

  MetricsReport report;
  report.k = k;
  double recall = 0.0;
  double precision = 0.0;
  double ndcg = 0.0;
  for (std::size_t u = 0; u < truth.size(); ++u) {
    if (truth[u].empty()) continue;
    const auto it = by_user.find(static_cast<UserId>(u));
    if (it == by_user.end()) throw InvalidArgument("no ranking for user " + std::to_string(u));
    std::vector<ItemId> relevant = truth[u];
    std::sort(relevant.begin(), relevant.end());
    relevant.erase(std::unique(relevant.begin(), relevant.end()), relevant.end());

    const auto& items = it->second->items;
    const std::size_t depth = std::min(items.size(), static_cast<std::size_t>(k));
    std::size_t hits = 0;
    double dcg = 0.0;
    for (std::size_t r = 0; r < depth; ++r) {
      if (std::binary_search(relevant.begin(), relevant.end(), items[r])) {
        ++hits;
        dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
      }
    }
    double idcg = 0.0;
    const std::size_t ideal = std::min(relevant.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);

    recall += static_cast<double>(hits) / static_cast<double>(relevant.size());
    precision += static_cast<double>(hits) / static_cast<double>(k);
    ndcg += dcg / idcg;
    ++report.num_users_evaluated;
  }
  if (report.num_users_evaluated > 0) {
    const double n = report.num_users_evaluated;
    report.recall = recall / n;
    report.precision = precision / n;
    report.ndcg = ndcg / n;
  }
  return report;
}

std::vector<ItemId> popular_item_set(std::span<const std::int64_t> global_counts, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidArgument("popular fraction must lie in (0, 1]");
  std::vector<ItemId> order(global_counts.size());
  std::iota(order.begin(), order.end(), ItemId{0});
  std::stable_sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
    return global_counts[static_cast<std::size_t>(a)] > global_counts[static_cast<std::size_t>(b)];
  });
  const auto take = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(order.size()) - 1e-9));
  order.resize(std::min(take, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

BiasReport bias_report(std::span<const RankingResult> rankings, std::span<const std::int64_t> global_counts,
                       const TruthSets& truth, double fraction) {
  BiasReport report;
  report.popular_items = popular_item_set(global_counts, fraction);
  std::vector<std::uint8_t> popular(global_counts.size(), 0);
  for (auto i : report.popular_items) popular[static_cast<std::size_t>(i)] = 1;
  const auto is_popular = [&](ItemId i) {
    return i >= 0 && static_cast<std::size_t>(i) < popular.size() && popular[static_cast<std::size_t>(i)] != 0;
  };

  std::int64_t popular_slots = 0;
  for (const auto& r : rankings) {
    for (auto i : r.items) {
      ++report.recommended_slots;
      if (is_popular(i)) ++popular_slots;
    }
  }
  std::int64_t popular_truth = 0;
  for (const auto& items : truth) {
    for (auto i : items) {
      ++report.truth_interactions;
      if (is_popular(i)) ++popular_truth;
    }
  }
  if (report.recommended_slots > 0) {
    report.popular_ratio_recommended =
        static_cast<double>(popular_slots) / static_cast<double>(report.recommended_slots);
  }
  if (report.truth_interactions > 0) {
    report.popular_ratio_ground_truth =
        static_cast<double>(popular_truth) / static_cast<double>(report.truth_interactions);
  }
  return report;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    const double rank = 0.5 * static_cast<double>(start + end - 1) + 1.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("spearman needs equal-length inputs");
  if (a.size() < 2) return 0.0;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mean_b = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t k = 0; k < ra.size(); ++k) {
    cov += (ra[k] - mean_a) * (rb[k] - mean_b);
    var_a += (ra[k] - mean_a) * (ra[k] - mean_a);
    var_b += (rb[k] - mean_b) * (rb[k] - mean_b);
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace causalepp
