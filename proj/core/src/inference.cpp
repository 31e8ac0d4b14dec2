#include "causalepp/inference.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "causalepp/error.hpp"

namespace causalepp {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kCausalEPP:
      return "causalepp";
    case TrainMode::kPlainBackbone:
      return "plain";
    case TrainMode::kIPS:
      return "ips";
  }
  return "unknown";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "causalepp") return TrainMode::kCausalEPP;
  if (name == "plain") return TrainMode::kPlainBackbone;
  if (name == "ips") return TrainMode::kIPS;
  throw InvalidArgument("unknown training mode '" + std::string(name) + "' (expected causalepp, plain or ips)");
}

std::string_view to_string(InterventionMode mode) {
  switch (mode) {
    case InterventionMode::kNoIntervention:
      return "none";
    case InterventionMode::kIntervened:
      return "intervened";
    case InterventionMode::kEliminateP:
      return "eliminate-p";
    case InterventionMode::kGridValues:
      return "grid";
  }
  return "unknown";
}

InterventionMode parse_intervention(std::string_view name) {
  if (name == "none") return InterventionMode::kNoIntervention;
  if (name == "intervened") return InterventionMode::kIntervened;
  if (name == "eliminate-p") return InterventionMode::kEliminateP;
  if (name == "grid") return InterventionMode::kGridValues;
  throw InvalidArgument("unknown intervention '" + std::string(name) +
                        "' (expected none, intervened, eliminate-p or grid)");
}

Scorer::Scorer(const ModelParams& params, const PropagatedEmbeddings& prop, const PopularityStats& stats,
               ScoringOptions options, const InterventionPlan* plan)
    : params_(&params), prop_(&prop), stats_(&stats), plan_(plan), options_(options) {
  if (stats.pop.num_items != params.num_items() || stats.personal.num_users != params.num_users()) {
    throw InvalidArgument("statistics do not match the model's user/item counts");
  }
  if (plan != nullptr && (plan->p_star.size() != static_cast<std::size_t>(params.num_items()) ||
                          plan->s_star.size() != static_cast<std::size_t>(params.num_users()))) {
    throw InvalidArgument("intervention plan does not match the model's user/item counts");
  }
  if (options.mode == TrainMode::kCausalEPP) {
    mlp_.resize(static_cast<std::size_t>(params.num_items()));
    for (ItemId i = 0; i < params.num_items(); ++i) mlp_[static_cast<std::size_t>(i)] = item_mlp(params, i);
  }
}

std::pair<double, double> Scorer::substitution(UserId u, ItemId i, const Intervention& intervention) const {
  const auto& personal = stats_->personal;
  const int at = stats_->pop.grid.last_train_step;
  switch (intervention.mode) {
    case InterventionMode::kNoIntervention:
      return {personal.at(u, at), stats_->pop.avg_local[static_cast<std::size_t>(i)]};
    case InterventionMode::kIntervened:
      if (plan_ == nullptr) throw InvalidArgument("intervened scoring needs an intervention plan");
      return {plan_->s_star[static_cast<std::size_t>(u)], plan_->p_star[static_cast<std::size_t>(i)]};
    case InterventionMode::kEliminateP:
      return {personal.at(u, at), stats_->overall_avg_local};
    case InterventionMode::kGridValues:
      return {intervention.grid_s, intervention.grid_p};
  }
  return {0.0, 0.0};
}

double Scorer::conformity_value(UserId u, ItemId i, const Intervention& intervention) const {
  if (options_.mode != TrainMode::kCausalEPP) return 0.0;
  const auto [s, p] = substitution(u, i, intervention);
  if (p == 0.0) return 0.0;
  return consistency_score(s, p, effective_alpha()) * p * mlp_[static_cast<std::size_t>(i)];
}

std::vector<double> Scorer::score_all(UserId u, const Intervention& intervention) const {
  if (u < 0 || u >= num_users()) throw InvalidArgument("user id out of range");
  const auto items = static_cast<std::size_t>(num_items());
  std::vector<double> scores(items);
  for (std::size_t i = 0; i < items; ++i) {
    const auto item = static_cast<ItemId>(i);
    const double m = matching_score(*prop_, u, item);
    if (options_.mode != TrainMode::kCausalEPP) {
      scores[i] = m;
      continue;
    }
    const double c = conformity_value(u, item, intervention);
    scores[i] = std::tanh(params_->quality[item] + c) * softplus(m);
  }
  return scores;
}

RankingResult top_k(std::span<const double> scores, std::span<const ItemId> exclude, int k, UserId user) {
  if (k < 1) throw InvalidArgument("k must be at least 1");
  std::vector<ItemId> candidates;
  candidates.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto item = static_cast<ItemId>(i);
    if (!std::binary_search(exclude.begin(), exclude.end(), item)) candidates.push_back(item);
  }
  const auto better = [&](ItemId a, ItemId b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return a < b;
  };
  const auto take = std::min(candidates.size(), static_cast<std::size_t>(k));
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    better);
  candidates.resize(take);

  RankingResult result;
  result.user = user;
  result.short_list = take < static_cast<std::size_t>(k);
  result.scores.reserve(take);
  for (auto item : candidates) result.scores.push_back(scores[static_cast<std::size_t>(item)]);
  result.items = std::move(candidates);
  return result;
}

std::vector<RankingResult> recommend(const Scorer& scorer, const BipartiteGraph& train_graph,
                                     std::span<const UserId> users, int k, const Intervention& intervention) {
  std::vector<RankingResult> out;
  out.reserve(users.size());
  for (UserId u : users) {
    const auto scores = scorer.score_all(u, intervention);
    out.push_back(top_k(scores, train_graph.items_of(u), k, u));
  }
  return out;
}

}  // namespace causalepp
