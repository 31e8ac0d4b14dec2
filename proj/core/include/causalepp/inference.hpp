#pragma once

#include <span>
#include <vector>

#include "causalepp/backbone.hpp"
#include "causalepp/forecast.hpp"
#include "causalepp/popstats.hpp"

namespace causalepp {

// How the model was trained; decides which score is used at inference.
enum class TrainMode { kCausalEPP, kPlainBackbone, kIPS };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

enum class InterventionMode {
  kNoIntervention,  // (s_u^T, E_p[p_i]), the training-time substitution
  kIntervened,      // (s_u*, p_i*) from the forecast plan
  kEliminateP,      // every item gets the global average popularity
  kGridValues,      // fixed (p, s) for every pair
};

std::string_view to_string(InterventionMode mode);
InterventionMode parse_intervention(std::string_view name);

struct Intervention {
  InterventionMode mode = InterventionMode::kNoIntervention;
  double grid_p = 0.0;
  double grid_s = 0.0;
};

struct ScoringOptions {
  TrainMode mode = TrainMode::kCausalEPP;
  double alpha = 0.5;
  bool no_consistency = false;  // consistency factor pinned to 1
};

// Read-only scoring over frozen parameters. Caches MLP(i) for every item.
class Scorer {
 public:
  Scorer(const ModelParams& params, const PropagatedEmbeddings& prop, const PopularityStats& stats,
         ScoringOptions options, const InterventionPlan* plan = nullptr);

  // One score per item for user u.
  std::vector<double> score_all(UserId u, const Intervention& intervention) const;

  // Conformity value c_ui used under the given intervention.
  double conformity_value(UserId u, ItemId i, const Intervention& intervention) const;

  const ScoringOptions& options() const { return options_; }
  int num_items() const { return params_->num_items(); }
  int num_users() const { return params_->num_users(); }

 private:
  double effective_alpha() const { return options_.no_consistency ? 0.0 : options_.alpha; }
  std::pair<double, double> substitution(UserId u, ItemId i, const Intervention& intervention) const;

  const ModelParams* params_;
  const PropagatedEmbeddings* prop_;
  const PopularityStats* stats_;
  const InterventionPlan* plan_;
  ScoringOptions options_;
  std::vector<double> mlp_;
};

struct RankingResult {
  UserId user = 0;
  std::vector<ItemId> items;
  std::vector<double> scores;
  bool short_list = false;  // fewer than k candidates were available
};

// k best non-excluded items, highest score first, ties by ascending id.
// `exclude` must be sorted.
RankingResult top_k(std::span<const double> scores, std::span<const ItemId> exclude, int k, UserId user = 0);

// Ranks every listed user, excluding the user's training items.
std::vector<RankingResult> recommend(const Scorer& scorer, const BipartiteGraph& train_graph,
                                     std::span<const UserId> users, int k, const Intervention& intervention);

}  // namespace causalepp
