#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "causalepp/backbone.hpp"
#include "causalepp/inference.hpp"
#include "causalepp/popstats.hpp"

namespace causalepp {

struct Ablation {
  bool no_quality = false;      // q_i frozen at 0 and no quality loss
  bool no_consistency = false;  // consistency factor pinned to 1
};

struct TrainConfig {
  double alpha = 0.5;
  double lambda = 0.2;
  int dim = 64;
  double lr = 1e-3;
  int epochs = 100;
  int batch_size = 8192;
  int negatives_per_positive = 1;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kCausalEPP;
  Ablation ablation;
  double ips_cap = 10.0;
  BackboneKind backbone = BackboneKind::kMF;
  int num_layers = 2;
  // Early stopping on validation Recall@eval_k, counted in evaluations.
  int patience = 10;
  int eval_every = 1;
  int eval_k = 20;

  // Throws InvalidArgument on out-of-range settings.
  void validate() const;
};

// Uniform draw over the items u never touched in training.
// `interacted` must be sorted; throws InvalidArgument if it covers every item.
ItemId sample_negative(std::span<const ItemId> interacted, int num_items, std::mt19937_64& rng);

// One BPR pair. `s` is s_u^t looked up at the step of the positive interaction.
struct TrainingSample {
  UserId user = 0;
  ItemId positive = 0;
  ItemId negative = 0;
  double s = 0.0;
};

struct LossValue {
  double bpr = 0.0;      // batch mean of -ln sigmoid(y_ui - y_uj), IPS-weighted in IPS mode
  double quality = 0.0;  // batch mean of the quality ranking term
  double total = 0.0;    // bpr + lambda * quality
};

// Per-item inputs the objective reads: E_p[p_i] and d_i.
struct ItemStatistics {
  std::span<const double> avg_local;
  std::span<const std::int64_t> global;
};

// IPS weights min(max_d / d_i, cap); 0 for items never seen.
std::vector<double> ips_weights(std::span<const std::int64_t> global, double cap);

// Loss of the batch and, if `grad` is non-null, its gradient with respect to
// every parameter (written into *grad, which must have params' shapes).
LossValue batch_loss(const ModelParams& params, const BipartiteGraph& graph, std::span<const TrainingSample> batch,
                     const ItemStatistics& stats, const TrainConfig& config, ModelParams* grad);

struct AdamState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::int64_t step = 0;

  static AdamState for_params(const ModelParams& params);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// Bias-corrected Adam on one flat block; `t` is the 1-based step count.
void adam_update(std::span<double> params, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 double lr, std::int64_t t);

// Advances state.step and applies adam_update to every parameter block.
void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state, double lr);

struct EpochRecord {
  int epoch = 0;
  double bpr_loss = 0.0;
  double quality_loss = 0.0;
  double total_loss = 0.0;
  std::optional<double> validation_recall;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 0 when no validation ran; parameters come from this epoch
  bool stopped_early = false;
  double wall_seconds = 0.0;
  double ips_weight_min = 0.0;
  double ips_weight_max = 0.0;
  double ips_weight_mean = 0.0;
};

// One record per epoch as `key=value` fields; wall-clock time is left out so
// identical runs produce identical text.
std::string format_report(const TrainReport& report, const TrainConfig& config);

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// Mini-batch training over `split.train` (stats must come from the same
// training data). Keeps the parameters of the best validation epoch.
TrainResult train(const SplitDataset& split, const PopularityStats& stats, const TrainConfig& config);

}  // namespace causalepp
