#include "causalepp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "causalepp/error.hpp"
#include "causalepp/evaluation.hpp"
#include "causalepp/kvfile.hpp"

namespace causalepp {

void TrainConfig::validate() const {
  if (!(alpha >= 0.0)) throw InvalidArgument("alpha must be >= 0");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  if (!(lr > 0.0)) throw InvalidArgument("lr must be > 0");
  if (dim < 1) throw InvalidArgument("dim must be >= 1");
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (negatives_per_positive < 1) throw InvalidArgument("negatives_per_positive must be >= 1");
  if (!(ips_cap > 0.0)) throw InvalidArgument("ips_cap must be > 0");
  if (num_layers < 0) throw InvalidArgument("num_layers must be >= 0");
  if (patience < 1) throw InvalidArgument("patience must be >= 1");
  if (eval_every < 1) throw InvalidArgument("eval_every must be >= 1");
  if (eval_k < 1) throw InvalidArgument("eval_k must be >= 1");
}

ItemId sample_negative(std::span<const ItemId> interacted, int num_items, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(num_items);
  if (interacted.size() >= n) throw InvalidArgument("user has interacted with every item; no negative exists");
  const std::size_t candidates = n - interacted.size();
  if (interacted.size() * 2 <= n) {
    std::uniform_int_distribution<ItemId> any(0, num_items - 1);
    while (true) {
      const ItemId j = any(rng);
      if (!std::binary_search(interacted.begin(), interacted.end(), j)) return j;
    }
  }
  // Dense histories: pick the k-th free slot directly.
  std::uniform_int_distribution<std::size_t> pick(0, candidates - 1);
  std::size_t k = pick(rng);
  ItemId j = 0;
  for (auto taken : interacted) {
    const auto gap = static_cast<std::size_t>(taken - j);
    if (k < gap) break;
    k -= gap;
    j = taken + 1;
  }
  return j + static_cast<ItemId>(k);
}

std::vector<double> ips_weights(std::span<const std::int64_t> global, double cap) {
  const std::int64_t max_d = global.empty() ? 0 : *std::max_element(global.begin(), global.end());
  std::vector<double> w(global.size(), 0.0);
  for (std::size_t i = 0; i < global.size(); ++i) {
    if (global[i] > 0) w[i] = std::min(static_cast<double>(max_d) / static_cast<double>(global[i]), cap);
  }
  return w;
}

namespace {

// Forward quantities of the causal score for one (user, item) pair.
struct ItemForward {
  Vector hidden;   // tanh(w1^T e_i + b1)
  double mlp = 0.0;
  double consistency = 1.0;
  double p = 0.0;
  double gate = 0.0;  // tanh(q_i + c_ui)
  double match = 0.0;
  double score = 0.0;
};

ItemForward causal_forward(const ModelParams& params, const PropagatedEmbeddings& prop, UserId u, ItemId i, double s,
                           double p, double alpha, bool use_quality) {
  ItemForward f;
  f.hidden = (params.mlp_w1.transpose() * params.item_emb.row(i).transpose() + params.mlp_b1).array().tanh().matrix();
  f.mlp = params.mlp_w2.dot(f.hidden) + params.mlp_b2;
  f.consistency = consistency_score(s, p, alpha);
  f.p = p;
  const double c = f.consistency * p * f.mlp;
  const double q = use_quality ? params.quality[i] : 0.0;
  f.gate = std::tanh(q + c);
  f.match = matching_score(prop, u, i);
  f.score = f.gate * softplus(f.match);
  return f;
}

// Accumulates d(loss)/d(score) = upstream into the parameter gradient.
void causal_backward(const ModelParams& params, const PropagatedEmbeddings& prop, UserId u, ItemId i,
                     const ItemForward& f, double upstream, bool use_quality, ModelParams& grad,
                     Matrix& grad_user_final, Matrix& grad_item_final) {
  const double d_gate_input = upstream * (1.0 - f.gate * f.gate) * softplus(f.match);
  if (use_quality) grad.quality[i] += d_gate_input;
  const double d_mlp = d_gate_input * f.consistency * f.p;
  if (d_mlp != 0.0) {
    grad.mlp_b2 += d_mlp;
    grad.mlp_w2 += d_mlp * f.hidden;
    const Vector d_pre = d_mlp * params.mlp_w2.cwiseProduct((1.0 - f.hidden.array().square()).matrix());
    grad.mlp_b1 += d_pre;
    grad.mlp_w1.noalias() += params.item_emb.row(i).transpose() * d_pre.transpose();
    grad.item_emb.row(i).noalias() += (params.mlp_w1 * d_pre).transpose();
  }
  const double d_match = upstream * f.gate * sigmoid(f.match);
  grad_user_final.row(u) += d_match * prop.item_final.row(i);
  grad_item_final.row(i) += d_match * prop.user_final.row(u);
}

}  // namespace

LossValue batch_loss(const ModelParams& params, const BipartiteGraph& graph, std::span<const TrainingSample> batch,
                     const ItemStatistics& stats, const TrainConfig& config, ModelParams* grad) {
  LossValue loss;
  if (batch.empty()) {
    if (grad != nullptr) *grad = params.zeros_like();
    return loss;
  }
  const PropagatedEmbeddings prop = propagate(params, graph);
  const double scale = 1.0 / static_cast<double>(batch.size());
  const bool causal = config.mode == TrainMode::kCausalEPP;
  const bool use_quality = causal && !config.ablation.no_quality;
  const double alpha = config.ablation.no_consistency ? 0.0 : config.alpha;
  const std::vector<double> ips =
      config.mode == TrainMode::kIPS ? ips_weights(stats.global, config.ips_cap) : std::vector<double>{};

  Matrix grad_user_final;
  Matrix grad_item_final;
  if (grad != nullptr) {
    *grad = params.zeros_like();
    grad_user_final = Matrix::Zero(prop.user_final.rows(), prop.user_final.cols());
    grad_item_final = Matrix::Zero(prop.item_final.rows(), prop.item_final.cols());
  }

  double bpr_sum = 0.0;
  double quality_sum = 0.0;
  for (const auto& sample : batch) {
    const UserId u = sample.user;
    const ItemId i = sample.positive;
    const ItemId j = sample.negative;
    if (!causal) {
      const double weight = config.mode == TrainMode::kIPS ? ips[static_cast<std::size_t>(i)] : 1.0;
      const double diff = matching_score(prop, u, i) - matching_score(prop, u, j);
      bpr_sum += weight * neg_log_sigmoid(diff);
      if (grad != nullptr) {
        const double d_diff = -weight * sigmoid(-diff) * scale;
        grad_user_final.row(u) += d_diff * (prop.item_final.row(i) - prop.item_final.row(j));
        grad_item_final.row(i) += d_diff * prop.user_final.row(u);
        grad_item_final.row(j) -= d_diff * prop.user_final.row(u);
      }
      continue;
    }

    const double p_i = stats.avg_local[static_cast<std::size_t>(i)];
    const double p_j = stats.avg_local[static_cast<std::size_t>(j)];
    const ItemForward fi = causal_forward(params, prop, u, i, sample.s, p_i, alpha, use_quality);
    const ItemForward fj = causal_forward(params, prop, u, j, sample.s, p_j, alpha, use_quality);
    const double diff = fi.score - fj.score;
    bpr_sum += neg_log_sigmoid(diff);
    if (grad != nullptr) {
      const double d_diff = -sigmoid(-diff) * scale;
      causal_backward(params, prop, u, i, fi, d_diff, use_quality, *grad, grad_user_final, grad_item_final);
      causal_backward(params, prop, u, j, fj, -d_diff, use_quality, *grad, grad_user_final, grad_item_final);
    }

    if (use_quality) {
      const std::int64_t d_i = stats.global[static_cast<std::size_t>(i)];
      const std::int64_t d_j = stats.global[static_cast<std::size_t>(j)];
      const double sign = d_i > d_j ? 1.0 : (d_i < d_j ? -1.0 : 0.0);
      const double z = sign * (params.quality[i] - params.quality[j]);
      quality_sum += neg_log_sigmoid(z);
      if (grad != nullptr && sign != 0.0) {
        const double d_z = -sigmoid(-z) * config.lambda * scale;
        grad->quality[i] += d_z * sign;
        grad->quality[j] -= d_z * sign;
      }
    }
  }

  loss.bpr = bpr_sum * scale;
  loss.quality = quality_sum * scale;
  loss.total = loss.bpr + config.lambda * loss.quality;

  if (grad != nullptr) {
    if (params.kind == BackboneKind::kLightGCN) {
      Matrix back_users;
      Matrix back_items;
      smooth_embeddings(graph, params.num_layers, grad_user_final, grad_item_final, back_users, back_items);
      grad->user_emb += back_users;
      grad->item_emb += back_items;
    } else {
      grad->user_emb += grad_user_final;
      grad->item_emb += grad_item_final;
    }
  }
  return loss;
}

AdamState AdamState::for_params(const ModelParams& params) {
  AdamState state;
  state.first_moment = params.zeros_like();
  state.second_moment = params.zeros_like();
  return state;
}

void adam_update(std::span<double> params, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 double lr, std::int64_t t) {
  if (grad.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw InvalidArgument("adam_update: shape mismatch");
  }
  if (t < 1) throw InvalidArgument("adam_update: step count starts at 1");
  const double correction1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * grad[k];
    v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * grad[k] * grad[k];
    const double m_hat = m[k] / correction1;
    const double v_hat = v[k] / correction2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
  }
}

void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state, double lr) {
  ++state.step;
  auto p = params.blocks();
  const auto g = grad.blocks();
  auto m = state.first_moment.blocks();
  auto v = state.second_moment.blocks();
  for (std::size_t b = 0; b < ModelParams::kNumBlocks; ++b) adam_update(p[b], g[b], m[b], v[b], lr, state.step);
}

std::string format_report(const TrainReport& report, const TrainConfig& config) {
  std::ostringstream out;
  out << "# causalepp training report\n";
  out << "mode=" << to_string(config.mode) << " backbone=" << to_string(config.backbone)
      << " no_quality=" << config.ablation.no_quality << " no_consistency=" << config.ablation.no_consistency
      << " seed=" << config.seed << "\n";
  if (config.mode == TrainMode::kIPS) {
    out << "ips_weight_min=" << format_double(report.ips_weight_min)
        << " ips_weight_max=" << format_double(report.ips_weight_max)
        << " ips_weight_mean=" << format_double(report.ips_weight_mean) << "\n";
  }
  for (const auto& e : report.epochs) {
    out << "epoch=" << e.epoch << " bpr_loss=" << format_double(e.bpr_loss)
        << " quality_loss=" << format_double(e.quality_loss) << " total_loss=" << format_double(e.total_loss);
    if (e.validation_recall) out << " val_recall@" << config.eval_k << "=" << format_double(*e.validation_recall);
    out << "\n";
  }
  out << "best_epoch=" << report.best_epoch << " stopped_early=" << report.stopped_early << "\n";
  return out.str();
}

TrainResult train(const SplitDataset& split, const PopularityStats& stats, const TrainConfig& config) {
  config.validate();
  if (split.train.empty()) throw EmptyDatasetError("no training interactions");
  const auto start = std::chrono::steady_clock::now();

  const BipartiteGraph graph(split.train, split.num_users, split.num_items);
  TrainResult result;
  result.params = init_params(split.num_users, split.num_items, config.dim, config.backbone, config.num_layers,
                              config.seed);
  AdamState adam = AdamState::for_params(result.params);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  const ItemStatistics item_stats{stats.pop.avg_local, stats.pop.global};
  if (config.mode == TrainMode::kIPS) {
    const auto w = ips_weights(stats.pop.global, config.ips_cap);
    double lo = 0.0;
    double hi = 0.0;
    double sum = 0.0;
    bool first = true;
    for (const auto& x : split.train) {
      const double wi = w[static_cast<std::size_t>(x.item)];
      lo = first ? wi : std::min(lo, wi);
      hi = first ? wi : std::max(hi, wi);
      sum += wi;
      first = false;
    }
    result.report.ips_weight_min = lo;
    result.report.ips_weight_max = hi;
    result.report.ips_weight_mean = sum / static_cast<double>(split.train.size());
  }

  // s_u^t at the step holding each positive interaction.
  std::vector<double> positive_s(split.train.size());
  for (std::size_t k = 0; k < split.train.size(); ++k) {
    const auto& x = split.train[k];
    positive_s[k] = stats.personal.at(x.user, split.grid.step_of(x.timestamp));
  }

  const TruthSets validation_truth = group_by_user(split.validation, split.num_users);
  const std::vector<UserId> validation_users = users_with_truth(validation_truth);
  const ScoringOptions scoring{config.mode, config.alpha, config.ablation.no_consistency};

  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingSample> batch;
  ModelParams grad = result.params.zeros_like();

  ModelParams best = result.params;
  double best_recall = -1.0;
  int evaluations_since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double bpr = 0.0;
    double quality = 0.0;
    double total = 0.0;
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t k = begin; k < end; ++k) {
        const auto& x = split.train[order[k]];
        for (int n = 0; n < config.negatives_per_positive; ++n) {
          batch.push_back({x.user, x.item, sample_negative(graph.items_of(x.user), split.num_items, rng),
                           positive_s[order[k]]});
        }
      }
      const LossValue loss = batch_loss(result.params, graph, batch, item_stats, config, &grad);
      if (!std::isfinite(loss.total)) {
        throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + " (bpr=" +
                             format_double(loss.bpr) + ", quality=" + format_double(loss.quality) + ")");
      }
      adam_step(result.params, grad, adam, config.lr);
      const auto n = static_cast<double>(batch.size());
      bpr += loss.bpr * n;
      quality += loss.quality * n;
      total += loss.total * n;
      seen += batch.size();
    }

    EpochRecord record;
    record.epoch = epoch;
    record.bpr_loss = bpr / static_cast<double>(seen);
    record.quality_loss = quality / static_cast<double>(seen);
    record.total_loss = total / static_cast<double>(seen);

    if (!validation_users.empty() && epoch % config.eval_every == 0) {
      const PropagatedEmbeddings prop = propagate(result.params, graph);
      const Scorer scorer(result.params, prop, stats, scoring);
      const auto rankings = recommend(scorer, graph, validation_users, config.eval_k, Intervention{});
      const double recall = metrics(rankings, validation_truth, config.eval_k).recall;
      record.validation_recall = recall;
      if (recall > best_recall) {
        best_recall = recall;
        best = result.params;
        result.report.best_epoch = epoch;
        evaluations_since_best = 0;
      } else if (++evaluations_since_best >= config.patience) {
        result.report.epochs.push_back(record);
        result.report.stopped_early = true;
        break;
      }
    }
    result.report.epochs.push_back(record);
  }

  if (best_recall >= 0.0) result.params = std::move(best);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace causalepp
