#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "causalepp/corpus.hpp"

namespace causalepp {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class BackboneKind : std::uint32_t { kMF = 0, kLightGCN = 1 };

std::string_view to_string(BackboneKind kind);
BackboneKind parse_backbone(std::string_view name);

// Everything the optimizer updates. The quality vector and the item MLP are
// unused by the plain backbone objective.
struct ModelParams {
  BackboneKind kind = BackboneKind::kMF;
  int num_layers = 0;  // LightGCN propagation depth
  Matrix user_emb;     // num_users x dim
  Matrix item_emb;     // num_items x dim
  Vector quality;      // q_i
  Matrix mlp_w1;       // dim x hidden
  Vector mlp_b1;       // hidden
  Vector mlp_w2;       // hidden
  double mlp_b2 = 0.0;

  int num_users() const { return static_cast<int>(user_emb.rows()); }
  int num_items() const { return static_cast<int>(item_emb.rows()); }
  int dim() const { return static_cast<int>(user_emb.cols()); }
  int hidden() const { return static_cast<int>(mlp_b1.size()); }

  static constexpr std::size_t kNumBlocks = 7;

  // Flat views over each parameter block, in declaration order. Checkpoints
  // and the optimizer both walk these.
  std::array<std::span<double>, kNumBlocks> blocks();
  std::array<std::span<const double>, kNumBlocks> blocks() const;

  // Same shapes, all zeros.
  ModelParams zeros_like() const;
};

int hidden_width(int dim);

// Embeddings and MLP weights ~ N(0, (0.1 / sqrt(dim))^2); biases and quality start at 0.
ModelParams init_params(int num_users, int num_items, int dim, BackboneKind kind, int num_layers,
                        std::uint64_t seed);

// User-item graph over distinct training edges with symmetric normalization
// 1 / sqrt(|N_u| |N_i|) per edge.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(std::span<const Interaction> train, int num_users, int num_items);

  int num_users() const { return static_cast<int>(user_offsets_.size()) - 1; }
  int num_items() const { return static_cast<int>(item_offsets_.size()) - 1; }
  std::size_t num_edges() const { return user_items_.size(); }

  std::span<const ItemId> items_of(UserId u) const;
  std::span<const UserId> users_of(ItemId i) const;
  // Normalization weights aligned with items_of(u) / users_of(i).
  std::span<const double> user_edge_weights(UserId u) const;
  std::span<const double> item_edge_weights(ItemId i) const;

 private:
  std::vector<std::size_t> user_offsets_{0};
  std::vector<ItemId> user_items_;
  std::vector<double> user_weights_;
  std::vector<std::size_t> item_offsets_{0};
  std::vector<UserId> item_users_;
  std::vector<double> item_weights_;
};

struct PropagatedEmbeddings {
  Matrix user_final;
  Matrix item_final;
};

// Layer-mean LightGCN smoothing, K rounds. Isolated nodes carry their
// previous layer forward. The operator is symmetric, so the same routine
// maps gradients on the outputs back onto the inputs.
void smooth_embeddings(const BipartiteGraph& graph, int num_layers, const Matrix& users, const Matrix& items,
                       Matrix& out_users, Matrix& out_items);

// MF: identity. LightGCN: smooth_embeddings() with params.num_layers.
PropagatedEmbeddings propagate(const ModelParams& params, const BipartiteGraph& graph);

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ln(1 + e^x) without overflow; asymptotic forms past |x| > 30.
inline double softplus(double x) {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  if (x < -30.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

// -ln sigmoid(x) = softplus(-x).
inline double neg_log_sigmoid(double x) { return softplus(-x); }

double matching_score(const PropagatedEmbeddings& prop, UserId u, ItemId i);

// w2 . tanh(w1^T e_i + b1) + b2 on the base item embedding.
double item_mlp(const ModelParams& params, ItemId i);

// exp(-alpha |s - p|).
double consistency_score(double s, double p, double alpha);

// consistency_score(s, p, alpha) * p * MLP(i).
double conformity(const ModelParams& params, ItemId i, double s_value, double p_value, double alpha);

// tanh(q_i + c) * softplus(m_ui).
double predict_score(const ModelParams& params, const PropagatedEmbeddings& prop, UserId u, ItemId i,
                     double c_value);

}  // namespace causalepp
