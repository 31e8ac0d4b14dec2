#include "causalepp/backbone.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "causalepp/error.hpp"

namespace causalepp {

std::string_view to_string(BackboneKind kind) {
  switch (kind) {
    case BackboneKind::kMF:
      return "mf";
    case BackboneKind::kLightGCN:
      return "lightgcn";
  }
  return "unknown";
}

BackboneKind parse_backbone(std::string_view name) {
  if (name == "mf") return BackboneKind::kMF;
  if (name == "lightgcn") return BackboneKind::kLightGCN;
  throw InvalidArgument("unknown backbone '" + std::string(name) + "' (expected mf or lightgcn)");
}

std::array<std::span<double>, ModelParams::kNumBlocks> ModelParams::blocks() {
  return {std::span<double>(user_emb.data(), static_cast<std::size_t>(user_emb.size())),
          std::span<double>(item_emb.data(), static_cast<std::size_t>(item_emb.size())),
          std::span<double>(quality.data(), static_cast<std::size_t>(quality.size())),
          std::span<double>(mlp_w1.data(), static_cast<std::size_t>(mlp_w1.size())),
          std::span<double>(mlp_b1.data(), static_cast<std::size_t>(mlp_b1.size())),
          std::span<double>(mlp_w2.data(), static_cast<std::size_t>(mlp_w2.size())),
          std::span<double>(&mlp_b2, 1)};
}

std::array<std::span<const double>, ModelParams::kNumBlocks> ModelParams::blocks() const {
  auto mutable_blocks = const_cast<ModelParams*>(this)->blocks();
  std::array<std::span<const double>, kNumBlocks> out;
  std::copy(mutable_blocks.begin(), mutable_blocks.end(), out.begin());
  return out;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.kind = kind;
  z.num_layers = num_layers;
  z.user_emb = Matrix::Zero(user_emb.rows(), user_emb.cols());
  z.item_emb = Matrix::Zero(item_emb.rows(), item_emb.cols());
  z.quality = Vector::Zero(quality.size());
  z.mlp_w1 = Matrix::Zero(mlp_w1.rows(), mlp_w1.cols());
  z.mlp_b1 = Vector::Zero(mlp_b1.size());
  z.mlp_w2 = Vector::Zero(mlp_w2.size());
  z.mlp_b2 = 0.0;
  return z;
}

int hidden_width(int dim) { return std::max(dim / 2, 1); }

ModelParams init_params(int num_users, int num_items, int dim, BackboneKind kind, int num_layers,
                        std::uint64_t seed) {
  if (num_users <= 0 || num_items <= 0 || dim <= 0) throw InvalidArgument("model sizes must be positive");
  if (num_layers < 0) throw InvalidArgument("num_layers must be non-negative");
  const int hidden = hidden_width(dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1 / std::sqrt(static_cast<double>(dim)));
  const auto fill = [&](auto& m) {
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
  };

  ModelParams p;
  p.kind = kind;
  p.num_layers = kind == BackboneKind::kLightGCN ? num_layers : 0;
  p.user_emb.resize(num_users, dim);
  p.item_emb.resize(num_items, dim);
  p.mlp_w1.resize(dim, hidden);
  p.mlp_w2.resize(hidden);
  fill(p.user_emb);
  fill(p.item_emb);
  fill(p.mlp_w1);
  fill(p.mlp_w2);
  p.quality = Vector::Zero(num_items);
  p.mlp_b1 = Vector::Zero(hidden);
  p.mlp_b2 = 0.0;
  return p;
}

BipartiteGraph::BipartiteGraph(std::span<const Interaction> train, int num_users, int num_items) {
  std::vector<std::pair<UserId, ItemId>> edges;
  edges.reserve(train.size());
  for (const auto& x : train) {
    if (x.user < 0 || x.user >= num_users || x.item < 0 || x.item >= num_items) {
      throw InvalidArgument("graph edge outside the declared id range");
    }
    edges.emplace_back(x.user, x.item);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::vector<std::size_t> user_degree(static_cast<std::size_t>(num_users), 0);
  std::vector<std::size_t> item_degree(static_cast<std::size_t>(num_items), 0);
  for (const auto& [u, i] : edges) {
    ++user_degree[static_cast<std::size_t>(u)];
    ++item_degree[static_cast<std::size_t>(i)];
  }
  const auto weight = [&](UserId u, ItemId i) {
    return 1.0 / std::sqrt(static_cast<double>(user_degree[static_cast<std::size_t>(u)]) *
                           static_cast<double>(item_degree[static_cast<std::size_t>(i)]));
  };

  user_offsets_.assign(static_cast<std::size_t>(num_users) + 1, 0);
  for (std::size_t u = 0; u < user_degree.size(); ++u) user_offsets_[u + 1] = user_offsets_[u] + user_degree[u];
  user_items_.reserve(edges.size());
  user_weights_.reserve(edges.size());
  for (const auto& [u, i] : edges) {
    user_items_.push_back(i);
    user_weights_.push_back(weight(u, i));
  }

  item_offsets_.assign(static_cast<std::size_t>(num_items) + 1, 0);
  for (std::size_t i = 0; i < item_degree.size(); ++i) item_offsets_[i + 1] = item_offsets_[i] + item_degree[i];
  item_users_.resize(edges.size());
  item_weights_.resize(edges.size());
  std::vector<std::size_t> cursor(item_offsets_.begin(), item_offsets_.end() - 1);
  for (const auto& [u, i] : edges) {
    const std::size_t slot = cursor[static_cast<std::size_t>(i)]++;
    item_users_[slot] = u;
    item_weights_[slot] = weight(u, i);
  }
}

std::span<const ItemId> BipartiteGraph::items_of(UserId u) const {
  const auto k = static_cast<std::size_t>(u);
  return {user_items_.data() + user_offsets_[k], user_offsets_[k + 1] - user_offsets_[k]};
}

std::span<const UserId> BipartiteGraph::users_of(ItemId i) const {
  const auto k = static_cast<std::size_t>(i);
  return {item_users_.data() + item_offsets_[k], item_offsets_[k + 1] - item_offsets_[k]};
}

std::span<const double> BipartiteGraph::user_edge_weights(UserId u) const {
  const auto k = static_cast<std::size_t>(u);
  return {user_weights_.data() + user_offsets_[k], user_offsets_[k + 1] - user_offsets_[k]};
}

std::span<const double> BipartiteGraph::item_edge_weights(ItemId i) const {
  const auto k = static_cast<std::size_t>(i);
  return {item_weights_.data() + item_offsets_[k], item_offsets_[k + 1] - item_offsets_[k]};
}

void smooth_embeddings(const BipartiteGraph& graph, int num_layers, const Matrix& users, const Matrix& items,
                       Matrix& out_users, Matrix& out_items) {
  if (users.rows() != graph.num_users() || items.rows() != graph.num_items()) {
    throw InvalidArgument("embedding tables do not match the graph");
  }
  out_users = users;
  out_items = items;
  if (num_layers <= 0) return;

  Matrix layer_users = users;
  Matrix layer_items = items;
  Matrix next_users(users.rows(), users.cols());
  Matrix next_items(items.rows(), items.cols());
  for (int k = 0; k < num_layers; ++k) {
    for (UserId u = 0; u < graph.num_users(); ++u) {
      const auto nbrs = graph.items_of(u);
      if (nbrs.empty()) {
        next_users.row(u) = layer_users.row(u);
        continue;
      }
      const auto w = graph.user_edge_weights(u);
      next_users.row(u).setZero();
      for (std::size_t e = 0; e < nbrs.size(); ++e) next_users.row(u) += w[e] * layer_items.row(nbrs[e]);
    }
    for (ItemId i = 0; i < graph.num_items(); ++i) {
      const auto nbrs = graph.users_of(i);
      if (nbrs.empty()) {
        next_items.row(i) = layer_items.row(i);
        continue;
      }
      const auto w = graph.item_edge_weights(i);
      next_items.row(i).setZero();
      for (std::size_t e = 0; e < nbrs.size(); ++e) next_items.row(i) += w[e] * layer_users.row(nbrs[e]);
    }
    layer_users.swap(next_users);
    layer_items.swap(next_items);
    out_users += layer_users;
    out_items += layer_items;
  }
  const double inv = 1.0 / static_cast<double>(num_layers + 1);
  out_users *= inv;
  out_items *= inv;
}

PropagatedEmbeddings propagate(const ModelParams& params, const BipartiteGraph& graph) {
  PropagatedEmbeddings prop;
  if (params.kind == BackboneKind::kMF) {
    prop.user_final = params.user_emb;
    prop.item_final = params.item_emb;
    return prop;
  }
  smooth_embeddings(graph, params.num_layers, params.user_emb, params.item_emb, prop.user_final, prop.item_final);
  return prop;
}

double matching_score(const PropagatedEmbeddings& prop, UserId u, ItemId i) {
  return prop.user_final.row(u).dot(prop.item_final.row(i));
}

double item_mlp(const ModelParams& params, ItemId i) {
  const Vector pre = params.mlp_w1.transpose() * params.item_emb.row(i).transpose() + params.mlp_b1;
  return params.mlp_w2.dot(pre.array().tanh().matrix()) + params.mlp_b2;
}

double consistency_score(double s, double p, double alpha) { return std::exp(-alpha * std::abs(s - p)); }

double conformity(const ModelParams& params, ItemId i, double s_value, double p_value, double alpha) {
  if (p_value == 0.0) return 0.0;
  return consistency_score(s_value, p_value, alpha) * p_value * item_mlp(params, i);
}

double predict_score(const ModelParams& params, const PropagatedEmbeddings& prop, UserId u, ItemId i,
                     double c_value) {
  return std::tanh(params.quality[i] + c_value) * softplus(matching_score(prop, u, i));
}

}  // namespace causalepp
