#pragma once

// Central finite-difference check of batch_loss gradients on a tiny model.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "causalepp/training.hpp"

namespace gradcheck {

using namespace causalepp;

struct Toy {
  ModelParams params;
  BipartiteGraph graph;
  std::vector<TrainingSample> batch;
  std::vector<double> avg_local;
  std::vector<std::int64_t> global;
};

// 3 users x 4 items with parameters drawn large enough that every factor of
// the score is away from its flat regions.
inline Toy make_toy(BackboneKind kind, std::uint64_t seed) {
  const int users = 3;
  const int items = 4;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-0.8, 0.8);
  Toy toy;
  toy.params = init_params(users, items, 4, kind, 2, seed);
  for (auto block : toy.params.blocks()) {
    for (double& v : block) v = val(rng);
  }
  std::vector<Interaction> train{{0, 0, 0, std::nullopt}, {0, 1, 1, std::nullopt}, {1, 1, 2, std::nullopt},
                                 {1, 2, 3, std::nullopt}, {2, 3, 4, std::nullopt}, {2, 0, 5, std::nullopt}};
  toy.graph = BipartiteGraph(train, users, items);
  toy.batch = {{0, 0, 2, 0.7}, {0, 1, 3, 0.1}, {1, 1, 0, 0.4}, {1, 2, 3, 0.9}, {2, 3, 1, 0.2}, {2, 0, 1, 0.55}};
  toy.avg_local = {0.45, 0.3, 0.05, 0.2};
  toy.global = {5, 3, 3, 1};  // one tie so the sign-zero branch runs
  return toy;
}

struct Result {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

inline Result check(const Toy& toy, const TrainConfig& config, double h = 1e-5) {
  const ItemStatistics stats{toy.avg_local, toy.global};
  ModelParams grad;
  batch_loss(toy.params, toy.graph, toy.batch, stats, config, &grad);
  ModelParams probe = toy.params;
  const auto analytic = grad.blocks();
  auto values = probe.blocks();
  Result r;
  for (std::size_t b = 0; b < values.size(); ++b) {
    for (std::size_t k = 0; k < values[b].size(); ++k) {
      const double keep = values[b][k];
      values[b][k] = keep + h;
      const double up = batch_loss(probe, toy.graph, toy.batch, stats, config, nullptr).total;
      values[b][k] = keep - h;
      const double down = batch_loss(probe, toy.graph, toy.batch, stats, config, nullptr).total;
      values[b][k] = keep;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[b][k];
      // Entries whose true gradient is zero are compared on an absolute
      // scale of 1e-6.
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
      r.max_rel_error = std::max(r.max_rel_error, rel);
      ++r.checked;
    }
  }
  return r;
}

}  // namespace gradcheck
