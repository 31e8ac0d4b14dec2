#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "causalepp/backbone.hpp"
#include "causalepp/error.hpp"

using namespace causalepp;

namespace {

// Reference values evaluated to 18 digits with an arbitrary-precision tool.
constexpr double kTwoTanhHalf = 0.924234314520019517;
constexpr double kExpMinusPointTwo = 0.818730753077981859;
constexpr double kTanhOneLnTwo = 0.527896841931669712;
constexpr double kLnTwo = 0.693147180559945309;

ModelParams scalar_params(double e_item, double w1, double w2) {
  ModelParams p = init_params(1, 1, 1, BackboneKind::kMF, 0, 1);
  p.item_emb(0, 0) = e_item;
  p.mlp_w1(0, 0) = w1;
  p.mlp_b1(0) = 0.0;
  p.mlp_w2(0) = w2;
  p.mlp_b2 = 0.0;
  return p;
}

std::vector<Interaction> edges(std::initializer_list<std::pair<UserId, ItemId>> list) {
  std::vector<Interaction> xs;
  Timestamp ts = 0;
  for (auto [u, i] : list) xs.push_back({u, i, ts++, std::nullopt});
  return xs;
}

}  // namespace

TEST_CASE("init_params") {
  const auto a = init_params(5, 7, 8, BackboneKind::kLightGCN, 2, 42);
  const auto b = init_params(5, 7, 8, BackboneKind::kLightGCN, 2, 42);
  CHECK(a.user_emb == b.user_emb);
  CHECK(a.item_emb == b.item_emb);
  CHECK(a.mlp_w1 == b.mlp_w1);
  CHECK(a.mlp_w2 == b.mlp_w2);
  CHECK(a.quality.isZero(0.0));
  CHECK(a.hidden() == 4);
  CHECK(a.num_layers == 2);
  CHECK(init_params(5, 7, 8, BackboneKind::kMF, 2, 42).num_layers == 0);
  CHECK(hidden_width(1) == 1);
  CHECK_FALSE(init_params(5, 7, 8, BackboneKind::kMF, 0, 43).user_emb == a.user_emb);
  CHECK_THROWS_AS(init_params(0, 7, 8, BackboneKind::kMF, 0, 1), InvalidArgument);

  // Spread of the initial draws is near 0.1 / sqrt(dim).
  const auto big = init_params(400, 400, 16, BackboneKind::kMF, 0, 3);
  const double mean = big.user_emb.mean();
  const double var = (big.user_emb.array() - mean).square().mean();
  CHECK(std::sqrt(var) == doctest::Approx(0.1 / 4.0).epsilon(0.03));
}

TEST_CASE("backbone names") {
  CHECK(parse_backbone("mf") == BackboneKind::kMF);
  CHECK(parse_backbone(to_string(BackboneKind::kLightGCN)) == BackboneKind::kLightGCN);
  CHECK_THROWS_AS(parse_backbone("ncf"), InvalidArgument);
}

TEST_CASE("matching score") {
  PropagatedEmbeddings prop;
  prop.user_final = Matrix{{1.0, 2.0}, {1.0, 0.0}};
  prop.item_final = Matrix{{3.0, -1.0}, {0.0, 1.0}, {1.0, 0.0}};
  CHECK(matching_score(prop, 0, 0) == 1.0);
  CHECK(matching_score(prop, 1, 1) == 0.0);
  CHECK(matching_score(prop, 1, 2) == 1.0);
}

TEST_CASE("item MLP") {
  auto p = scalar_params(0.5, 1.0, 2.0);
  CHECK(item_mlp(p, 0) == doctest::Approx(kTwoTanhHalf).epsilon(1e-15));
  p.mlp_w1.setZero();
  p.mlp_w2.setZero();
  CHECK(item_mlp(p, 0) == 0.0);
  p.mlp_b2 = -0.75;
  CHECK(item_mlp(p, 0) == -0.75);
}

TEST_CASE("consistency and conformity") {
  CHECK(consistency_score(0.3, 0.3, 0.5) == 1.0);
  CHECK(consistency_score(0.9, 0.1, 0.0) == 1.0);
  CHECK(consistency_score(0.9, 0.5, 0.5) == doctest::Approx(kExpMinusPointTwo).epsilon(1e-15));
  CHECK(consistency_score(0.1, 0.5, 0.5) == doctest::Approx(kExpMinusPointTwo).epsilon(1e-15));

  // MLP(i) = 1 via the output bias alone.
  auto p = scalar_params(0.5, 0.0, 0.0);
  p.mlp_b2 = 1.0;
  CHECK(conformity(p, 0, 0.3, 0.3, 0.5) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(conformity(p, 0, 0.3, 0.0, 0.5) == 0.0);
  p.mlp_b2 = 2.0;
  CHECK(conformity(p, 0, 0.9, 0.5, 0.5) == doctest::Approx(kExpMinusPointTwo).epsilon(1e-15));
}

TEST_CASE("predict score") {
  auto p = scalar_params(0.0, 0.0, 0.0);
  p.user_emb(0, 0) = 0.0;
  const BipartiteGraph g(edges({{0, 0}}), 1, 1);
  const auto prop = propagate(p, g);
  CHECK(predict_score(p, prop, 0, 0, 0.0) == 0.0);
  p.quality(0) = 1.0;
  CHECK(predict_score(p, prop, 0, 0, 0.0) == doctest::Approx(kTanhOneLnTwo).epsilon(1e-15));
  CHECK(softplus(0.0) == doctest::Approx(kLnTwo).epsilon(1e-15));
  CHECK(neg_log_sigmoid(0.0) == doctest::Approx(kLnTwo).epsilon(1e-15));

  PropagatedEmbeddings far;
  far.user_final = Matrix{{-1000.0}};
  far.item_final = Matrix{{1000.0}};
  const double vanishing = predict_score(p, far, 0, 0, 0.0);
  CHECK(std::isfinite(vanishing));
  CHECK(vanishing == 0.0);
  far.user_final(0, 0) = 1000.0;
  CHECK(predict_score(p, far, 0, 0, 0.0) == doctest::Approx(std::tanh(1.0) * 1e6));
}

TEST_CASE("stable softplus and sigmoid stay finite") {
  for (double x : {-1e308, -745.0, -31.0, -30.0, 0.0, 30.0, 31.0, 710.0, 1e308}) {
    CHECK(std::isfinite(softplus(x)));
    CHECK(softplus(x) >= 0.0);
    CHECK(std::isfinite(sigmoid(x)));
  }
  for (double x : {-29.5, -5.0, 0.3, 12.0, 29.5, 35.0, -35.0}) {
    CHECK(softplus(x) == doctest::Approx(std::log1p(std::exp(x))).epsilon(1e-14));
  }
}

TEST_CASE("bipartite graph normalization") {
  // Duplicate (0, 0) counts once.
  const BipartiteGraph g(edges({{0, 0}, {0, 0}, {0, 1}, {1, 1}}), 3, 2);
  CHECK(g.num_edges() == 3);
  CHECK(g.items_of(0).size() == 2);
  CHECK(g.items_of(2).empty());
  CHECK(g.users_of(1).size() == 2);
  CHECK(g.user_edge_weights(0)[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(g.user_edge_weights(0)[1] == doctest::Approx(0.5));
  CHECK(g.item_edge_weights(1)[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(BipartiteGraph(edges({{3, 0}}), 3, 2), InvalidArgument);
}

TEST_CASE("LightGCN propagation") {
  SUBCASE("two-node graph, one layer") {
    auto p = init_params(1, 1, 3, BackboneKind::kLightGCN, 1, 5);
    const BipartiteGraph g(edges({{0, 0}}), 1, 1);
    const auto prop = propagate(p, g);
    const Matrix expected = (p.user_emb + p.item_emb) / 2.0;
    CHECK((prop.user_final - expected).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((prop.item_final - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("isolated nodes keep their embedding") {
    auto p = init_params(3, 3, 4, BackboneKind::kLightGCN, 3, 5);
    const BipartiteGraph g(edges({{0, 0}, {1, 1}}), 3, 3);
    const auto prop = propagate(p, g);
    CHECK(prop.user_final.row(2) == p.user_emb.row(2));
    CHECK(prop.item_final.row(2) == p.item_emb.row(2));
  }
  SUBCASE("zero layers reproduce matrix factorization") {
    auto lgn = init_params(6, 9, 8, BackboneKind::kLightGCN, 0, 11);
    auto mf = lgn;
    mf.kind = BackboneKind::kMF;
    const BipartiteGraph g(edges({{0, 0}, {1, 2}, {2, 3}, {5, 8}, {4, 1}}), 6, 9);
    const auto a = propagate(lgn, g);
    const auto b = propagate(mf, g);
    for (UserId u = 0; u < 6; ++u) {
      for (ItemId i = 0; i < 9; ++i) CHECK(std::abs(matching_score(a, u, i) - matching_score(b, u, i)) <= 1e-12);
    }
  }
  SUBCASE("smoothing is a symmetric linear map") {
    // <S x, y> == <x, S y> on random user/item tables.
    std::mt19937_64 rng(8);
    std::vector<Interaction> xs;
    for (int k = 0; k < 40; ++k) xs.push_back({static_cast<UserId>(rng() % 7), static_cast<ItemId>(rng() % 11), k, std::nullopt});
    const BipartiteGraph g(xs, 7, 11);
    const auto x = init_params(7, 11, 3, BackboneKind::kLightGCN, 2, 1);
    const auto y = init_params(7, 11, 3, BackboneKind::kLightGCN, 2, 2);
    Matrix sxu, sxi, syu, syi;
    smooth_embeddings(g, 2, x.user_emb, x.item_emb, sxu, sxi);
    smooth_embeddings(g, 2, y.user_emb, y.item_emb, syu, syi);
    const double lhs = (sxu.array() * y.user_emb.array()).sum() + (sxi.array() * y.item_emb.array()).sum();
    const double rhs = (x.user_emb.array() * syu.array()).sum() + (x.item_emb.array() * syi.array()).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("ranking with a constant gate follows the matching score") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = init_params(4, 30, 6, BackboneKind::kMF, 0, rng());
    p.quality.setConstant(0.4);
    const BipartiteGraph g(edges({{0, 0}}), 4, 30);
    const auto prop = propagate(p, g);
    for (UserId u = 0; u < 4; ++u) {
      std::vector<ItemId> by_score(30);
      std::vector<ItemId> by_match(30);
      std::iota(by_score.begin(), by_score.end(), 0);
      std::iota(by_match.begin(), by_match.end(), 0);
      std::sort(by_score.begin(), by_score.end(), [&](ItemId a, ItemId b) {
        return predict_score(p, prop, u, a, 0.0) > predict_score(p, prop, u, b, 0.0);
      });
      std::sort(by_match.begin(), by_match.end(), [&](ItemId a, ItemId b) {
        return matching_score(prop, u, a) > matching_score(prop, u, b);
      });
      CHECK(by_score == by_match);
    }
  }
}

TEST_CASE("parameter blocks cover every value") {
  auto p = init_params(3, 4, 6, BackboneKind::kMF, 0, 1);
  std::size_t total = 0;
  for (auto b : p.blocks()) total += b.size();
  CHECK(total == 3 * 6 + 4 * 6 + 4 + 6 * 3 + 3 + 3 + 1);
  const auto z = p.zeros_like();
  for (auto b : z.blocks()) CHECK(std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; }));
}
