#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "causalepp/error.hpp"
#include "causalepp/evaluation.hpp"
#include "oracles.hpp"

using namespace causalepp;

namespace {

constexpr double kNdcgExample = 0.919720789148187620;

RankingResult ranking(UserId u, std::vector<ItemId> items) {
  RankingResult r;
  r.user = u;
  r.scores.assign(items.size(), 0.0);
  r.items = std::move(items);
  return r;
}

}  // namespace

TEST_CASE("metric examples") {
  SUBCASE("single hit at the top") {
    std::vector<ItemId> items(20);
    std::iota(items.begin(), items.end(), 0);
    const std::vector<RankingResult> rs{ranking(0, items)};
    const auto m = metrics(rs, {{0}}, 20);
    CHECK(m.recall == 1.0);
    CHECK(m.precision == 0.05);
    CHECK(m.ndcg == 1.0);
  }
  SUBCASE("no hits") {
    const std::vector<RankingResult> rs{ranking(0, {1, 2, 3})};
    const auto m = metrics(rs, {{7}}, 3);
    CHECK(m.recall == 0.0);
    CHECK(m.precision == 0.0);
    CHECK(m.ndcg == 0.0);
  }
  SUBCASE("hits at ranks one and three") {
    const std::vector<RankingResult> rs{ranking(0, {10, 11, 12})};
    const auto m = metrics(rs, {{10, 12}}, 3);
    CHECK(m.ndcg == doctest::Approx(kNdcgExample).epsilon(1e-15));
    CHECK(m.recall == 1.0);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("users without truth are skipped") {
    const std::vector<RankingResult> rs{ranking(0, {1}), ranking(2, {5})};
    const auto m = metrics(rs, {{1}, {}, {6}}, 1);
    CHECK(m.num_users_evaluated == 2);
    CHECK(m.recall == 0.5);
  }
  SUBCASE("bad inputs") {
    const std::vector<RankingResult> rs{ranking(0, {1})};
    CHECK_THROWS_AS(metrics(rs, {{1}}, 0), InvalidArgument);
    CHECK_THROWS_AS(metrics(rs, {{1}, {2}}, 1), InvalidArgument);
  }
}

TEST_CASE("metrics agree with a naive reimplementation") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int users = 50;
    const int items = 100;
    std::vector<std::vector<ItemId>> ranked(users);
    TruthSets truth(users);
    std::vector<RankingResult> rs;
    for (UserId u = 0; u < users; ++u) {
      std::vector<ItemId> perm(items);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      ranked[static_cast<std::size_t>(u)] = perm;
      const int t = static_cast<int>(rng() % 12);
      for (int k = 0; k < t; ++k) truth[static_cast<std::size_t>(u)].push_back(static_cast<ItemId>(rng() % items));
      rs.push_back(ranking(u, perm));
    }
    for (int k : {1, 5, 20, 50}) {
      const auto lib = metrics(rs, truth, k);
      const auto ref = oracle::naive_metrics(ranked, truth, k);
      CHECK(std::abs(lib.recall - ref.recall) <= 1e-12);
      CHECK(std::abs(lib.precision - ref.precision) <= 1e-12);
      CHECK(std::abs(lib.ndcg - ref.ndcg) <= 1e-12);
      CHECK(lib.recall >= 0.0);
      CHECK(lib.ndcg <= 1.0);
    }
    double last = 0.0;
    for (int k = 1; k <= items; ++k) {
      const double r = metrics(rs, truth, k).recall;
      CHECK(r >= last);
      last = r;
    }
  }
}

TEST_CASE("popular item set") {
  const std::vector<std::int64_t> counts{5, 9, 9, 1, 0, 3, 7, 2, 8, 4};
  CHECK(popular_item_set(counts) == std::vector<ItemId>{1, 2});
  CHECK(popular_item_set(counts, 0.25) == std::vector<ItemId>{1, 2, 8});
  const std::vector<std::int64_t> ties(7, 3);
  CHECK(popular_item_set(ties) == std::vector<ItemId>{0, 1});
  CHECK_THROWS_AS(popular_item_set(counts, 0.0), InvalidArgument);
}

TEST_CASE("bias report") {
  std::vector<std::int64_t> counts(10, 1);
  counts[3] = 50;
  counts[7] = 40;
  SUBCASE("popular-only recommendations") {
    const std::vector<RankingResult> rs{ranking(0, {3, 7}), ranking(1, {7})};
    const auto b = bias_report(rs, counts, {{3, 1}, {2}});
    CHECK(b.popular_items == std::vector<ItemId>{3, 7});
    CHECK(b.popular_ratio_recommended == 1.0);
    CHECK(b.popular_ratio_ground_truth == doctest::Approx(1.0 / 3.0));
    CHECK(b.recommended_slots == 3);
  }
  SUBCASE("uniform random rankings land near the popular share") {
    std::mt19937_64 rng(6);
    std::vector<std::int64_t> many(500);
    for (auto& c : many) c = static_cast<std::int64_t>(rng() % 1000);
    std::vector<RankingResult> rs;
    for (UserId u = 0; u < 2000; ++u) {
      std::vector<ItemId> perm(500);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      perm.resize(20);
      rs.push_back(ranking(u, perm));
    }
    const auto b = bias_report(rs, many, {});
    // 40000 slots; the standard error of the share is about 0.002.
    CHECK(b.popular_ratio_recommended == doctest::Approx(0.2).epsilon(0.05));
    CHECK(b.popular_ratio_ground_truth == 0.0);
  }
}

TEST_CASE("spearman") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 4, 6, 8, 100};
  const std::vector<double> rev{5, 4, 3, 2, 1};
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  CHECK(spearman(a, rev) == doctest::Approx(-1.0));
  CHECK(spearman(a, std::vector<double>(5, 0.0)) == 0.0);
  // Ties take the average rank: ranks (1.5, 1.5, 3) against (1, 2, 3).
  const std::vector<double> tied{0, 0, 1};
  const std::vector<double> lin{1, 2, 3};
  CHECK(spearman(tied, lin) == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK_THROWS_AS(spearman(a, lin), InvalidArgument);
}

TEST_CASE("truth grouping") {
  const std::vector<Interaction> xs{{1, 4, 0, std::nullopt}, {1, 4, 1, std::nullopt}, {0, 2, 2, std::nullopt}};
  const auto t = group_by_user(xs, 3);
  CHECK(t[1] == std::vector<ItemId>{4, 4});
  CHECK(users_with_truth(t) == std::vector<UserId>{0, 1});
  CHECK_THROWS_AS(group_by_user(xs, 1), InvalidArgument);
}
