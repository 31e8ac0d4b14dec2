#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "causalepp/corpus.hpp"
#include "causalepp/error.hpp"
#include "causalepp/kvfile.hpp"
#include "oracles.hpp"

using namespace causalepp;

TEST_CASE("load_interactions remaps ids and keeps every row when k_core is 0") {
  const std::string text =
      "user_id,item_id,rating,timestamp\n"
      "alice,matrix,4.5,300\n"
      "bob,matrix,3,100\n"
      "alice,up,,200\n"
      "carol,up,5,400\n";
  const Corpus corpus = parse_interactions(text, 0);
  REQUIRE(corpus.interactions.size() == 4);
  CHECK(corpus.num_users() == 3);
  CHECK(corpus.num_items() == 2);
  // Sorted by timestamp; ids assigned in order of first appearance after sorting.
  CHECK(corpus.interactions[0].timestamp == 100);
  CHECK(corpus.user_ids[0] == "bob");
  CHECK(corpus.item_ids[0] == "matrix");
  CHECK(corpus.interactions[1].user == 1);
  CHECK(corpus.user_ids[1] == "alice");
  CHECK_FALSE(corpus.interactions[1].rating.has_value());
  CHECK(corpus.interactions[3].rating.value() == doctest::Approx(5.0));
}

TEST_CASE("tab separated input without header") {
  const Corpus corpus = parse_interactions("1\t10\t4\t5\n2\t11\t3\t6\n", 0);
  CHECK(corpus.interactions.size() == 2);
  CHECK(corpus.user_ids == std::vector<std::string>{"1", "2"});
}

TEST_CASE("every user below k empties the dataset") {
  std::string text;
  for (int u = 0; u < 10; ++u) {
    for (int j = 0; j < 3; ++j) text += std::to_string(u) + "," + std::to_string(u * 3 + j) + ",1," + std::to_string(u * 10 + j) + "\n";
  }
  CHECK_THROWS_AS(parse_interactions(text, 5), EmptyDatasetError);
}

TEST_CASE("malformed rows report their line number") {
  const std::string text = "u,i,r,t\n1,2,3,4\n1,2,3\n";
  try {
    parse_interactions(text, 0, "log.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("log.csv:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_interactions("1,2,3,4\n1,2,x,5\n", 0), ParseError);
  CHECK_THROWS_AS(parse_interactions("1,2,3,4\n1,2,3,later\n", 0), ParseError);
}

TEST_CASE("k-core removes the weak user and cascades") {
  // u1..u3 each click i1..i3; u1 also clicks i4; u4 clicks only i1, i2.
  std::vector<Interaction> xs;
  std::int64_t ts = 0;
  const auto add = [&](UserId u, ItemId i) { xs.push_back({u, i, ts++, std::nullopt}); };
  for (UserId u = 1; u <= 3; ++u) {
    for (ItemId i = 1; i <= 3; ++i) add(u, i);
  }
  add(1, 4);
  add(4, 1);
  add(4, 2);
  REQUIRE(xs.size() == 12);

  const auto filtered = k_core_filter(xs, 3);
  const auto expected = oracle::k_core(xs, 3);
  CHECK(filtered == expected);
  CHECK(filtered.size() == 9);
  CHECK(std::none_of(filtered.begin(), filtered.end(), [](const Interaction& x) { return x.user == 4 || x.item == 4; }));
}

TEST_CASE("k-core matches the brute-force oracle on random logs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto xs = oracle::random_log(rng, 15, 20, 120, 10);
    for (int k : {2, 3, 5}) {
      const auto filtered = k_core_filter(xs, k);
      CHECK(filtered == oracle::k_core(xs, k));
      std::map<UserId, int> ud;
      std::map<ItemId, int> id;
      for (const auto& x : filtered) {
        ++ud[x.user];
        ++id[x.item];
      }
      for (const auto& [_, d] : ud) CHECK(d >= k);
      for (const auto& [_, d] : id) CHECK(d >= k);
    }
  }
}

TEST_CASE("remapped ids are dense") {
  std::mt19937_64 rng(5);
  const auto xs = oracle::random_log(rng, 30, 40, 400, 20);
  std::string text;
  for (const auto& x : xs) text += "u" + std::to_string(x.user * 7) + ",i" + std::to_string(x.item * 3) + ",1," + std::to_string(x.timestamp) + "\n";
  const Corpus corpus = parse_interactions(text, 2);
  std::set<UserId> users;
  std::set<ItemId> items;
  for (const auto& x : corpus.interactions) {
    users.insert(x.user);
    items.insert(x.item);
  }
  CHECK(static_cast<int>(users.size()) == corpus.num_users());
  CHECK(static_cast<int>(items.size()) == corpus.num_items());
  CHECK(*users.rbegin() == corpus.num_users() - 1);
  CHECK(*items.rbegin() == corpus.num_items() - 1);
  CHECK(std::is_sorted(corpus.interactions.begin(), corpus.interactions.end(),
                       [](const Interaction& a, const Interaction& b) { return a.timestamp < b.timestamp; }));
}

TEST_CASE("load_interactions reads files and fails on missing ones") {
  const auto dir = std::filesystem::temp_directory_path() / "causalepp_test_corpus";
  std::filesystem::create_directories(dir);
  write_text_file(dir / "log.tsv", "1\t1\t5\t10\n2\t1\t4\t20\n");
  CHECK(load_interactions(dir / "log.tsv", 0).interactions.size() == 2);
  CHECK_THROWS_AS(load_interactions(dir / "missing.tsv", 0), IoError);
  std::filesystem::remove_all(dir);
}

namespace {

std::vector<Interaction> ramp(int n) {
  std::vector<Interaction> xs;
  for (int k = 0; k < n; ++k) xs.push_back({k % 7, k % 11, 1000 + 10 * k, std::nullopt});
  return xs;
}

}  // namespace

TEST_CASE("chronological split sizes") {
  SUBCASE("exact division") {
    const auto split = chronological_split(ramp(100), 10, 100);
    CHECK(split.train.size() == 90);
    CHECK(split.validation.size() == 5);
    CHECK(split.test.size() == 5);
  }
  SUBCASE("validation takes the odd interaction") {
    const auto split = chronological_split(ramp(101), 10, 100);
    CHECK(split.train.size() == 90);
    CHECK(split.validation.size() == 6);
    CHECK(split.test.size() == 5);
  }
  SUBCASE("too few interactions") { CHECK_THROWS_AS(chronological_split(ramp(9), 10, 100), InvalidArgument); }
  SUBCASE("unsorted input is rejected") {
    auto xs = ramp(20);
    std::swap(xs[0], xs[5]);
    CHECK_THROWS_AS(chronological_split(xs, 10, 100), InvalidArgument);
  }
}

TEST_CASE("split invariant and grid coverage hold on random sorted logs") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    std::uniform_int_distribution<int> size(10, 500);
    const auto xs = oracle::random_log(rng, 20, 30, size(rng), 50);
    const auto split = chronological_split(xs, 10, 100);
    const auto max_train = split.train.back().timestamp;
    for (const auto& x : split.validation) CHECK(x.timestamp >= max_train);
    for (const auto& x : split.test) CHECK(x.timestamp >= max_train);
    const auto diff = static_cast<long>(split.validation.size()) - static_cast<long>(split.test.size());
    CHECK((diff == 0 || diff == 1));
    CHECK(split.train.size() + split.validation.size() + split.test.size() == xs.size());
    CHECK(split.grid.last_train_step < split.grid.num_steps);
    CHECK(split.grid.last_train_step == split.grid.step_of(max_train));
    for (const auto& x : split.train) {
      const int s = split.grid.step_of(x.timestamp);
      CHECK(s >= 0);
      CHECK(s < split.grid.num_steps);
    }
    for (const auto& x : split.test) CHECK(split.grid.lookup_step(x.timestamp) == split.grid.last_train_step);
  }
}

TEST_CASE("time grid binning") {
  const TimeGrid grid = TimeGrid::over_range(0, 1000, 10);
  CHECK(grid.step_duration == doctest::Approx(100.0));
  CHECK(grid.step_of(0) == 0);
  CHECK(grid.step_of(99) == 0);
  CHECK(grid.step_of(100) == 1);
  CHECK(grid.step_of(1000) == 9);
  CHECK(grid.step_of(5000) == 9);
  CHECK(grid.step_of(-50) == 0);
  CHECK(grid.last_train_step == 9);
  const TimeGrid single = TimeGrid::over_range(42, 42, 100);
  CHECK(single.step_of(42) == 0);
  CHECK(single.last_train_step == 0);
}
