#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "patrol/oracle.hpp"

using namespace patrol;
using patrol_test::instance_path;
using patrol_test::random_instance;

TEST_CASE("fig2 with two sequential resources: one target is always lost") {
  auto inst = load_instance(instance_path("fig2.instance"));
  OracleEngine eng(inst);
  for (Vertex v = 0; v < inst.vertex_count(); ++v) CHECK(eng.value(v, {}, 2, 0) == -1.0);
  auto res = game_tree_oracle(inst, 2);
  CHECK(res.value == -1.0);
}

TEST_CASE("single target with the patroller on it is fully protected") {
  auto inst = parse_instance(R"({
    "vertices": ["t", "u"], "edges": [["t", "u", 1]],
    "targets": [{"vertex": "t", "value": 1.0, "deadline": 1}],
    "k": 3, "defender_start": "t"
  })");
  auto res = game_tree_oracle(inst, 3);
  CHECK(res.value == 0.0);
  CHECK(res.placement == inst.index_of("t"));
}

TEST_CASE("oracle value is monotone non-increasing in k and bounded") {
  std::mt19937_64 rng(818181);
  patrol_test::RandomSpec spec;
  spec.max_vertices = 6;
  spec.max_targets = 3;
  for (int rep = 0; rep < 25; ++rep) {
    auto inst = random_instance(rng, spec);
    double total = inst.total_target_value();
    double prev = 1;
    for (int k = 1; k <= 3; ++k) {
      auto res = game_tree_oracle(inst, k);
      CHECK(res.value <= 0.0);
      CHECK(res.value >= -total);
      if (prev <= 0) CHECK(res.value <= prev);
      prev = res.value;
    }
  }
}

TEST_CASE("principal variation is consistent with the value") {
  std::mt19937_64 rng(272727);
  patrol_test::RandomSpec spec;
  spec.max_vertices = 6;
  spec.max_targets = 3;
  for (int rep = 0; rep < 25; ++rep) {
    auto inst = random_instance(rng, spec);
    auto res = game_tree_oracle(inst, 2);
    double lost_total = 0;
    std::set<Vertex> lost_once;
    for (const auto& step : res.trace) {
      for (Vertex t : step.lost) {
        lost_total -= inst.value(t);
        // a compromised target is charged exactly once
        REQUIRE(lost_once.insert(t).second);
      }
    }
    REQUIRE(lost_total == res.value);
  }
}

TEST_CASE("oracle guard rejects oversized requests") {
  std::mt19937_64 rng(1);
  patrol_test::RandomSpec spec;
  spec.min_vertices = 6;
  spec.max_vertices = 6;
  auto inst = random_instance(rng, spec);
  OracleBudget tiny;
  tiny.max_vertices = 5;
  CHECK_THROWS_AS(game_tree_oracle(inst, 2, tiny), BudgetError);
  OracleBudget lowk;
  lowk.max_k = 1;
  CHECK_THROWS_AS(game_tree_oracle(inst, 2, lowk), BudgetError);
}

TEST_CASE("re-attacking a caught target cannot help the Attacker") {
  // k = 2 against a single target: the second resource can only re-attack,
  // which the standing patroller catches.
  auto inst = parse_instance(R"({
    "vertices": ["s", "t"], "edges": [["s", "t", 1]],
    "targets": [{"vertex": "t", "value": 1.0, "deadline": 1}], "k": 2
  })");
  auto res = game_tree_oracle(inst, 2);
  CHECK(res.value == 0.0);
}
