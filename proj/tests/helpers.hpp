#pragma once

// Shared test helpers: fixture paths, random instances with exactly
// representable values, and brute-force oracles kept independent of the
// solver implementations they check.

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "patrol/covering.hpp"
#include "patrol/distance.hpp"
#include "patrol/instance.hpp"

namespace patrol_test {

inline std::string instance_path(const std::string& name) {
  return std::string(PATROL_INSTANCE_DIR) + "/" + name;
}

struct RandomSpec {
  int min_vertices = 3;
  int max_vertices = 7;
  int max_targets = 4;
  int max_deadline = 6;
  int max_weight = 1;  // > 1 exercises unit-time expansion
  int k = 2;
};

// Random connected instance; target values are multiples of 1/64 so sums
// are exact in double no matter the summation order.
inline patrol::PatrolInstance random_instance(std::mt19937_64& rng, const RandomSpec& spec) {
  std::uniform_int_distribution<int> nv(spec.min_vertices, spec.max_vertices);
  const int n = nv(rng);
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));

  std::vector<std::tuple<std::string, std::string, int>> edges;
  auto weight = [&]() {
    return spec.max_weight == 1 ? 1
                                : std::uniform_int_distribution<int>(1, spec.max_weight)(rng);
  };
  // random spanning tree, then a few extra edges
  for (int i = 1; i < n; ++i) {
    int p = std::uniform_int_distribution<int>(0, i - 1)(rng);
    edges.emplace_back(names[static_cast<size_t>(p)], names[static_cast<size_t>(i)], weight());
  }
  int extra = std::uniform_int_distribution<int>(0, n)(rng);
  for (int e = 0; e < extra; ++e) {
    int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
    int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
    if (a == b) continue;
    bool dup = false;
    for (auto& [u, v, w] : edges) {
      (void)w;
      if ((u == names[static_cast<size_t>(a)] && v == names[static_cast<size_t>(b)]) ||
          (u == names[static_cast<size_t>(b)] && v == names[static_cast<size_t>(a)]))
        dup = true;
    }
    if (!dup)
      edges.emplace_back(names[static_cast<size_t>(a)], names[static_cast<size_t>(b)], weight());
  }

  int nt = std::uniform_int_distribution<int>(1, std::min(spec.max_targets, n))(rng);
  std::vector<int> idx(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::pair<std::string, patrol::TargetSpec>> targets;
  for (int i = 0; i < nt; ++i) {
    patrol::TargetSpec t;
    t.value = static_cast<double>(std::uniform_int_distribution<int>(1, 64)(rng)) / 64.0;
    t.deadline = std::uniform_int_distribution<int>(1, spec.max_deadline)(rng);
    targets.emplace_back(names[static_cast<size_t>(idx[static_cast<size_t>(i)])], t);
  }
  return patrol::PatrolInstance::build(std::move(names), edges, targets, spec.k, std::nullopt);
}

// Exhaustive covering-route oracle: tries every permutation of every subset
// of the attacked targets and keeps the best value (ties: fewer waypoints).
inline double brute_force_srg_utility(patrol::Vertex start,
                                      const std::vector<patrol::AttackedTarget>& attacked,
                                      const patrol::PatrolInstance& inst,
                                      const patrol::DistanceMatrix& dist) {
  double attacked_value = 0;
  for (const auto& a : attacked) attacked_value += inst.value(a.target);
  const int m = static_cast<int>(attacked.size());
  double best_covered = 0;
  for (uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> sel;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) sel.push_back(i);
    std::sort(sel.begin(), sel.end());
    do {
      int now = 0;
      patrol::Vertex at = start;
      bool ok = true;
      double covered = 0;
      for (int i : sel) {
        const auto& a = attacked[static_cast<size_t>(i)];
        if (a.target == at) {  // standing on it already covers it
          covered += inst.value(a.target);
          continue;
        }
        now += dist.dist(at, a.target);
        at = a.target;
        if (now > a.residual) {
          ok = false;
          break;
        }
        covered += inst.value(a.target);
      }
      // start vertex under attack is covered at time zero even if unlisted
      if (ok) {
        for (const auto& a : attacked)
          if (a.target == start && !(mask & (1u << (&a - attacked.data()))))
            covered += inst.value(a.target);
        best_covered = std::max(best_covered, covered);
      }
    } while (std::next_permutation(sel.begin(), sel.end()));
  }
  return -(attacked_value - best_covered);
}

}  // namespace patrol_test
