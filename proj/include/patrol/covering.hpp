#pragma once

// Best responses to simultaneous attacks: covering routes over the attacked
// targets, computed by a (subset, last-target) earliest-arrival DP. Earliest
// arrival dominates for extending feasibility, so the DP loses no optimal
// covering set.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "patrol/distance.hpp"
#include "patrol/errors.hpp"
#include "patrol/instance.hpp"

namespace patrol {

struct AttackedTarget {
  Vertex target = -1;
  int residual = 0;  // turns left before the attack completes; >= 0
};

// A waypoint sequence starting anywhere and visiting attacked targets,
// instantiated along shortest paths between consecutive waypoints.
struct DirectRoute {
  std::vector<Vertex> waypoints;  // waypoints[0] is the start vertex
  std::vector<int> arrival_times; // aligned with waypoints; [0] == 0
};

struct CoveringRoute {
  DirectRoute route;
  std::vector<Vertex> covered;  // attacked targets saved, sorted
  double utility = 0.0;         // -(value of attacked targets not covered)
};

// Expands a route to the full vertex walk, one vertex per turn.
inline std::vector<Vertex> instantiate_route(const DirectRoute& r, const DistanceMatrix& dist) {
  std::vector<Vertex> walk;
  if (r.waypoints.empty()) return walk;
  walk.push_back(r.waypoints[0]);
  for (size_t i = 1; i < r.waypoints.size(); ++i) {
    auto leg = dist.path(r.waypoints[i - 1], r.waypoints[i]);
    walk.insert(walk.end(), leg.begin() + 1, leg.end());
  }
  return walk;
}

namespace detail {

// Latest departure time from `last` such that every target of `rem` (indices
// into the working list) can still be reached in order; memoized per call.
struct SrgScratch {
  std::vector<Vertex> tgt;
  std::vector<int> residual;
  std::vector<double> val;
  std::vector<int> latest;  // (rem << log) | last, lazily filled
  std::vector<char> latest_done;
  int m = 0;
  const DistanceMatrix* dist = nullptr;

  int latest_departure(int last, uint32_t rem) {
    if (rem == 0) return DistanceMatrix::kInf;
    size_t key = (static_cast<size_t>(rem) << 5) | static_cast<size_t>(last);
    if (latest_done[key]) return latest[key];
    int best = -1;
    for (int j = 0; j < m; ++j) {
      if (!(rem & (1u << j))) continue;
      int d = dist->dist(tgt[static_cast<size_t>(last)], tgt[static_cast<size_t>(j)]);
      int arrive_cap = std::min(residual[static_cast<size_t>(j)],
                                latest_departure(j, rem & ~(1u << j)));
      if (arrive_cap >= d) best = std::max(best, arrive_cap - d);
    }
    latest_done[key] = 1;
    latest[key] = best;
    return best;
  }
};

}  // namespace detail

struct SrgBudget {
  int max_attacked = 18;  // DP is O(2^m m^2)
};

// Best covering route from `start` against the attacked set. Maximizes the
// total value of covered targets; ties prefer fewer waypoints, then the
// lexicographically smallest waypoint sequence. Standing on an attacked
// target covers it at time zero. Uncoverable targets are conceded, never an
// error.
inline CoveringRoute solve_srg(Vertex start, const std::vector<AttackedTarget>& attacked,
                               const PatrolInstance& inst, const DistanceMatrix& dist,
                               const SrgBudget& budget = {}) {
  double attacked_value = 0.0;
  double covered_value = 0.0;
  CoveringRoute out;
  out.route.waypoints = {start};
  out.route.arrival_times = {0};

  detail::SrgScratch s;
  s.dist = &dist;
  std::vector<char> seen(static_cast<size_t>(inst.vertex_count()), 0);
  for (const AttackedTarget& a : attacked) {
    if (!inst.is_target(a.target)) throw ValidationError("attacked set contains a non-target");
    if (a.residual < 0) throw ValidationError("residual deadline >= 0");
    if (seen[static_cast<size_t>(a.target)]) throw ValidationError("duplicate attacked target");
    seen[static_cast<size_t>(a.target)] = 1;
    attacked_value += inst.value(a.target);
    if (a.target == start) {
      covered_value += inst.value(a.target);
      out.covered.push_back(a.target);
      continue;  // covered at time zero, not part of the DP
    }
    s.tgt.push_back(a.target);
    s.residual.push_back(a.residual);
    s.val.push_back(inst.value(a.target));
  }
  s.m = static_cast<int>(s.tgt.size());
  if (s.m > budget.max_attacked)
    throw BudgetError("attacked set of " + std::to_string(s.m) + " exceeds solve_srg budget of " +
                      std::to_string(budget.max_attacked));

  const int m = s.m;
  const uint32_t full = m == 0 ? 0u : ((1u << m) - 1u);
  // earliest[mask][last]: earliest feasible arrival at `last` having covered
  // exactly `mask`; kInf when infeasible.
  std::vector<int> earliest((full + 1ull) * static_cast<size_t>(std::max(m, 1)),
                            DistanceMatrix::kInf);
  auto E = [&](uint32_t mask, int last) -> int& {
    return earliest[static_cast<size_t>(mask) * static_cast<size_t>(m) + static_cast<size_t>(last)];
  };
  std::vector<double> mask_value(full + 1ull, 0.0);
  std::vector<char> feasible(full + 1ull, 0);
  feasible[0] = 1;

  for (int j = 0; j < m; ++j) {
    int d = dist.dist(start, s.tgt[static_cast<size_t>(j)]);
    if (d <= s.residual[static_cast<size_t>(j)]) E(1u << j, j) = d;
  }
  for (uint32_t mask = 1; mask <= full && m > 0; ++mask) {
    for (int last = 0; last < m; ++last) {
      if (!(mask & (1u << last))) continue;
      int cur = E(mask, last);
      if (cur == DistanceMatrix::kInf) continue;
      feasible[mask] = 1;
      for (int j = 0; j < m; ++j) {
        if (mask & (1u << j)) continue;
        int arr = cur + dist.dist(s.tgt[static_cast<size_t>(last)], s.tgt[static_cast<size_t>(j)]);
        if (arr <= s.residual[static_cast<size_t>(j)] && arr < E(mask | (1u << j), j))
          E(mask | (1u << j), j) = arr;
      }
    }
    if (feasible[mask])
      for (int j = 0; j < m; ++j)
        if (mask & (1u << j)) mask_value[mask] += s.val[static_cast<size_t>(j)];
  }

  // Pick the covering set: max value, then fewest waypoints.
  uint32_t best_mask = 0;
  double best_value = 0.0;
  int best_size = 0;
  std::vector<uint32_t> cand = {0};
  for (uint32_t mask = 1; mask <= full && m > 0; ++mask) {
    if (!feasible[mask]) continue;
    int size = __builtin_popcount(mask);
    if (mask_value[mask] > best_value ||
        (mask_value[mask] == best_value && size < best_size)) {
      best_value = mask_value[mask];
      best_size = size;
      best_mask = mask;
      cand.clear();
    }
    if (mask_value[mask] == best_value && size == best_size) cand.push_back(mask);
  }
  (void)best_mask;

  // Lexicographically smallest feasible ordering across the tied sets.
  // Candidate lists stay small in practice; cap them for determinism.
  if (cand.size() > 256) cand.resize(256);
  s.latest.assign((static_cast<size_t>(full) + 1) << 5, 0);
  s.latest_done.assign((static_cast<size_t>(full) + 1) << 5, 0);
  std::vector<Vertex> seq;
  std::vector<int> times;
  uint32_t chosen = 0;
  int now = 0;
  int last = -1;  // -1 means still at start
  for (int step = 0; step < best_size; ++step) {
    int pick = -1;
    for (int j = 0; j < m; ++j) {
      if (chosen & (1u << j)) continue;
      int d = last < 0 ? dist.dist(start, s.tgt[static_cast<size_t>(j)])
                       : dist.dist(s.tgt[static_cast<size_t>(last)], s.tgt[static_cast<size_t>(j)]);
      int arr = now + d;
      if (arr > s.residual[static_cast<size_t>(j)]) continue;
      bool ok = false;
      for (uint32_t mk : cand) {
        if ((mk & chosen) != chosen || !(mk & (1u << j))) continue;
        uint32_t rem = mk & ~chosen & ~(1u << j);
        if (arr <= s.latest_departure(j, rem)) { ok = true; break; }
      }
      if (ok &&
          (pick < 0 ||
           inst.name_of(s.tgt[static_cast<size_t>(j)]) < inst.name_of(s.tgt[static_cast<size_t>(pick)]))) {
        pick = j;
      }
    }
    if (pick < 0) break;  // should not happen for feasible candidates
    int d = last < 0 ? dist.dist(start, s.tgt[static_cast<size_t>(pick)])
                     : dist.dist(s.tgt[static_cast<size_t>(last)], s.tgt[static_cast<size_t>(pick)]);
    now += d;
    seq.push_back(s.tgt[static_cast<size_t>(pick)]);
    times.push_back(now);
    chosen |= (1u << pick);
    last = pick;
  }

  for (size_t i = 0; i < seq.size(); ++i) {
    out.route.waypoints.push_back(seq[i]);
    out.route.arrival_times.push_back(times[i]);
    out.covered.push_back(seq[i]);
    covered_value += inst.value(seq[i]);
  }
  std::sort(out.covered.begin(), out.covered.end());
  out.utility = -(attacked_value - covered_value);
  // Guard against -0.0 so serialized reports are byte-stable.
  if (out.utility == 0.0) out.utility = 0.0;
  return out;
}

// Does the attacked set admit a route covering every target?
inline bool sa_feasible(Vertex start, const std::vector<AttackedTarget>& attacked,
                        const PatrolInstance& inst, const DistanceMatrix& dist,
                        const SrgBudget& budget = {}) {
  CoveringRoute r = solve_srg(start, attacked, inst, dist, budget);
  return r.covered.size() == attacked.size();
}

// k = 1: the best strategy is to stand on a vertex and rush the alarmed
// target along a shortest path. Returns the vertex maximizing the worst
// single-target response, ties to the lexicographically smallest identifier.
inline std::pair<Vertex, double> best_static_placement_k1(const PatrolInstance& inst,
                                                          const DistanceMatrix& dist) {
  Vertex best_v = 0;
  double best_u = -1e300;
  for (Vertex v = 0; v < inst.vertex_count(); ++v) {
    double worst = 0.0;
    for (Vertex t : inst.targets())
      if (dist.dist(v, t) > inst.deadline(t)) worst = std::min(worst, -inst.value(t));
    if (worst > best_u) {
      best_u = worst;
      best_v = v;
    }
  }
  return {best_v, best_u};
}

struct SimultaneousBudget {
  std::uint64_t max_subsets = 1'000'000;
  SrgBudget srg;
};

// Value of the game restricted to one simultaneous k-target attack: the
// Attacker picks the k-subset minimizing the covering-route utility, the
// Defender the start maximizing that minimum. Exhaustive over subsets.
inline std::pair<Vertex, double> simultaneous_attack_value(
    const PatrolInstance& inst, int k, const DistanceMatrix& dist,
    std::optional<Vertex> start = std::nullopt, const SimultaneousBudget& budget = {}) {
  if (k < 1) throw ValidationError("k >= 1");
  const auto& targets = inst.targets();
  const int nt = static_cast<int>(targets.size());
  const int take = std::min(k, nt);

  std::uint64_t count = 1;
  for (int i = 0; i < take; ++i) {
    count = count * static_cast<std::uint64_t>(nt - i) / static_cast<std::uint64_t>(i + 1);
    if (count > budget.max_subsets)
      throw BudgetError("C(|T|, k) exceeds the simultaneous-attack budget of " +
                        std::to_string(budget.max_subsets) + " subsets");
  }

  std::vector<Vertex> starts;
  if (start) starts = {*start};
  else if (auto s = inst.defender_start()) starts = {*s};
  else for (Vertex v = 0; v < inst.vertex_count(); ++v) starts.push_back(v);

  Vertex best_v = starts.front();
  double best_u = -1e300;
  std::vector<int> pick(static_cast<size_t>(take));
  for (Vertex v : starts) {
    double worst = 0.0;
    // enumerate k-combinations of target ordinals
    for (int i = 0; i < take; ++i) pick[static_cast<size_t>(i)] = i;
    while (true) {
      std::vector<AttackedTarget> att;
      att.reserve(static_cast<size_t>(take));
      for (int i : pick)
        att.push_back(AttackedTarget{targets[static_cast<size_t>(i)],
                                     inst.deadline(targets[static_cast<size_t>(i)])});
      worst = std::min(worst, solve_srg(v, att, inst, dist, budget.srg).utility);
      int p = take - 1;
      while (p >= 0 && pick[static_cast<size_t>(p)] == nt - take + p) --p;
      if (p < 0) break;
      ++pick[static_cast<size_t>(p)];
      for (int q = p + 1; q < take; ++q)
        pick[static_cast<size_t>(q)] = pick[static_cast<size_t>(q - 1)] + 1;
    }
    if (worst > best_u) {
      best_u = worst;
      best_v = v;
    }
  }
  return {best_v, best_u};
}

}  // namespace patrol
