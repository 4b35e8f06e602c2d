#pragma once

// Equilibrium computation for an arbitrary number of sequential attacking
// resources. A level solves the game conditioned on the set of currently
// burning attacks: the patroller commits to a walk (re-planned whenever a
// new attack lands), each cell of a vertex x time x caught-set grid is
// hedged against every further attack the remaining resources allow, and
// cells merge by keeping the best utility. Levels recurse at attack events
// with strictly fewer undeployed resources, so the recursion is finite and
// memoizable on (position, active set with residuals, resources, lost set).
//
// Requires a unit-time instance.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "patrol/covering.hpp"
#include "patrol/distance.hpp"
#include "patrol/errors.hpp"
#include "patrol/flat_map.hpp"
#include "patrol/instance.hpp"
#include "patrol/pathfinder.hpp"
#include "patrol/rng.hpp"

namespace patrol {

struct SequentialBudget {
  std::uint64_t max_states = 50'000'000;  // memoized subgames + grid cells
  PlacementBudget placement;              // for the k = 2 path
};

class SequentialSolver {
 public:
  SequentialSolver(const PatrolInstance& inst, const DistanceMatrix& dist,
                   const SequentialBudget& budget = {})
      : inst_(inst), dist_(dist), budget_(budget) {
    if (!inst.unit_weight())
      throw ValidationError("sequential solver requires a unit-time instance");
    if (inst.target_count() > 16)
      throw BudgetError("sequential solver supports at most 16 targets");
    for (Vertex t : inst.targets())
      if (inst.deadline(t) > 250)
        throw BudgetError("sequential solver supports deadlines up to 250");
    targets_ = inst.targets();
  }

  // Value with the Attacker to act: `active` holds (target ordinal,
  // residual turns) pairs, sorted by ordinal; an active target is caught by
  // arriving on it within `residual` moves. `m` resources are undeployed.
  double value(Vertex pos, std::vector<std::pair<int, int>> active, int m, std::uint32_t lost) {
    double charge = normalize_active(pos, active, lost);
    if (active.empty()) return charge + quiet_value(pos, m, lost);
    if (m == 0) return charge + coverage_value(pos, active);
    Key key = make_key(pos, active, m, lost);
    if (const double* hit = memo_.find(key)) return charge + *hit;
    charge_states(1);
    double v = level_value(pos, active, m, lost, nullptr);
    memo_.insert(key, v);
    return charge + v;
  }

  // The walk the patroller plays at the top level, for reporting.
  std::vector<Vertex> level_walk(Vertex pos, std::vector<std::pair<int, int>> active, int m,
                                 std::uint32_t lost) {
    normalize_active(pos, active, lost);
    std::vector<Vertex> walk;
    if (active.empty()) return {pos};
    if (m == 0) {
      CoveringRoute r = coverage_route(pos, active);
      return instantiate_route(r.route, dist_);
    }
    level_value(pos, active, m, lost, &walk);
    return walk;
  }

  std::uint64_t states_used() const { return states_; }

 private:
  static constexpr double kInfU = 1e300;

  // Standing on an active target catches it, and an attack the patroller
  // can no longer reach in time is charged as lost on the spot; both
  // collapse attack-timing state without changing any value. Returns the
  // charge for newly decided losses.
  double normalize_active(Vertex pos, std::vector<std::pair<int, int>>& active,
                          std::uint32_t& lost) {
    std::vector<std::pair<int, int>> keep;
    keep.reserve(active.size());
    double charge = 0.0;
    for (auto [o, r] : active) {
      Vertex t = targets_[static_cast<size_t>(o)];
      if (t == pos) continue;  // caught
      if (dist_.dist(pos, t) > r) {
        charge -= inst_.value(t);
        lost |= (1u << o);
        continue;
      }
      keep.emplace_back(o, r);
    }
    std::sort(keep.begin(), keep.end());
    active = std::move(keep);
    return charge;
  }

  // No attack is burning: waiting repeats the state, so the Attacker opens
  // now with any non-empty wave or the game ends.
  double quiet_value(Vertex pos, int m, std::uint32_t lost) {
    std::uint32_t attackable = all_mask() & ~lost;
    if (m == 0 || attackable == 0) return 0.0;
    Key key = make_key(pos, {}, m, lost);
    if (const double* hit = memo_.find(key)) return *hit;
    charge_states(1);
    double best = 0.0;
    std::uint32_t s = (0u - attackable) & attackable;
    while (true) {
      if (popcount(s) <= m) best = std::min(best, open_wave(pos, {}, m, lost, s));
      s = (s - attackable) & attackable;
      if (s == 0) break;
    }
    memo_.insert(key, best);
    return best;
  }

  // Attacker deploys wave `s` on top of the ticked active set; resources
  // aimed at the patroller's own vertex are caught on the spot.
  double open_wave(Vertex pos, const std::vector<std::pair<int, int>>& active, int m,
                   std::uint32_t lost, std::uint32_t s) {
    std::vector<std::pair<int, int>> merged = active;
    int spent = 0;
    for (int o = 0; o < static_cast<int>(targets_.size()); ++o) {
      if (!(s & (1u << o))) continue;
      ++spent;
      Vertex t = targets_[static_cast<size_t>(o)];
      if (t == pos) continue;  // instant catch
      merged.emplace_back(o, inst_.deadline(t));
    }
    std::sort(merged.begin(), merged.end());
    return value(pos, std::move(merged), m - spent, lost);
  }

  // Pure coverage with no resources left: the covering-route DP.
  double coverage_value(Vertex pos, const std::vector<std::pair<int, int>>& active) {
    return coverage_route(pos, active).utility;
  }
  CoveringRoute coverage_route(Vertex pos, const std::vector<std::pair<int, int>>& active) {
    std::vector<AttackedTarget> att;
    att.reserve(active.size());
    for (auto [o, r] : active) att.push_back({targets_[static_cast<size_t>(o)], r});
    return solve_srg(pos, att, inst_, dist_);
  }

  struct Cell {
    double u = -kInfU;
    bool reach = false;
    Vertex parent = -1;
    std::uint32_t parent_caught = 0;
  };

  // The level grid. `walk_out`, when set, replays the argmax walk instead of
  // only computing the value.
  double level_value(Vertex pos, const std::vector<std::pair<int, int>>& wave, int m,
                     std::uint32_t lost, std::vector<Vertex>* walk_out) {
    const int n = inst_.vertex_count();
    const int w = static_cast<int>(wave.size());
    const std::uint32_t cfull = (1u << w) - 1u;
    int horizon = 0;
    for (auto [o, r] : wave) {
      (void)o;
      horizon = std::max(horizon, r + 1);
    }
    charge_states(static_cast<std::uint64_t>(n) * (cfull + 1ull) *
                  static_cast<std::uint64_t>(horizon + 1) / 8 + 1);

    std::uint32_t wave_mask = 0;
    for (auto [o, r] : wave) {
      (void)r;
      wave_mask |= (1u << o);
    }

    // expired_at[j]: wave indices whose window closes before column j
    auto expired_at = [&](int j) {
      std::uint32_t e = 0;
      for (int i = 0; i < w; ++i)
        if (wave[static_cast<size_t>(i)].second < j) e |= (1u << i);
      return e;
    };
    auto charge_of = [&](std::uint32_t idxmask) {
      double c = 0;
      for (int i = 0; i < w; ++i)
        if (idxmask & (1u << i))
          c += inst_.value(targets_[static_cast<size_t>(wave[static_cast<size_t>(i)].first)]);
      return c;
    };
    auto lost_bits_of = [&](std::uint32_t idxmask) {
      std::uint32_t g = 0;
      for (int i = 0; i < w; ++i)
        if (idxmask & (1u << i)) g |= (1u << wave[static_cast<size_t>(i)].first);
      return g;
    };

    // Worst further attack launched from cell (x, j, caught): ticked alive
    // targets plus any non-empty wave on the attackable set.
    auto event_option = [&](Vertex x, int j, std::uint32_t caught) {
      std::uint32_t expired = expired_at(j) & ~caught;
      std::uint32_t alive_idx = cfull & ~caught & ~expired;
      std::vector<std::pair<int, int>> ticked;
      std::uint32_t alive_bits = 0;
      for (int i = 0; i < w; ++i)
        if (alive_idx & (1u << i)) {
          ticked.emplace_back(wave[static_cast<size_t>(i)].first,
                              wave[static_cast<size_t>(i)].second - j);
          alive_bits |= (1u << wave[static_cast<size_t>(i)].first);
        }
      std::uint32_t lost2 = lost | lost_bits_of(expired);
      std::uint32_t attackable = all_mask() & ~lost2 & ~alive_bits;
      if (attackable == 0) return kInfU;
      double charge = charge_of(expired);
      double best = kInfU;
      std::uint32_t s = (0u - attackable) & attackable;
      while (true) {
        if (popcount(s) <= m)
          best = std::min(best, -charge + open_wave(x, ticked, m, lost2, s));
        s = (s - attackable) & attackable;
        if (s == 0) break;
      }
      return best;
    };

    auto terminal_value = [&](Vertex x, int j, std::uint32_t caught) {
      std::uint32_t expired = expired_at(j) & ~caught;
      double charge = charge_of(expired);
      return -charge + quiet_value(x, m, lost | lost_bits_of(expired));
    };

    auto idx = [&](Vertex x, std::uint32_t c) {
      return static_cast<size_t>(x) * (cfull + 1ull) + c;
    };
    // Per-depth scratch grids; levels nest through attack events.
    struct DepthGuard {
      int& d;
      ~DepthGuard() { --d; }
    };
    if (depth_ >= static_cast<int>(scratch_.size())) scratch_.emplace_back();
    std::vector<std::vector<Cell>>& grid = scratch_[static_cast<size_t>(depth_)];
    ++depth_;
    DepthGuard guard{depth_};
    grid.resize(static_cast<size_t>(horizon) + 1);
    for (auto& row : grid) row.assign(static_cast<size_t>(n) * (cfull + 1ull), Cell{});

    auto alive_of = [&](int j, std::uint32_t caught) {
      return cfull & ~caught & ~(expired_at(j) & ~caught);
    };

    std::uint32_t caught0 = 0;
    for (int i = 0; i < w; ++i)
      if (targets_[static_cast<size_t>(wave[static_cast<size_t>(i)].first)] == pos)
        caught0 |= (1u << i);  // normalized away already, kept for safety
    {
      Cell& c0 = grid[0][idx(pos, caught0)];
      c0.reach = true;
      c0.u = event_option(pos, 0, caught0);
    }

    double best = -kInfU;
    Vertex best_x = pos;
    int best_j = 0;
    std::uint32_t best_c = caught0;

    for (int j = 0; j <= horizon; ++j) {
      for (Vertex x = 0; x < n; ++x) {
        for (std::uint32_t c = 0; c <= cfull; ++c) {
          Cell& cell = grid[static_cast<size_t>(j)][idx(x, c)];
          if (!cell.reach) continue;
          if (alive_of(j, c) == 0) {
            double v = std::min(cell.u, terminal_value(x, j, c));
            if (v > best) {
              best = v;
              best_x = x;
              best_j = j;
              best_c = c;
            }
            continue;  // level resolved; later columns are quiet wandering
          }
          if (j == horizon) continue;
          auto expand = [&](Vertex y) {
            std::uint32_t c2 = c;
            for (int i = 0; i < w; ++i)
              if (!(c & (1u << i)) &&
                  targets_[static_cast<size_t>(wave[static_cast<size_t>(i)].first)] == y &&
                  wave[static_cast<size_t>(i)].second >= j + 1)
                c2 |= (1u << i);
            double ev = event_option(y, j + 1, c2);
            double cand = std::min(cell.u, ev);
            Cell& dst = grid[static_cast<size_t>(j) + 1][idx(y, c2)];
            if (!dst.reach || cand > dst.u) {
              dst.reach = true;
              dst.u = cand;
              dst.parent = x;
              dst.parent_caught = c;
            }
          };
          expand(x);
          for (auto [nb, wt] : inst_.neighbors(x)) {
            (void)wt;
            expand(nb);
          }
        }
      }
    }

    if (walk_out) {
      std::vector<Vertex> walk(static_cast<size_t>(best_j) + 1);
      Vertex x = best_x;
      std::uint32_t c = best_c;
      for (int j = best_j; j >= 0; --j) {
        walk[static_cast<size_t>(j)] = x;
        const Cell& cell = grid[static_cast<size_t>(j)][idx(x, c)];
        x = cell.parent;
        c = cell.parent_caught;
      }
      while (walk.size() >= 2 && walk.back() == walk[walk.size() - 2]) walk.pop_back();
      *walk_out = std::move(walk);
    }
    return best;
  }

  std::uint32_t all_mask() const { return (1u << targets_.size()) - 1u; }
  static int popcount(std::uint32_t x) { return __builtin_popcount(x); }

  void charge_states(std::uint64_t amount) {
    states_ += amount;
    if (states_ > budget_.max_states)
      throw BudgetError("sequential solver exceeded its state budget of " +
                        std::to_string(budget_.max_states));
  }

  struct Key {
    std::uint64_t a = 0, b = 0, c = 0;
    bool operator==(const Key& o) const { return a == o.a && b == o.b && c == o.c; }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return static_cast<size_t>(splitmix64(k.a ^ splitmix64(k.b ^ splitmix64(k.c))));
    }
  };
  Key make_key(Vertex pos, const std::vector<std::pair<int, int>>& active, int m,
               std::uint32_t lost) const {
    Key k;
    std::uint32_t amask = 0;
    for (auto [o, r] : active) {
      (void)r;
      amask |= (1u << o);
    }
    k.a = static_cast<std::uint64_t>(static_cast<std::uint32_t>(pos)) |
          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m)) << 20) |
          (static_cast<std::uint64_t>(lost) << 28) | (static_cast<std::uint64_t>(amask) << 44);
    int i = 0;
    for (auto [o, r] : active) {
      (void)o;
      std::uint64_t byte = static_cast<std::uint64_t>(r + 1);
      if (i < 8)
        k.b |= byte << (8 * i);
      else
        k.c |= byte << (8 * (i - 8));
      ++i;
    }
    return k;
  }

  const PatrolInstance& inst_;
  const DistanceMatrix& dist_;
  SequentialBudget budget_;
  std::vector<Vertex> targets_;
  FlatMemo<Key, KeyHash> memo_;
  std::deque<std::vector<std::vector<Cell>>> scratch_;
  int depth_ = 0;
  std::uint64_t states_ = 0;
};

struct MultiAnswer {
  double value = 0.0;
  Vertex placement = -1;
  std::vector<Vertex> path;  // top-level walk until the first-wave resolves
};

// Response to a first wave of k-1 simultaneous attacks with one resource
// still undeployed; the k = 2 case collapses to path_finder's problem.
inline MultiAnswer path_finder_multi(Vertex v_s, const std::vector<Vertex>& first_wave,
                                     const PatrolInstance& inst, const DistanceMatrix& dist,
                                     int k, const SequentialBudget& budget = {}) {
  if (k < 2) throw ValidationError("path_finder_multi requires k >= 2");
  if (static_cast<int>(first_wave.size()) != k - 1)
    throw ValidationError("first wave must deploy k - 1 resources");
  SequentialSolver solver(inst, dist, budget);
  std::vector<std::pair<int, int>> active;
  for (Vertex t : first_wave) {
    if (!inst.is_target(t)) throw ValidationError("first wave contains a non-target");
    active.emplace_back(inst.target_ordinal(t), inst.deadline(t));
  }
  MultiAnswer ans;
  ans.placement = v_s;
  ans.value = solver.value(v_s, active, 1, 0);
  ans.path = solver.level_walk(v_s, active, 1, 0);
  return ans;
}

// Equilibrium value and placement for k sequential attacking resources.
// k = 1 and k = 2 delegate to the dedicated solvers; the general recursion
// handles the rest.
inline MultiAnswer solve_sequential(const PatrolInstance& inst, const DistanceMatrix& dist, int k,
                                    std::optional<Vertex> start = std::nullopt,
                                    const SequentialBudget& budget = {}) {
  if (k < 1) throw ValidationError("k >= 1");
  if (!inst.unit_weight())
    throw ValidationError("solve_sequential requires a unit-time instance");

  std::vector<Vertex> starts;
  if (start) starts = {*start};
  else if (auto s = inst.defender_start()) starts = {*s};
  else for (Vertex v = 0; v < inst.vertex_count(); ++v) starts.push_back(v);

  MultiAnswer ans;
  if (k == 1) {
    Vertex best_v = starts.front();
    double best_u = -1e300;
    for (Vertex v : starts) {
      double worst = 0.0;
      for (Vertex t : inst.targets())
        if (dist.dist(v, t) > inst.deadline(t)) worst = std::min(worst, -inst.value(t));
      if (worst > best_u) {
        best_u = worst;
        best_v = v;
      }
    }
    ans.value = best_u;
    ans.placement = best_v;
    ans.path = {best_v};
    return ans;
  }
  if (k == 2) {
    EquilibriumAnswer a = best_placement_k2(inst, dist, start, budget.placement);
    ans.value = a.value;
    ans.placement = a.placement;
    ans.path = a.path;
    return ans;
  }
  SequentialSolver solver(inst, dist, budget);
  ans.value = -1e300;
  for (Vertex v : starts) {
    double val = solver.value(v, {}, k, 0);
    if (val > ans.value) {
      ans.value = val;
      ans.placement = v;
    }
  }
  ans.path = {ans.placement};
  return ans;
}

}  // namespace patrol
