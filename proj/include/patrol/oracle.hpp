#pragma once

// Exact zero-sum value of the full alternating game by backward induction,
// at desk scale. Used to validate every structured solver and to evaluate
// committed Defender policies under a wrong resource guess.
//
// Turn structure: the Attacker acts first (attacks a set of unresolved,
// inactive targets or waits), then the patroller moves one edge or stays,
// then attacks resolve: arriving on an active target within its penetration
// window catches the resource; a window that closes uncaught compromises the
// target, which afterwards is a vertex without value. A caught target can be
// attacked again. Standing on a target when it is attacked catches the
// resource on the spot. With no attack active, waiting repeats the state, so
// the Attacker either opens an attack immediately or the game ends.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "patrol/distance.hpp"
#include "patrol/errors.hpp"
#include "patrol/flat_map.hpp"
#include "patrol/instance.hpp"
#include "patrol/rng.hpp"

namespace patrol {

struct OracleBudget {
  int max_vertices = 9;  // after unit-time expansion
  int max_k = 3;
  std::uint64_t max_states = 200'000'000;
};

struct OracleTraceStep {
  int turn = 0;
  std::vector<Vertex> attacked;  // targets newly attacked this turn
  Vertex moved_to = -1;          // patroller position after her action
  std::vector<Vertex> caught;    // attacks caught this turn
  std::vector<Vertex> lost;      // targets compromised this turn
};

struct OracleResult {
  double value = 0.0;
  Vertex placement = -1;
  std::vector<OracleTraceStep> trace;  // principal variation from the placement
};

// Defender-visible game state used by policies and by the oracle itself.
struct GameState {
  Vertex position = -1;
  std::vector<std::pair<int, int>> active;  // (target ordinal, elapsed turns), sorted
  std::uint32_t lost_mask = 0;              // over target ordinals
  int resources_used = 0;                   // Attacker resources deployed so far
};

// Outcome of one patroller move over an active set of (ordinal, elapsed)
// attacks: catches on arrival, expiries charged.
struct MoveResolution {
  std::vector<std::pair<int, int>> active;
  std::vector<int> caught;  // target ordinals
  double charge = 0.0;
  std::uint32_t lost_bits = 0;
};

inline MoveResolution resolve_move(const PatrolInstance& inst, const std::vector<Vertex>& targets,
                                   Vertex to, const std::vector<std::pair<int, int>>& active) {
  MoveResolution out;
  for (auto [o, e] : active) {
    Vertex t = targets[static_cast<size_t>(o)];
    int e2 = e + 1;
    if (t == to) {
      out.caught.push_back(o);
      continue;
    }
    if (e2 >= inst.deadline(t)) {
      out.charge += inst.value(t);
      out.lost_bits |= (1u << o);
    } else {
      out.active.emplace_back(o, e2);
    }
  }
  return out;
}

class OracleEngine {
 public:
  OracleEngine(const PatrolInstance& inst, std::uint64_t max_states = 200'000'000)
      : inst_(inst), dist_(all_pairs_shortest_paths(inst)), max_states_(max_states) {
    if (inst.target_count() > 16)
      throw BudgetError("oracle supports at most 16 targets");
    for (Vertex t : inst.targets())
      if (inst.deadline(t) > 250) throw BudgetError("oracle supports deadlines up to 250");
    targets_ = inst.targets();
  }

  const PatrolInstance& instance() const { return inst_; }

  // Exact value with the Attacker to act, `m` resources left undeployed.
  // `active` holds (target ordinal, elapsed) pairs sorted by ordinal.
  double value(Vertex pos, const std::vector<std::pair<int, int>>& active, int m,
               std::uint32_t lost) {
    // An active attack the patroller can no longer reach in time is already
    // decided; charging it now collapses attack-timing state without
    // changing any value.
    double doomed_charge = 0.0;
    std::vector<std::pair<int, int>> live;
    std::uint32_t lost2 = lost;
    live.reserve(active.size());
    for (auto [o, e] : active) {
      Vertex t = targets_[static_cast<size_t>(o)];
      if (dist_.dist(pos, t) > inst_.deadline(t) - e) {
        doomed_charge -= inst_.value(t);
        lost2 |= (1u << o);
      } else {
        live.emplace_back(o, e);
      }
    }
    return doomed_charge + value_normalized(pos, live, m, lost2);
  }

  double value_normalized(Vertex pos, const std::vector<std::pair<int, int>>& active, int m,
                          std::uint32_t lost) {
    Key key = make_key(pos, active, m, lost);
    if (const double* hit = memo_.find(key)) return *hit;
    if (memo_.size() >= max_states_)
      throw BudgetError("oracle state budget of " + std::to_string(max_states_) + " exceeded");

    std::uint32_t active_mask = 0;
    for (auto [o, e] : active) {
      (void)e;
      active_mask |= (1u << o);
    }
    std::uint32_t attackable = all_targets_mask() & ~lost & ~active_mask;

    double best;
    if (active.empty() && (m == 0 || attackable == 0)) {
      best = 0.0;  // game over: no threat can ever materialize
    } else {
      best = 1e300;
      // Ascending submask enumeration; the empty set (waiting) is legal only
      // while an attack is active, otherwise it would repeat the state.
      std::uint32_t s = 0;
      while (true) {
        if ((s != 0 || !active.empty()) && popcount(s) <= m)
          best = std::min(best, after_attack(pos, active, m, lost, s));
        s = (s - attackable) & attackable;
        if (s == 0) break;
      }
      if (best > 0) best = 0.0;  // waiting forever is always available in spirit
    }
    memo_.insert(key, best);
    return best;
  }

  // The believed-optimal patroller move: stay unless a move is strictly
  // better, then the smallest vertex index. This is the move rule committed
  // policies follow.
  Vertex defender_move(Vertex pos, const std::vector<std::pair<int, int>>& active, int m,
                       std::uint32_t lost) {
    double stay = move_value(pos, active, m, lost);
    Vertex best = pos;
    double best_v = stay;
    for (auto [nb, w] : inst_.neighbors(pos)) {
      (void)w;
      double v = move_value(nb, active, m, lost);
      if (v > best_v + kTieEps) {
        best_v = v;
        best = nb;
      }
    }
    return best;
  }

  // Value of moving to `to`, resolving catches and expiries, and continuing.
  double move_value(Vertex to, const std::vector<std::pair<int, int>>& active, int m,
                    std::uint32_t lost) {
    std::vector<std::pair<int, int>> next;
    next.reserve(active.size());
    double charge = 0.0;
    std::uint32_t lost2 = lost;
    for (auto [o, e] : active) {
      Vertex t = targets_[static_cast<size_t>(o)];
      int e2 = e + 1;
      if (t == to) continue;  // caught: e2 <= deadline always holds for live attacks
      if (e2 >= inst_.deadline(t)) {
        charge += inst_.value(t);
        lost2 |= (1u << o);
      } else {
        next.emplace_back(o, e2);
      }
    }
    return -charge + value(to, next, m, lost2);
  }

  // Attacker plays `s` (possibly empty); resources attacking the patroller's
  // own vertex are caught on the spot. Returns the value after the
  // patroller's best reply.
  double after_attack(Vertex pos, const std::vector<std::pair<int, int>>& active, int m,
                      std::uint32_t lost, std::uint32_t s) {
    std::vector<std::pair<int, int>> merged = active;
    int spent = 0;
    for (int o = 0; o < static_cast<int>(targets_.size()); ++o) {
      if (!(s & (1u << o))) continue;
      ++spent;
      if (targets_[static_cast<size_t>(o)] == pos) continue;  // instant catch
      merged.emplace_back(o, 0);
    }
    std::sort(merged.begin(), merged.end());
    int m2 = m - spent;
    double best = move_value(pos, merged, m2, lost);
    for (auto [nb, w] : inst_.neighbors(pos)) {
      (void)w;
      best = std::max(best, move_value(nb, merged, m2, lost));
    }
    return best;
  }

  // Principal variation from a placement, replaying canonical argmin/argmax
  // choices (ascending attack submasks; stay-first moves).
  std::vector<OracleTraceStep> principal_variation(Vertex placement, int k, int max_turns = 64) {
    std::vector<OracleTraceStep> trace;
    Vertex pos = placement;
    std::vector<std::pair<int, int>> active;
    int m = k;
    std::uint32_t lost = 0;
    for (int turn = 0; turn < max_turns; ++turn) {
      std::uint32_t active_mask = 0;
      for (auto [o, e] : active) {
        (void)e;
        active_mask |= (1u << o);
      }
      std::uint32_t attackable = all_targets_mask() & ~lost & ~active_mask;
      if (active.empty() && (m == 0 || attackable == 0)) break;

      double node = value(pos, active, m, lost);
      if (active.empty() && node >= -kTieEps) break;  // nothing left worth attacking
      // Attacker: first canonical submask achieving the node value.
      std::uint32_t chosen = 0;
      bool found = false;
      std::uint32_t s = 0;
      while (true) {
        if ((s != 0 || !active.empty()) && popcount(s) <= m &&
            after_attack(pos, active, m, lost, s) <= node + kTieEps) {
          chosen = s;
          found = true;
          break;
        }
        s = (s - attackable) & attackable;
        if (s == 0) break;
      }
      if (!found && node >= -kTieEps) break;  // attacker declines to play on

      OracleTraceStep step;
      step.turn = turn;
      std::vector<std::pair<int, int>> merged = active;
      int spent = 0;
      for (int o = 0; o < static_cast<int>(targets_.size()); ++o) {
        if (!(chosen & (1u << o))) continue;
        step.attacked.push_back(targets_[static_cast<size_t>(o)]);
        ++spent;
        if (targets_[static_cast<size_t>(o)] == pos) {
          step.caught.push_back(pos);
          continue;
        }
        merged.emplace_back(o, 0);
      }
      std::sort(merged.begin(), merged.end());
      m -= spent;

      // Defender: stay unless strictly better.
      double stay = move_value(pos, merged, m, lost);
      Vertex to = pos;
      double best_v = stay;
      for (auto [nb, w] : inst_.neighbors(pos)) {
        (void)w;
        double v = move_value(nb, merged, m, lost);
        if (v > best_v + kTieEps) {
          best_v = v;
          to = nb;
        }
      }
      step.moved_to = to;

      std::vector<std::pair<int, int>> next;
      for (auto [o, e] : merged) {
        Vertex t = targets_[static_cast<size_t>(o)];
        int e2 = e + 1;
        if (t == to) {
          step.caught.push_back(t);
          continue;
        }
        if (e2 >= inst_.deadline(t)) {
          step.lost.push_back(t);
          lost |= (1u << o);
        } else {
          next.emplace_back(o, e2);
        }
      }
      active = std::move(next);
      pos = to;
      trace.push_back(std::move(step));
    }
    return trace;
  }

  std::uint64_t states_explored() const { return memo_.size(); }

  std::uint32_t all_targets_mask() const {
    return targets_.size() >= 32 ? 0xffffffffu : ((1u << targets_.size()) - 1u);
  }

 private:
  // Ties are exact in the dyadic-value test regime; the epsilon only guards
  // replay against benign float noise from generator epsilons.
  static constexpr double kTieEps = 1e-12;

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
    for (auto [o, e] : active) {
      (void)e;
      amask |= (1u << o);
    }
    k.a = static_cast<std::uint64_t>(static_cast<std::uint32_t>(pos)) |
          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m)) << 20) |
          (static_cast<std::uint64_t>(lost) << 28) | (static_cast<std::uint64_t>(amask) << 44);
    int i = 0;
    for (auto [o, e] : active) {
      (void)o;
      std::uint64_t byte = static_cast<std::uint64_t>(e + 1);
      if (i < 8)
        k.b |= byte << (8 * i);
      else
        k.c |= byte << (8 * (i - 8));
      ++i;
    }
    return k;
  }

  static int popcount(std::uint32_t x) { return __builtin_popcount(x); }

  const PatrolInstance& inst_;
  DistanceMatrix dist_;
  std::vector<Vertex> targets_;
  std::uint64_t max_states_;
  FlatMemo<Key, KeyHash> memo_;
};

// Exact equilibrium value and best placement. The instance is expanded to
// unit time first; placements range over all vertices unless the instance
// pins defender_start.
inline OracleResult game_tree_oracle(const PatrolInstance& raw, int k,
                                     const OracleBudget& budget = {}) {
  if (k < 1) throw ValidationError("k >= 1");
  PatrolInstance inst = expand_to_unit_time(raw);
  if (inst.vertex_count() > budget.max_vertices)
    throw BudgetError("oracle guard: " + std::to_string(inst.vertex_count()) +
                      " vertices after expansion exceeds " + std::to_string(budget.max_vertices));
  if (k > budget.max_k)
    throw BudgetError("oracle guard: k = " + std::to_string(k) + " exceeds " +
                      std::to_string(budget.max_k));
  OracleEngine eng(inst, budget.max_states);

  std::vector<Vertex> starts;
  if (auto s = inst.defender_start()) starts = {*s};
  else for (Vertex v = 0; v < inst.vertex_count(); ++v) starts.push_back(v);

  OracleResult out;
  out.value = -1e300;
  for (Vertex v : starts) {
    double val = eng.value(v, {}, k, 0);
    if (val > out.value + 1e-12) {
      out.value = val;
      out.placement = v;
    }
  }
  out.trace = eng.principal_variation(out.placement, k);
  return out;
}

}  // namespace patrol
