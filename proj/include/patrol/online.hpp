#pragma once

// Online Defender policies that see only raised alarms and never know the
// Attacker's resource count: the unconditional greedy responder and the
// fair-coin responder. Simulation against attack scripts, exact evaluation
// against adaptive adversaries (coin flips integrated exactly), the
// deterministic lower-bound family, and the randomized competitive factor
// in closed form.
//
// Solvers here require unit-time instances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "patrol/covering.hpp"
#include "patrol/distance.hpp"
#include "patrol/errors.hpp"
#include "patrol/instance.hpp"
#include "patrol/multi_attack.hpp"
#include "patrol/rng.hpp"

namespace patrol {

enum class PolicyKind { greedy_deterministic, coin_flip };

struct OnlinePolicy {
  PolicyKind kind = PolicyKind::greedy_deterministic;
  Vertex home = -1;
  double respond_probability = 1.0;  // 1 for greedy, 1/2 for the fair coin
};

inline OnlinePolicy make_greedy_policy(Vertex home) {
  return {PolicyKind::greedy_deterministic, home, 1.0};
}
inline OnlinePolicy make_coin_policy(Vertex home) {
  return {PolicyKind::coin_flip, home, 0.5};
}

// Non-adaptive adversary script.
struct AttackStream {
  std::vector<AttackEvent> events;  // strictly increasing turns, disjoint resource use

  int resources_used() const {
    int n = 0;
    for (const auto& e : events) n += static_cast<int>(e.targets.size());
    return n;
  }
};

struct CompetitiveReport {
  double value = 0.0;    // policy value (expectation for the coin policy)
  double v_star = 0.0;   // clairvoyant equilibrium value
  double gamma = 0.0;    // (W + value) / (W + v_star) on the top-k scale
  bool gamma_defined = true;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double std_error = 0.0;  // Monte-Carlo only
};

// ---------------------------------------------------------------------------
// Turn-by-turn simulation
// ---------------------------------------------------------------------------

namespace detail {

struct SimState {
  Vertex pos = -1;
  std::vector<Vertex> route;               // remaining steps, front is next
  std::vector<std::pair<int, int>> active; // (target ordinal, elapsed)
  std::uint32_t lost = 0;
  std::uint32_t saved_attacks = 0;         // targets whose attack was caught at least once
};

// Commit to the best covering route over the active set from the current
// position; the walk excludes the current vertex.
inline std::vector<Vertex> srg_walk(const SimState& s, const PatrolInstance& inst,
                                    const DistanceMatrix& dist) {
  std::vector<AttackedTarget> att;
  for (auto [o, e] : s.active) {
    Vertex t = inst.targets()[static_cast<size_t>(o)];
    att.push_back({t, inst.deadline(t) - e});
  }
  CoveringRoute r = solve_srg(s.pos, att, inst, dist);
  std::vector<Vertex> walk = instantiate_route(r.route, dist);
  if (!walk.empty()) walk.erase(walk.begin());
  return walk;
}

// One turn: the new attacks land, the policy decides (respond == true
// commits to a fresh covering route, otherwise the patroller abandons any
// route and heads home), the patroller moves, attacks resolve.
inline void sim_turn(SimState& s, const std::vector<Vertex>& new_attacks, bool respond,
                     bool had_alarm, const OnlinePolicy& policy, const PatrolInstance& inst,
                     const DistanceMatrix& dist) {
  for (Vertex t : new_attacks) {
    int o = inst.target_ordinal(t);
    if (t == s.pos) {
      s.saved_attacks |= (1u << o);  // caught on the spot
      continue;
    }
    s.active.emplace_back(o, 0);
  }
  std::sort(s.active.begin(), s.active.end());
  if (had_alarm) {
    if (respond)
      s.route = srg_walk(s, inst, dist);
    else
      s.route.clear();  // stand: return home and wait
  }
  // move
  Vertex to = s.pos;
  if (!s.route.empty()) {
    to = s.route.front();
    s.route.erase(s.route.begin());
  } else if (s.pos != policy.home) {
    to = dist.next_hop(s.pos, policy.home);
  }
  // resolve
  std::vector<std::pair<int, int>> next;
  for (auto [o, e] : s.active) {
    Vertex t = inst.targets()[static_cast<size_t>(o)];
    int e2 = e + 1;
    if (t == to) {
      s.saved_attacks |= (1u << o);
      continue;
    }
    if (e2 >= inst.deadline(t)) {
      s.lost |= (1u << o);
    } else {
      next.emplace_back(o, e2);
    }
  }
  s.active = std::move(next);
  s.pos = to;
}

}  // namespace detail

// Runs the policy against a scripted attack stream. Deterministic in
// (policy, stream, seed); the seed only feeds the coin. In the outcome,
// `saved` holds every target that was not compromised.
inline GameOutcome simulate_online(const OnlinePolicy& policy, const PatrolInstance& inst,
                                   const DistanceMatrix& dist, const AttackStream& stream,
                                   std::uint64_t seed) {
  if (!inst.unit_weight())
    throw ValidationError("simulate_online requires a unit-time instance");
  if (policy.home < 0 || policy.home >= inst.vertex_count())
    throw ValidationError("policy home must be a vertex of the instance");
  std::mt19937_64 rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  detail::SimState s;
  s.pos = policy.home;
  size_t next_event = 0;
  int turn = 0;
  while (next_event < stream.events.size() || !s.active.empty()) {
    std::vector<Vertex> fresh;
    if (next_event < stream.events.size() && stream.events[next_event].turn == turn) {
      fresh = stream.events[next_event].targets;
      ++next_event;
    }
    // a lost target is a vertex without value; attacks on it are ignored
    std::erase_if(fresh, [&](Vertex t) { return s.lost & (1u << inst.target_ordinal(t)); });
    bool alarm = !fresh.empty();
    bool respond = true;
    if (alarm && policy.kind == PolicyKind::coin_flip)
      respond = unit(rng) < policy.respond_probability;
    detail::sim_turn(s, fresh, respond, alarm, policy, inst, dist);
    ++turn;
    if (turn > 1'000'000) throw BudgetError("simulation exceeded one million turns");
  }

  GameOutcome out;
  for (Vertex t : inst.targets()) {
    if (s.lost & (1u << inst.target_ordinal(t)))
      out.lost.push_back(t);
    else
      out.saved.push_back(t);
  }
  out.defender_utility = outcome_utility(out.lost, inst);
  return out;
}

// ---------------------------------------------------------------------------
// Worst-case instance generators (section-7.2 families)
// ---------------------------------------------------------------------------

// A hub connected to max{1, k-1} quick targets by unit edges and to one far
// target t_f whose distance and deadline are both 2k. Every deterministic
// responder that chases t_f first is exploited down to a 1/(k-1) factor.
inline PatrolInstance gen_lower_bound_instance(int k) {
  if (k < 1) throw ValidationError("k >= 1");
  std::vector<std::string> names = {"v", "tf"};
  std::vector<std::tuple<std::string, std::string, int>> edges = {{"v", "tf", 2 * k}};
  std::vector<std::pair<std::string, TargetSpec>> targets;
  targets.emplace_back("tf", TargetSpec{1.0, 2 * k});
  int spokes = std::max(1, k - 1);
  int d = std::max(1, 2 * k - 1);
  for (int i = 1; i <= spokes; ++i) {
    std::string t = "t" + std::to_string(i);
    names.push_back(t);
    targets.emplace_back(t, TargetSpec{1.0, d});
    edges.emplace_back("v", t, 1);
  }
  return PatrolInstance::build(std::move(names), edges, targets, k, std::nullopt);
}

// Clique of k-h+1 vertices holding k-h targets with deadline k-h, plus h
// targets with deadline k at the far end of weight-k spokes.
inline PatrolInstance gen_randomized_worstcase_instance(int k, int h) {
  if (!(1 <= h && h < k)) throw ValidationError("requires 1 <= h < k");
  std::vector<std::string> names = {"v"};
  std::vector<std::tuple<std::string, std::string, int>> edges;
  std::vector<std::pair<std::string, TargetSpec>> targets;
  std::vector<std::string> clique = {"v"};
  for (int i = 1; i <= k - h; ++i) {
    std::string tc = "tc" + std::to_string(i);
    names.push_back(tc);
    clique.push_back(tc);
    targets.emplace_back(tc, TargetSpec{1.0, k - h});
  }
  for (size_t a = 0; a < clique.size(); ++a)
    for (size_t b = a + 1; b < clique.size(); ++b) edges.emplace_back(clique[a], clique[b], 1);
  for (int i = 1; i <= h; ++i) {
    std::string to = "to" + std::to_string(i);
    names.push_back(to);
    targets.emplace_back(to, TargetSpec{1.0, k});
    edges.emplace_back("v", to, k);
  }
  return PatrolInstance::build(std::move(names), edges, targets, k, std::nullopt);
}

// ---------------------------------------------------------------------------
// Competitive factors
// ---------------------------------------------------------------------------

// Expected competitive factor of the fair-coin responder on the (k, h)
// worst-case family.
inline double gamma_r_closed_form(int k, int h) {
  if (!(1 <= h && h < k)) throw ValidationError("requires 1 <= h < k");
  double pow_h = std::ldexp(1.0, -h);  // (1/2)^h
  return (1.0 - 0.5 * pow_h) / static_cast<double>(k - h) + pow_h;
}

inline double gamma_d_closed_form(int k) {
  if (k < 2) throw ValidationError("requires k >= 2");
  return 1.0 / static_cast<double>(k - 1);
}

// Two-decimal display rounding with ties toward zero, matching the published
// table (0.875 prints as 0.87, 0.125 as 0.12).
inline std::string format_two_decimals_half_down(double x) {
  double scaled = x * 100.0;
  double floor_part = std::floor(scaled);
  double frac = scaled - floor_part;
  double cents = (frac > 0.5 + 1e-9) ? floor_part + 1.0 : floor_part;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", cents / 100.0);
  return buf;
}

struct CompetitiveRow {
  int k = 0;
  double gamma_r = 0.0;
  int h_min = 0;  // the h attaining gamma_r
  double gamma_d = 0.0;
};

// Gamma_r minimized over h against Gamma_d = 1/(k-1), per k.
inline std::vector<CompetitiveRow> competitive_table(const std::vector<int>& k_values) {
  std::vector<CompetitiveRow> rows;
  for (int k : k_values) {
    if (k < 2) throw ValidationError("table requires k >= 2");
    CompetitiveRow row;
    row.k = k;
    row.gamma_d = gamma_d_closed_form(k);
    row.gamma_r = 1e300;
    for (int h = 1; h < k; ++h) {
      double g = gamma_r_closed_form(k, h);
      if (g < row.gamma_r) {
        row.gamma_r = g;
        row.h_min = h;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Policy evaluation
// ---------------------------------------------------------------------------

enum class AdversaryKind { exhaustive, scripted };

struct EvaluationBudget {
  std::uint64_t max_nodes = 50'000'000;
};

namespace detail {

// Exact expected utility of the policy against an adaptive adversary with k
// resources; coin flips are integrated exactly. The adversary observes the
// patroller (including her commitments) and times attack waves freely.
class ExhaustiveAdversary {
 public:
  ExhaustiveAdversary(const OnlinePolicy& policy, const PatrolInstance& inst,
                      const DistanceMatrix& dist, const EvaluationBudget& budget)
      : policy_(policy), inst_(inst), dist_(dist), budget_(budget) {
    if (inst.target_count() > 16)
      throw BudgetError("adversary search supports at most 16 targets");
  }

  double value(int k) {
    SimState s;
    s.pos = policy_.home;
    return attacker_node(s, k);
  }

 private:
  double attacker_node(SimState s, int m) {
    // An active attack the patroller can no longer reach is already lost;
    // folding it into the lost set collapses timing state without touching
    // the policy's future routes (it never appears in a covering route).
    std::erase_if(s.active, [&](const std::pair<int, int>& a) {
      Vertex t = inst_.targets()[static_cast<size_t>(a.first)];
      if (dist_.dist(s.pos, t) > inst_.deadline(t) - a.second) {
        s.lost |= (1u << a.first);
        return true;
      }
      return false;
    });
    std::uint32_t active_mask = 0;
    for (auto [o, e] : s.active) {
      (void)e;
      active_mask |= (1u << o);
    }
    std::uint32_t attackable = all_mask() & ~s.lost & ~active_mask;
    bool stationary = s.active.empty() && s.route.empty() && s.pos == policy_.home;

    if (stationary && (m == 0 || attackable == 0)) return current_loss(s);

    Key key = make_key(s, m);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (++nodes_ > budget_.max_nodes)
      throw BudgetError("adversary search exceeded its node budget");

    double best = 1e300;
    if (stationary) best = current_loss(s);  // the adversary may stop here
    // waiting is meaningful while anything is still in motion
    if (!stationary) best = std::min(best, play(s, m, {}));
    std::uint32_t sub = attackable == 0 ? 0 : ((0u - attackable) & attackable);
    while (sub != 0) {
      if (popcount(sub) <= m) {
        std::vector<Vertex> wave;
        for (int o = 0; o < inst_.target_count(); ++o)
          if (sub & (1u << o)) wave.push_back(inst_.targets()[static_cast<size_t>(o)]);
        best = std::min(best, play(s, m - static_cast<int>(wave.size()), wave));
      }
      sub = (sub - attackable) & attackable;
    }
    memo_.emplace(key, best);
    return best;
  }

  double play(const SimState& s, int m_after, const std::vector<Vertex>& wave) {
    bool alarm = false;
    for (Vertex t : wave)
      if (t != s.pos) alarm = true;  // instantly caught resources raise no new pursuit
    if (!alarm || policy_.kind == PolicyKind::greedy_deterministic) {
      SimState next = s;
      sim_turn(next, wave, true, alarm, policy_, inst_, dist_);
      return attacker_node(next, m_after);
    }
    SimState heads = s, tails = s;
    sim_turn(heads, wave, true, true, policy_, inst_, dist_);
    sim_turn(tails, wave, false, true, policy_, inst_, dist_);
    double p = policy_.respond_probability;
    return p * attacker_node(heads, m_after) + (1.0 - p) * attacker_node(tails, m_after);
  }

  double current_loss(const SimState& s) const {
    double loss = 0;
    for (Vertex t : inst_.targets())
      if (s.lost & (1u << inst_.target_ordinal(t))) loss -= inst_.value(t);
    return loss;
  }

  std::uint32_t all_mask() const { return (1u << inst_.target_count()) - 1u; }
  static int popcount(std::uint32_t x) { return __builtin_popcount(x); }

  struct Key {
    std::uint64_t a = 0, b = 0, c = 0, d = 0;
    bool operator==(const Key& o) const {
      return a == o.a && b == o.b && c == o.c && d == o.d;
    }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return static_cast<size_t>(
          splitmix64(k.a ^ splitmix64(k.b ^ splitmix64(k.c ^ splitmix64(k.d)))));
    }
  };
  Key make_key(const SimState& s, int m) const {
    Key k;
    std::uint32_t amask = 0;
    k.a = static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.pos)) |
          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(m)) << 20) |
          (static_cast<std::uint64_t>(s.lost) << 28) |
          (static_cast<std::uint64_t>(s.saved_attacks) << 44);
    int i = 0;
    for (auto [o, e] : s.active) {
      amask |= (1u << o);
      std::uint64_t byte = static_cast<std::uint64_t>(e + 1);
      if (i < 8) k.b |= byte << (8 * i);
      ++i;
    }
    // route remainder: hash of the pending walk
    std::uint64_t h = 1469598103934665603ull;
    for (Vertex v : s.route) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    k.c = h;
    k.d = static_cast<std::uint64_t>(s.route.size()) |
          (static_cast<std::uint64_t>(amask) << 32);
    return k;
  }

  const OnlinePolicy& policy_;
  const PatrolInstance& inst_;
  const DistanceMatrix& dist_;
  EvaluationBudget budget_;
  std::uint64_t nodes_ = 0;
  std::unordered_map<Key, double, KeyHash> memo_;
};

}  // namespace detail

// Exact expected utility of the policy against the worst adaptive k-resource
// adversary.
inline double exhaustive_adversary_value(const OnlinePolicy& policy, const PatrolInstance& inst,
                                         const DistanceMatrix& dist, int k,
                                         const EvaluationBudget& budget = {}) {
  detail::ExhaustiveAdversary adv(policy, inst, dist, budget);
  return adv.value(k);
}

// Exact expected utility of the coin policy on a fixed script, integrating
// the flips by enumeration (the greedy policy has a single branch).
inline double scripted_adversary_value(const OnlinePolicy& policy, const PatrolInstance& inst,
                                       const DistanceMatrix& dist, const AttackStream& stream) {
  int alarms = 0;
  for (const auto& e : stream.events) alarms += e.targets.empty() ? 0 : 1;
  if (alarms > 24) throw BudgetError("script has too many alarm events for exact expectation");
  const std::uint64_t combos =
      policy.kind == PolicyKind::coin_flip ? (1ull << alarms) : 1ull;
  double total = 0.0;
  for (std::uint64_t bits = 0; bits < combos; ++bits) {
    detail::SimState s;
    s.pos = policy.home;
    size_t next_event = 0;
    int turn = 0;
    int flip_index = 0;
    double prob = 1.0;
    while (next_event < stream.events.size() || !s.active.empty()) {
      std::vector<Vertex> fresh;
      if (next_event < stream.events.size() && stream.events[next_event].turn == turn) {
        fresh = stream.events[next_event].targets;
        ++next_event;
      }
      std::erase_if(fresh, [&](Vertex t) { return s.lost & (1u << inst.target_ordinal(t)); });
      bool alarm = !fresh.empty();
      bool respond = true;
      if (alarm && policy.kind == PolicyKind::coin_flip) {
        respond = (bits >> flip_index) & 1ull;
        prob *= respond ? policy.respond_probability : 1.0 - policy.respond_probability;
        ++flip_index;
      }
      detail::sim_turn(s, fresh, respond, alarm, policy, inst, dist);
      ++turn;
    }
    double loss = 0;
    for (Vertex t : inst.targets())
      if (s.lost & (1u << inst.target_ordinal(t))) loss -= inst.value(t);
    total += prob * loss;
  }
  return total;
}

// Competitive factor of a policy: worst-case (expected) value against the
// chosen adversary over the clairvoyant equilibrium value, on the top-k
// affine scale with the zero-denominator exclusion.
inline CompetitiveReport estimate_competitive_factor(
    const OnlinePolicy& policy, const PatrolInstance& inst, const DistanceMatrix& dist, int k,
    AdversaryKind adversary, const AttackStream* script = nullptr, std::uint64_t trials = 0,
    std::uint64_t seed = 0, const EvaluationBudget& budget = {}) {
  CompetitiveReport rep;
  rep.seed = seed;
  if (adversary == AdversaryKind::exhaustive) {
    rep.value = exhaustive_adversary_value(policy, inst, dist, k, budget);
  } else {
    if (!script) throw ValidationError("scripted adversary requires a stream");
    if (trials == 0) {
      rep.value = scripted_adversary_value(policy, inst, dist, *script);
    } else {
      // Monte-Carlo over the coin
      double sum = 0.0, sumsq = 0.0;
      for (std::uint64_t i = 0; i < trials; ++i) {
        GameOutcome o = simulate_online(policy, inst, dist, *script, seed_for_trial(seed, i));
        sum += o.defender_utility;
        sumsq += o.defender_utility * o.defender_utility;
      }
      rep.value = sum / static_cast<double>(trials);
      double var = sumsq / static_cast<double>(trials) - rep.value * rep.value;
      rep.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(trials));
      rep.trials = trials;
    }
  }
  rep.v_star = solve_sequential(inst, dist, k).value;
  double w = inst.topk_value_sum(k);
  double denom = w + rep.v_star;
  rep.gamma_defined = denom > 1e-12;
  rep.gamma = rep.gamma_defined ? (w + rep.value) / denom : 0.0;
  return rep;
}

}  // namespace patrol
