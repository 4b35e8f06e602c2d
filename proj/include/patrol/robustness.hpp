#pragma once

// Cost of a wrong guess about the Attacker's resource count: the Defender
// commits to the plan that is optimal for her guess k', extended off-plan by
// believed-optimal replanning (greedy coverage once more attacks arrived
// than the guess allows), and a k-resource Attacker best-responds to that
// fixed policy. Reported as the multiplicative factor on the top-k
// normalized scale and as the raw additive factor.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "patrol/distance.hpp"
#include "patrol/errors.hpp"
#include "patrol/instance.hpp"
#include "patrol/oracle.hpp"
#include "patrol/rng.hpp"

namespace patrol {

struct GuessAnalysis {
  int k = 0;
  int k_prime = 0;
  double v_star = 0.0;       // raw equilibrium utility with the correct guess
  double v_guess = 0.0;      // raw utility of the committed k'-policy vs k resources
  Vertex placement_star = -1;
  Vertex placement_guess = -1;
  double gamma = 1.0;        // (W + v_guess) / (W + v_star), W = top-k value sum
  bool gamma_defined = true; // false when the correct guess already loses the top-k
  double gamma_prime = 0.0;  // v_guess - v_star
};

// Worst-case additive factor of guessing k' against k actual resources, on
// the paper's tight instance families.
inline double gamma_prime_closed_form(int k, int k_prime, double epsilon) {
  if (k < 1 || k_prime < 1) throw ValidationError("k, k' >= 1");
  if (k == k_prime)
    throw ValidationError("gamma_prime is defined for wrong guesses only (k != k')");
  if (k_prime < k) return -(static_cast<double>(k - k_prime)) + epsilon;
  if (k_prime < 2 * k) return -(static_cast<double>(k_prime - k)) * (1.0 - epsilon);
  return -static_cast<double>(k) * (1.0 - epsilon);
}

// ---------------------------------------------------------------------------
// Worst-case instance families
// ---------------------------------------------------------------------------

enum class UnderFamily { ratio, additive };

// Clique of size k-k'+1 holding k-k' unit-value targets, plus k' cheap
// targets on weight-k spokes off the non-target hub. The ratio family uses
// the tight clique deadline k-k'; the additive family uses k.
inline PatrolInstance gen_underestimation_instance(int k, int k_prime, double epsilon,
                                                   UnderFamily family = UnderFamily::ratio) {
  if (k_prime < 1 || k_prime >= k) throw ValidationError("requires 1 <= k' < k");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon in (0, 1)");
  std::vector<std::string> names = {"v"};
  std::vector<std::tuple<std::string, std::string, int>> edges;
  std::vector<std::pair<std::string, TargetSpec>> targets;
  int d_clique = family == UnderFamily::ratio ? (k - k_prime) : k;
  for (int i = 1; i <= k - k_prime; ++i) {
    std::string tc = "tc" + std::to_string(i);
    names.push_back(tc);
    targets.emplace_back(tc, TargetSpec{1.0, d_clique});
  }
  for (size_t a = 0; a < names.size(); ++a)
    for (size_t b = a + 1; b < names.size(); ++b) edges.emplace_back(names[a], names[b], 1);
  for (int i = 1; i <= k_prime; ++i) {
    std::string to = "to" + std::to_string(i);
    names.push_back(to);
    targets.emplace_back(to, TargetSpec{epsilon, k});
    edges.emplace_back("v", to, k);
  }
  return PatrolInstance::build(std::move(names), edges, targets, k, std::nullopt);
}

enum class OverFamily { ratio_star, additive_mid, additive_high };

// Overestimation families: the ratio star (k unit-ish targets around a
// center), and the additive cliques with k'-k unit-value targets plus k
// near-unit targets on weight-k spokes that form a unit clique of their own.
inline PatrolInstance gen_overestimation_instance(int k, int k_prime, double epsilon,
                                                  OverFamily family) {
  if (k_prime <= k) throw ValidationError("requires k' > k");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon in (0, 1)");
  std::vector<std::string> names = {"v"};
  std::vector<std::tuple<std::string, std::string, int>> edges;
  std::vector<std::pair<std::string, TargetSpec>> targets;
  if (family == OverFamily::ratio_star) {
    for (int i = 1; i <= k; ++i) {
      std::string t = "t" + std::to_string(i);
      names.push_back(t);
      targets.emplace_back(t, TargetSpec{i == 1 ? 1.0 : 1.0 - epsilon, 1});
      edges.emplace_back("v", t, 1);
    }
    return PatrolInstance::build(std::move(names), edges, targets, k, std::nullopt);
  }
  if (family == OverFamily::additive_mid && !(k_prime < 2 * k))
    throw ValidationError("additive-mid requires k < k' < 2k");
  if (family == OverFamily::additive_high && !(k_prime >= 2 * k))
    throw ValidationError("additive-high requires k' >= 2k");
  int d = family == OverFamily::additive_mid ? (k_prime - k) : (k + 1);
  std::vector<std::string> clique = {"v"};
  for (int i = 1; i <= k_prime - k; ++i) {
    std::string tc = "tc" + std::to_string(i);
    names.push_back(tc);
    clique.push_back(tc);
    targets.emplace_back(tc, TargetSpec{1.0, d});
  }
  for (size_t a = 0; a < clique.size(); ++a)
    for (size_t b = a + 1; b < clique.size(); ++b) edges.emplace_back(clique[a], clique[b], 1);
  std::vector<std::string> outer;
  for (int i = 1; i <= k; ++i) {
    std::string to = "to" + std::to_string(i);
    names.push_back(to);
    outer.push_back(to);
    targets.emplace_back(to, TargetSpec{1.0 - epsilon, d});
    edges.emplace_back("v", to, k);
  }
  for (size_t a = 0; a < outer.size(); ++a)
    for (size_t b = a + 1; b < outer.size(); ++b) edges.emplace_back(outer[a], outer[b], 1);
  return PatrolInstance::build(std::move(names), edges, targets, k, std::nullopt);
}

// ---------------------------------------------------------------------------
// Committed-policy evaluation
// ---------------------------------------------------------------------------

// Best response of a k-resource Attacker against the Defender policy that
// plays believed-optimally for a guess of k' total resources. The Defender
// sees every attack, so her believed remaining count is k' minus resources
// already deployed, floored at zero (off-plan: pure coverage).
class CommittedGuessEvaluator {
 public:
  CommittedGuessEvaluator(const PatrolInstance& inst, int k, int k_prime,
                          std::uint64_t max_states = 400'000'000)
      : inst_(inst), k_(k), k_prime_(k_prime), eng_(inst, max_states),
        max_states_(max_states) {
    targets_ = inst.targets();
  }

  OracleEngine& engine() { return eng_; }

  Vertex believed_best_placement() {
    Vertex best = 0;
    double best_v = -1e300;
    for (Vertex v = 0; v < inst_.vertex_count(); ++v) {
      double val = eng_.value(v, {}, k_prime_, 0);
      if (val > best_v + 1e-12) {
        best_v = val;
        best = v;
      }
    }
    return best;
  }

  // Value extracted by the true Attacker from `placement` against the
  // committed policy.
  double best_response_value(Vertex placement) {
    return br(placement, {}, k_, 0);
  }

 private:
  int believed_left(int m_true) const { return std::max(k_prime_ - (k_ - m_true), 0); }

  // A to act against the fixed policy.
  double br(Vertex pos, std::vector<std::pair<int, int>> active, int m_true,
            std::uint32_t lost) {
    std::sort(active.begin(), active.end());
    Key key = make_key(pos, active, m_true, lost);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    if (memo_.size() >= max_states_)
      throw BudgetError("committed-policy evaluation exceeded its state budget");

    std::uint32_t active_mask = 0;
    for (auto [o, e] : active) {
      (void)e;
      active_mask |= (1u << o);
    }
    std::uint32_t attackable = all_mask() & ~lost & ~active_mask;

    double best;
    if (active.empty()) {
      best = 0.0;  // the Attacker may simply stop
      if (m_true > 0 && attackable != 0) {
        // If the Attacker stalls, the policy walks toward its believed-best
        // standing point; strikes anywhere along that walk are available.
        std::vector<Vertex> walk = quiet_walk(pos, m_true, lost);
        for (Vertex p : walk) {
          std::uint32_t s = (0u - attackable) & attackable;
          while (true) {
            if (popcount(s) <= m_true) best = std::min(best, br_attacked(p, {}, m_true, lost, s));
            s = (s - attackable) & attackable;
            if (s == 0) break;
          }
        }
      }
    } else {
      // waiting: the policy moves, the clock ticks
      best = br_step(pos, active, m_true, lost, 0);
      std::uint32_t s = (0u - attackable) & attackable;
      while (s != 0) {
        if (popcount(s) <= m_true) best = std::min(best, br_attacked(pos, active, m_true, lost, s));
        s = (s - attackable) & attackable;
      }
    }
    memo_.emplace(key, best);
    return best;
  }

  double br_attacked(Vertex pos, const std::vector<std::pair<int, int>>& active, int m_true,
                     std::uint32_t lost, std::uint32_t s) {
    std::vector<std::pair<int, int>> merged = active;
    int spent = 0;
    for (int o = 0; o < static_cast<int>(targets_.size()); ++o) {
      if (!(s & (1u << o))) continue;
      ++spent;
      if (targets_[static_cast<size_t>(o)] == pos) continue;  // caught on the spot
      merged.emplace_back(o, 0);
    }
    std::sort(merged.begin(), merged.end());
    return br_step(pos, merged, m_true - spent, lost, 0);
  }

  // One policy move plus resolution.
  double br_step(Vertex pos, const std::vector<std::pair<int, int>>& active, int m_true,
                 std::uint32_t lost, int) {
    Vertex to = eng_.defender_move(pos, active, believed_left(m_true), lost);
    MoveResolution res = resolve_move(inst_, targets_, to, active);
    return -res.charge + br(to, std::move(res.active), m_true, lost | res.lost_bits);
  }

  // Believed-optimal repositioning while nothing burns: climb to a strictly
  // better believed standing point, smallest index first.
  std::vector<Vertex> quiet_walk(Vertex pos, int m_true, std::uint32_t lost) {
    std::vector<Vertex> walk = {pos};
    int bel = believed_left(m_true);
    Vertex cur = pos;
    for (int guard = 0; guard < inst_.vertex_count(); ++guard) {
      double here = eng_.value(cur, {}, bel, lost);
      Vertex next = cur;
      double best_v = here;
      for (auto [nb, w] : inst_.neighbors(cur)) {
        (void)w;
        double v = eng_.value(nb, {}, bel, lost);
        if (v > best_v + 1e-12) {
          best_v = v;
          next = nb;
        }
      }
      if (next == cur) break;
      cur = next;
      walk.push_back(cur);
    }
    return walk;
  }

  std::uint32_t all_mask() const { return (1u << targets_.size()) - 1u; }
  static int popcount(std::uint32_t x) { return __builtin_popcount(x); }

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

  const PatrolInstance& inst_;
  int k_;
  int k_prime_;
  OracleEngine eng_;
  std::uint64_t max_states_;
  std::vector<Vertex> targets_;
  std::unordered_map<Key, double, KeyHash> memo_;
};

// Oracle-backed robustness analysis of guessing k' when the Attacker truly
// controls k resources. Works on the unit-time expansion internally.
inline GuessAnalysis value_with_guess(const PatrolInstance& raw, int k, int k_prime,
                                      std::uint64_t max_states = 400'000'000) {
  if (k < 1 || k_prime < 1) throw ValidationError("k, k' >= 1");
  PatrolInstance inst = expand_to_unit_time(raw);

  GuessAnalysis out;
  out.k = k;
  out.k_prime = k_prime;

  CommittedGuessEvaluator eval(inst, k, k_prime, max_states);
  // Correct-guess equilibrium (placement scan, lexicographic ties).
  out.placement_star = 0;
  double best = -1e300;
  for (Vertex v = 0; v < inst.vertex_count(); ++v) {
    double val = eval.engine().value(v, {}, k, 0);
    if (val > best + 1e-12) {
      best = val;
      out.placement_star = v;
    }
  }
  out.v_star = best;

  out.placement_guess = eval.believed_best_placement();
  out.v_guess = eval.best_response_value(out.placement_guess);

  double w = inst.topk_value_sum(k);
  double denom = w + out.v_star;
  out.gamma_defined = denom > 1e-12;
  out.gamma = out.gamma_defined ? (w + out.v_guess) / denom : 0.0;
  out.gamma_prime = out.v_guess - out.v_star;
  return out;
}

}  // namespace patrol
