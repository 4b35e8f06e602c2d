#pragma once

// Equilibrium response for two sequential attacks: given the first attacked
// target t', build paths from the placement toward t' column by column,
// hedging every cell against the worst-timed second attack (a covering-route
// subproblem). Cells merge by keeping the best incoming utility (dominance:
// two prefixes meeting at the same vertex and time compare by utility
// alone). The answer is the best of reaching t' in time, standing still, or
// conceding t' from the best hedging position.
//
// Requires a unit-time instance; expand_to_unit_time first.

#include <algorithm>
#include <optional>
#include <vector>

#include "patrol/covering.hpp"
#include "patrol/distance.hpp"
#include "patrol/errors.hpp"
#include "patrol/instance.hpp"

namespace patrol {

struct PredictionResult {
  CoveringRoute response;  // best covering route against the worst second attack
  double utility = 0.0;    // Defender utility of that worst case
  Vertex worst_target = -1;
};

// Worst second attack when the patroller stands at v, `elapsed` turns after
// the first attack on `first_target`. Every other live target is tried with
// its full deadline while the first target keeps its residual; the minimum
// utility (and its covering route) is returned. With no other target this is
// the single-target response. `elapsed` past the deadline charges the first
// target as lost and hedges the remaining targets alone.
inline PredictionResult attack_prediction(Vertex v, Vertex first_target, int elapsed,
                                          const PatrolInstance& inst,
                                          const DistanceMatrix& dist) {
  if (!inst.is_target(first_target)) throw ValidationError("first target must be a target");
  PredictionResult out;
  const int residual = inst.deadline(first_target) - elapsed;
  double charge = 0.0;
  std::vector<AttackedTarget> base;
  if (residual >= 0) {
    base.push_back({first_target, residual});
  } else {
    charge = -inst.value(first_target);  // already compromised
  }

  bool any_second = false;
  out.utility = 1e300;
  for (Vertex t : inst.targets()) {
    if (t == first_target) continue;
    any_second = true;
    auto attacked = base;
    attacked.push_back({t, inst.deadline(t)});
    CoveringRoute r = solve_srg(v, attacked, inst, dist);
    if (r.utility < out.utility) {
      out.utility = r.utility;
      out.response = std::move(r);
      out.worst_target = t;
    }
  }
  if (!any_second) {
    out.response = solve_srg(v, base, inst, dist);
    out.utility = out.response.utility;
  }
  out.utility += charge;
  return out;
}

struct ResponseCell {
  bool reachable = false;
  double utility = 0.0;       // worst case over attack timings along the incoming route
  Vertex parent = -1;         // vertex at the previous column (-1 at the origin)
};

struct ResponseMatrix {
  Vertex origin = -1;
  Vertex first_target = -1;
  int horizon = 0;                              // columns 0..horizon
  std::vector<std::vector<ResponseCell>> cell;  // [vertex][column]
  std::vector<std::vector<double>> prediction;  // [vertex][column], lazily shared

  const ResponseCell& at(Vertex v, int j) const {
    return cell[static_cast<size_t>(v)][static_cast<size_t>(j)];
  }
};

struct EquilibriumAnswer {
  Vertex placement = -1;
  double value = 0.0;
  std::vector<Vertex> path;       // on-path play; a single vertex means stand still
  bool reaches_first = false;     // path ends on the first target within its deadline
  CoveringRoute contingency;      // response to the binding worst-timed second attack
  int binding_elapsed = 0;        // when that worst second attack lands
  Vertex worst_second = -1;
};

namespace detail {

// Route of a cell, walking parents back to column 0. Stays appear as
// repeated vertices.
inline std::vector<Vertex> cell_route(const ResponseMatrix& m, Vertex v, int j) {
  std::vector<Vertex> r(static_cast<size_t>(j) + 1);
  Vertex cur = v;
  for (int col = j; col >= 0; --col) {
    r[static_cast<size_t>(col)] = cur;
    cur = m.at(cur, col).parent;
  }
  return r;
}

}  // namespace detail

// Fills the response matrix for a first attack on `first_target` seen from
// placement `v_s` and extracts the equilibrium answer.
inline EquilibriumAnswer path_finder(Vertex v_s, Vertex first_target, const PatrolInstance& inst,
                                     const DistanceMatrix& dist,
                                     ResponseMatrix* keep_matrix = nullptr) {
  if (!inst.unit_weight())
    throw ValidationError("path_finder requires a unit-time instance (expand_to_unit_time)");
  if (!inst.is_target(first_target)) throw ValidationError("first target must be a target");

  const int n = inst.vertex_count();
  const int d_first = inst.deadline(first_target);
  const int horizon = std::min(d_first, n - 1);

  ResponseMatrix m;
  m.origin = v_s;
  m.first_target = first_target;
  m.horizon = horizon;
  m.cell.assign(static_cast<size_t>(n), std::vector<ResponseCell>(static_cast<size_t>(horizon) + 1));
  m.prediction.assign(static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(horizon) + 1, 1.0));

  auto pred = [&](Vertex v, int j) {
    double& slot = m.prediction[static_cast<size_t>(v)][static_cast<size_t>(j)];
    if (slot > 0.5) slot = attack_prediction(v, first_target, j, inst, dist).utility;
    return slot;
  };

  auto& origin = m.cell[static_cast<size_t>(v_s)][0];
  origin.reachable = true;
  origin.utility = pred(v_s, 0);

  // Value of conceding the first target from v: the second attack strikes
  // after the deadline ran out, so v must cover the worst lone target.
  auto concede_value = [&](Vertex v) {
    double worst = 0.0;
    for (Vertex t : inst.targets()) {
      if (t == first_target) continue;
      if (dist.dist(v, t) > inst.deadline(t)) worst = std::min(worst, -inst.value(t));
    }
    return -inst.value(first_target) + worst;
  };

  for (int j = 0; j < horizon; ++j) {
    for (Vertex v = 0; v < n; ++v) {
      const ResponseCell& cur = m.at(v, j);
      if (!cur.reachable) continue;
      if (v == first_target) continue;  // catching the first attack ends the pursuit
      auto try_move = [&](Vertex to) {
        double cand = std::min(cur.utility, pred(to, j + 1));
        ResponseCell& dst = m.cell[static_cast<size_t>(to)][static_cast<size_t>(j) + 1];
        if (!dst.reachable || cand > dst.utility) {
          dst.reachable = true;
          dst.utility = cand;
          dst.parent = v;
        } else if (cand == dst.utility && dst.parent != v) {
          // deterministic among equal-utility prefixes: lexicographically
          // smallest incoming route
          auto mine = detail::cell_route(m, v, j);
          auto theirs = detail::cell_route(m, dst.parent, j);
          auto lex_less = [&](const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
            for (size_t i = 0; i < a.size(); ++i) {
              if (a[i] == b[i]) continue;
              return inst.name_of(a[i]) < inst.name_of(b[i]);
            }
            return false;
          };
          if (lex_less(mine, theirs)) dst.parent = v;
        }
      };
      try_move(v);  // staying put is a legal patroller action
      for (auto [nb, w] : inst.neighbors(v)) {
        (void)w;
        try_move(nb);
      }
    }
  }

  // Candidates: every cell at the first target within its deadline (the
  // pursuit succeeds) and every other reachable cell as a parking spot that
  // concedes the first target. Ties prefer success, then fewer turns, then
  // the lexicographically smallest route.
  struct Cand {
    double value;
    bool reach;
    Vertex v;
    int j;
  };
  std::optional<Cand> best;
  auto consider = [&](const Cand& c) {
    if (!best) {
      best = c;
      return;
    }
    if (c.value != best->value) {
      if (c.value > best->value) best = c;
      return;
    }
    if (c.j != best->j) {
      if (c.j < best->j) best = c;  // fewer turns first
      return;
    }
    auto mine = detail::cell_route(m, c.v, c.j);
    auto theirs = detail::cell_route(m, best->v, best->j);
    for (size_t i = 0; i < mine.size(); ++i) {
      if (mine[i] == theirs[i]) continue;
      if (inst.name_of(mine[i]) < inst.name_of(theirs[i])) best = c;
      return;
    }
  };
  for (int j = 0; j <= horizon; ++j) {
    for (Vertex v = 0; v < n; ++v) {
      const ResponseCell& c = m.at(v, j);
      if (!c.reachable) continue;
      if (v == first_target) {
        consider({c.utility, true, v, j});
      } else {
        consider({std::min(c.utility, concede_value(v)), false, v, j});
      }
    }
  }

  EquilibriumAnswer ans;
  ans.placement = v_s;
  ans.value = best->value;
  ans.reaches_first = best->reach;
  auto route = detail::cell_route(m, best->v, best->j);
  // Collapse trailing stays of a parking route for reporting; the play
  // simply remains at the parking vertex.
  while (route.size() >= 2 && route.back() == route[route.size() - 2]) route.pop_back();
  ans.path = route;

  // Binding worst-timed second attack along the chosen play.
  double binding = 1e300;
  int binding_j = 0;
  for (int j = 0; j < static_cast<int>(route.size()); ++j) {
    double p = pred(route[static_cast<size_t>(j)], j);
    if (p < binding) {
      binding = p;
      binding_j = j;
    }
  }
  if (!ans.reaches_first) {
    Vertex park = route.back();
    if (concede_value(park) < binding) {
      binding = concede_value(park);
      binding_j = d_first;
    }
  }
  auto pr = attack_prediction(route[static_cast<size_t>(std::min(
                                  binding_j, static_cast<int>(route.size()) - 1))],
                              first_target, binding_j, inst, dist);
  ans.contingency = pr.response;
  ans.binding_elapsed = binding_j;
  ans.worst_second = pr.worst_target;
  if (keep_matrix) *keep_matrix = std::move(m);
  return ans;
}

struct PlacementBudget {
  int max_vertices = 500;  // after unit-time expansion
};

// Optimal placement for two sequential attacks: for each start the Attacker
// picks the worst first target (or the worst simultaneous pair), and the
// Defender places to maximize that worst case.
inline EquilibriumAnswer best_placement_k2(const PatrolInstance& inst, const DistanceMatrix& dist,
                                           std::optional<Vertex> start = std::nullopt,
                                           const PlacementBudget& budget = {}) {
  if (!inst.unit_weight())
    throw ValidationError("best_placement_k2 requires a unit-time instance");
  if (inst.vertex_count() > budget.max_vertices)
    throw BudgetError("instance with " + std::to_string(inst.vertex_count()) +
                      " vertices exceeds the placement budget of " +
                      std::to_string(budget.max_vertices));

  std::vector<Vertex> starts;
  if (start) starts = {*start};
  else if (auto s = inst.defender_start()) starts = {*s};
  else for (Vertex v = 0; v < inst.vertex_count(); ++v) starts.push_back(v);

  std::optional<EquilibriumAnswer> best;
  for (Vertex v : starts) {
    std::optional<EquilibriumAnswer> worst;
    for (Vertex t : inst.targets()) {
      EquilibriumAnswer a = path_finder(v, t, inst, dist);
      if (!worst || a.value < worst->value) worst = std::move(a);
    }
    // Simultaneous two-target opening.
    const auto& ts = inst.targets();
    for (size_t i = 0; i < ts.size() && worst; ++i)
      for (size_t j = i + 1; j < ts.size(); ++j) {
        std::vector<AttackedTarget> att = {{ts[i], inst.deadline(ts[i])},
                                           {ts[j], inst.deadline(ts[j])}};
        CoveringRoute r = solve_srg(v, att, inst, dist);
        if (r.utility < worst->value) {
          worst->value = r.utility;
          worst->path = {v};
          worst->reaches_first = false;
          worst->contingency = std::move(r);
          worst->binding_elapsed = 0;
        }
      }
    if (!best || worst->value > best->value) best = std::move(worst);
  }
  return *best;
}

}  // namespace patrol
