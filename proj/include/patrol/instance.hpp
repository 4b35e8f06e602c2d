#pragma once

// Patrolling game instances: an undirected graph with integer edge costs
// (in turns), a set of valuable targets with penetration times, and the
// number of attacking resources. Instances are immutable after construction
// and safe to share across threads.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "patrol/errors.hpp"

namespace patrol {

using Vertex = int;  // index into PatrolInstance::vertex_names()

struct TargetSpec {
  double value = 1.0;  // pi(t), in (0, 1]
  int deadline = 1;    // d(t) >= 1, turns the attack needs to complete
};

struct Edge {
  Vertex u = -1;
  Vertex v = -1;
  int weight = 1;  // traversal cost in turns, >= 1
};

class PatrolInstance {
 public:
  PatrolInstance() = default;

  const std::vector<std::string>& vertex_names() const { return names_; }
  int vertex_count() const { return static_cast<int>(names_.size()); }
  const std::string& name_of(Vertex v) const { return names_[static_cast<size_t>(v)]; }

  // -1 if the name is unknown.
  Vertex index_of(const std::string& name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return -1;
    return static_cast<Vertex>(it - names_.begin());
  }

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::pair<Vertex, int>>& neighbors(Vertex v) const {
    return adj_[static_cast<size_t>(v)];
  }

  const std::vector<Vertex>& targets() const { return targets_; }
  int target_count() const { return static_cast<int>(targets_.size()); }
  bool is_target(Vertex v) const { return deadline_[static_cast<size_t>(v)] > 0; }
  double value(Vertex v) const { return value_[static_cast<size_t>(v)]; }
  int deadline(Vertex v) const { return deadline_[static_cast<size_t>(v)]; }

  // Position of v in targets(), -1 for non-targets.
  int target_ordinal(Vertex v) const { return target_ord_[static_cast<size_t>(v)]; }

  int attacker_resources() const { return k_; }
  std::optional<Vertex> defender_start() const {
    if (start_ < 0) return std::nullopt;
    return start_;
  }

  bool unit_weight() const { return unit_weight_; }

  double total_target_value() const {
    double s = 0;
    for (Vertex t : targets_) s += value(t);
    return s;
  }

  // Sum of the k largest target values; ties broken by vertex identifier.
  double topk_value_sum(int k) const {
    std::vector<Vertex> order = targets_;
    std::stable_sort(order.begin(), order.end(),
                     [&](Vertex a, Vertex b) { return value(a) > value(b); });
    double s = 0;
    for (int i = 0; i < k && i < static_cast<int>(order.size()); ++i) s += value(order[i]);
    return s;
  }

  // Builds a validated instance. Vertex indices are the lexicographic ranks
  // of the identifiers so that "smallest index" and "lexicographically
  // smallest identifier" coincide in every tie-break.
  static PatrolInstance build(std::vector<std::string> vertex_names,
                              const std::vector<std::tuple<std::string, std::string, int>>& edges,
                              const std::vector<std::pair<std::string, TargetSpec>>& targets,
                              int k, const std::optional<std::string>& defender_start) {
    PatrolInstance inst;
    if (vertex_names.empty()) throw ValidationError("vertex set must be non-empty");
    std::sort(vertex_names.begin(), vertex_names.end());
    for (size_t i = 0; i + 1 < vertex_names.size(); ++i) {
      if (vertex_names[i] == vertex_names[i + 1])
        throw ValidationError("duplicate vertex identifier \"" + vertex_names[i] + "\"");
    }
    for (const auto& n : vertex_names)
      if (n.empty()) throw ValidationError("vertex identifiers must be non-empty");
    inst.names_ = std::move(vertex_names);

    const int n = inst.vertex_count();
    inst.adj_.assign(static_cast<size_t>(n), {});
    inst.value_.assign(static_cast<size_t>(n), 0.0);
    inst.deadline_.assign(static_cast<size_t>(n), 0);
    inst.target_ord_.assign(static_cast<size_t>(n), -1);

    std::set<std::pair<Vertex, Vertex>> seen;
    for (const auto& [ua, va, w] : edges) {
      Vertex u = inst.index_of(ua), v = inst.index_of(va);
      if (u < 0) throw ValidationError("edge references unknown vertex \"" + ua + "\"");
      if (v < 0) throw ValidationError("edge references unknown vertex \"" + va + "\"");
      if (u == v) throw ValidationError("self-loop on vertex \"" + ua + "\"");
      if (w < 1) throw ValidationError("edge weight >= 1 (edge " + ua + " -- " + va + ")");
      auto key = std::minmax(u, v);
      if (!seen.insert(key).second)
        throw ValidationError("duplicate edge " + ua + " -- " + va);
      inst.edges_.push_back(Edge{key.first, key.second, w});
    }
    std::sort(inst.edges_.begin(), inst.edges_.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (const Edge& e : inst.edges_) {
      inst.adj_[static_cast<size_t>(e.u)].emplace_back(e.v, e.weight);
      inst.adj_[static_cast<size_t>(e.v)].emplace_back(e.u, e.weight);
    }
    for (auto& nb : inst.adj_) std::sort(nb.begin(), nb.end());

    if (targets.empty()) throw ValidationError("target set must be non-empty");
    for (const auto& [name, spec] : targets) {
      Vertex t = inst.index_of(name);
      if (t < 0) throw ValidationError("target references unknown vertex \"" + name + "\"");
      if (inst.deadline_[static_cast<size_t>(t)] > 0)
        throw ValidationError("duplicate target \"" + name + "\"");
      if (!(spec.value > 0.0 && spec.value <= 1.0))
        throw ValidationError("target value in (0, 1] (target \"" + name + "\")");
      if (spec.deadline < 1) throw ValidationError("deadline >= 1 (target \"" + name + "\")");
      inst.value_[static_cast<size_t>(t)] = spec.value;
      inst.deadline_[static_cast<size_t>(t)] = spec.deadline;
      inst.targets_.push_back(t);
    }
    std::sort(inst.targets_.begin(), inst.targets_.end());
    for (int i = 0; i < static_cast<int>(inst.targets_.size()); ++i)
      inst.target_ord_[static_cast<size_t>(inst.targets_[static_cast<size_t>(i)])] = i;

    if (k < 1) throw ValidationError("k >= 1");
    inst.k_ = k;

    if (defender_start) {
      inst.start_ = inst.index_of(*defender_start);
      if (inst.start_ < 0)
        throw ValidationError("defender_start references unknown vertex \"" + *defender_start + "\"");
    }

    // Connectivity (unions the whole model: every distance is finite).
    std::vector<char> vis(static_cast<size_t>(n), 0);
    std::vector<Vertex> stack = {0};
    vis[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      for (auto [u, w] : inst.neighbors(v)) {
        (void)w;
        if (!vis[static_cast<size_t>(u)]) {
          vis[static_cast<size_t>(u)] = 1;
          ++reached;
          stack.push_back(u);
        }
      }
    }
    if (reached != n) throw ValidationError("graph is connected");

    inst.unit_weight_ = true;
    for (const Edge& e : inst.edges_)
      if (e.weight != 1) inst.unit_weight_ = false;
    return inst;
  }

 private:
  std::vector<std::string> names_;  // sorted
  std::vector<Edge> edges_;         // canonical u < v, sorted
  std::vector<std::vector<std::pair<Vertex, int>>> adj_;
  std::vector<double> value_;
  std::vector<int> deadline_;  // 0 for non-targets
  std::vector<Vertex> targets_;
  std::vector<int> target_ord_;
  int k_ = 1;
  Vertex start_ = -1;
  bool unit_weight_ = true;
};

// --------------------------------------------------------------------------
// Instance documents (JSON, UTF-8). Top-level object with fields:
//   vertices: ["a", "b", ...]
//   edges:    [["a", "b", 1], ...]            weight is an integer >= 1
//   targets:  [{"vertex": "a", "value": 1.0, "deadline": 2}, ...]
//   k:        2
//   defender_start: "a"                        optional
// Unknown fields are rejected.
// --------------------------------------------------------------------------

inline PatrolInstance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!j.is_object()) throw ParseError("top level must be an object");
  static const std::set<std::string> known = {"vertices", "edges", "targets", "k",
                                              "defender_start"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ParseError("unknown field \"" + it.key() + "\"");
  for (const char* req : {"vertices", "edges", "targets", "k"})
    if (!j.contains(req)) throw ParseError(std::string("missing field \"") + req + "\"");

  try {
    std::vector<std::string> vertices = j.at("vertices").get<std::vector<std::string>>();
    std::vector<std::tuple<std::string, std::string, int>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3)
        throw ParseError("edges: each entry is [u, v, weight]");
      if (!e[2].is_number_integer())
        throw ParseError("edges: weight must be an integer");
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<int>());
    }
    std::vector<std::pair<std::string, TargetSpec>> targets;
    for (const auto& t : j.at("targets")) {
      if (!t.is_object()) throw ParseError("targets: each entry is an object");
      for (auto it = t.begin(); it != t.end(); ++it)
        if (it.key() != "vertex" && it.key() != "value" && it.key() != "deadline")
          throw ParseError("targets: unknown field \"" + it.key() + "\"");
      TargetSpec spec;
      spec.value = t.at("value").get<double>();
      if (!t.at("deadline").is_number_integer())
        throw ParseError("targets: deadline must be an integer");
      spec.deadline = t.at("deadline").get<int>();
      targets.emplace_back(t.at("vertex").get<std::string>(), spec);
    }
    if (!j.at("k").is_number_integer()) throw ParseError("k must be an integer");
    int k = j.at("k").get<int>();
    std::optional<std::string> start;
    if (j.contains("defender_start")) start = j.at("defender_start").get<std::string>();
    return PatrolInstance::build(std::move(vertices), edges, targets, k, start);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(e.what());
  }
}

inline PatrolInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

// Canonical form: sorted vertices/edges/targets, two-space indent. Identical
// instances serialize to identical bytes.
inline std::string serialize_instance(const PatrolInstance& inst) {
  nlohmann::json j;
  j["vertices"] = inst.vertex_names();
  auto& je = j["edges"] = nlohmann::json::array();
  for (const Edge& e : inst.edges())
    je.push_back({inst.name_of(e.u), inst.name_of(e.v), e.weight});
  auto& jt = j["targets"] = nlohmann::json::array();
  for (Vertex t : inst.targets()) {
    jt.push_back({{"vertex", inst.name_of(t)},
                  {"value", inst.value(t)},
                  {"deadline", inst.deadline(t)}});
  }
  j["k"] = inst.attacker_resources();
  if (auto s = inst.defender_start()) j["defender_start"] = inst.name_of(*s);
  return j.dump(2) + "\n";
}

inline void save_instance(const PatrolInstance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write \"" + path + "\"");
  out << serialize_instance(inst);
}

// --------------------------------------------------------------------------
// Derived instances
// --------------------------------------------------------------------------

// Replaces every edge of weight w > 1 by a chain of w unit edges through
// fresh non-target vertices, preserving all distances between original
// vertices. Solvers run on unit-time instances; a unit-weight input is
// returned unchanged.
inline PatrolInstance expand_to_unit_time(const PatrolInstance& inst) {
  if (inst.unit_weight()) return inst;
  std::vector<std::string> names = inst.vertex_names();
  std::set<std::string> used(names.begin(), names.end());
  std::vector<std::tuple<std::string, std::string, int>> edges;
  for (const Edge& e : inst.edges()) {
    if (e.weight == 1) {
      edges.emplace_back(inst.name_of(e.u), inst.name_of(e.v), 1);
      continue;
    }
    // Interior names start with '~' so they sort after ordinary identifiers
    // and lose placement tie-breaks to original vertices.
    std::string prev = inst.name_of(e.u);
    for (int i = 1; i < e.weight; ++i) {
      std::string mid =
          "~" + inst.name_of(e.u) + "~" + inst.name_of(e.v) + "~" + std::to_string(i);
      while (used.count(mid)) mid += "~";
      used.insert(mid);
      names.push_back(mid);
      edges.emplace_back(prev, mid, 1);
      prev = mid;
    }
    edges.emplace_back(prev, inst.name_of(e.v), 1);
  }
  std::vector<std::pair<std::string, TargetSpec>> targets;
  for (Vertex t : inst.targets())
    targets.emplace_back(inst.name_of(t), TargetSpec{inst.value(t), inst.deadline(t)});
  std::optional<std::string> start;
  if (auto s = inst.defender_start()) start = inst.name_of(*s);
  return PatrolInstance::build(std::move(names), edges, targets, inst.attacker_resources(),
                               start);
}

// Divides every target value by the sum of the k largest values, so that
// losing the top-k targets costs exactly 1 in total.
inline PatrolInstance normalize_values_topk(const PatrolInstance& inst, int k) {
  if (k < 1) throw ValidationError("k >= 1");
  double denom = inst.topk_value_sum(k);
  std::vector<std::pair<std::string, TargetSpec>> targets;
  for (Vertex t : inst.targets())
    targets.emplace_back(inst.name_of(t), TargetSpec{inst.value(t) / denom, inst.deadline(t)});
  std::vector<std::tuple<std::string, std::string, int>> edges;
  for (const Edge& e : inst.edges())
    edges.emplace_back(inst.name_of(e.u), inst.name_of(e.v), e.weight);
  std::optional<std::string> start;
  if (auto s = inst.defender_start()) start = inst.name_of(*s);
  return PatrolInstance::build(inst.vertex_names(), edges, targets, inst.attacker_resources(),
                               start);
}

// Defender utility of an outcome: minus the value of every compromised
// target; zero when nothing is lost.
inline double outcome_utility(const std::vector<Vertex>& lost, const PatrolInstance& inst) {
  double u = 0;
  for (Vertex t : lost) {
    if (!inst.is_target(t)) throw ValidationError("lost set contains a non-target vertex");
    u -= inst.value(t);
  }
  return u;
}

// One Attacker action: the set of targets newly attacked at a turn.
struct AttackEvent {
  int turn = 0;
  std::vector<Vertex> targets;  // non-empty, sorted
};

struct GameOutcome {
  std::vector<Vertex> saved;  // targets whose attack was caught (sorted)
  std::vector<Vertex> lost;   // targets compromised (sorted)
  double defender_utility = 0.0;
};

}  // namespace patrol
