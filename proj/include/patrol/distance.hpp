#pragma once

// All-pairs shortest paths (Floyd-Warshall) with next-hop reconstruction.

#include <limits>
#include <vector>

#include "patrol/instance.hpp"

namespace patrol {

class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  DistanceMatrix(int n) : n_(n), dist_(static_cast<size_t>(n) * n, kInf),
                          next_(static_cast<size_t>(n) * n, -1) {}

  static constexpr int kInf = std::numeric_limits<int>::max() / 4;

  int n() const { return n_; }
  int dist(Vertex i, Vertex j) const { return dist_[idx(i, j)]; }
  Vertex next_hop(Vertex i, Vertex j) const { return next_[idx(i, j)]; }

  // One canonical shortest path i -> j, inclusive of both endpoints.
  std::vector<Vertex> path(Vertex i, Vertex j) const {
    std::vector<Vertex> p = {i};
    while (i != j) {
      i = next_hop(i, j);
      p.push_back(i);
    }
    return p;
  }

  int& dist_ref(Vertex i, Vertex j) { return dist_[idx(i, j)]; }
  Vertex& next_ref(Vertex i, Vertex j) { return next_[idx(i, j)]; }

 private:
  size_t idx(Vertex i, Vertex j) const {
    return static_cast<size_t>(i) * static_cast<size_t>(n_) + static_cast<size_t>(j);
  }
  int n_ = 0;
  std::vector<int> dist_;
  std::vector<Vertex> next_;
};

inline DistanceMatrix all_pairs_shortest_paths(const PatrolInstance& inst) {
  const int n = inst.vertex_count();
  DistanceMatrix m(n);
  for (Vertex v = 0; v < n; ++v) m.dist_ref(v, v) = 0;
  for (const Edge& e : inst.edges()) {
    if (e.weight < m.dist(e.u, e.v)) {
      m.dist_ref(e.u, e.v) = e.weight;
      m.dist_ref(e.v, e.u) = e.weight;
    }
  }
  for (Vertex k = 0; k < n; ++k)
    for (Vertex i = 0; i < n; ++i) {
      if (m.dist(i, k) == DistanceMatrix::kInf) continue;
      for (Vertex j = 0; j < n; ++j) {
        int through = m.dist(i, k) + m.dist(k, j);
        if (through < m.dist(i, j)) m.dist_ref(i, j) = through;
      }
    }
  // Canonical next hops as a post-pass: the smallest neighbor index (vertex
  // indices are lexicographic ranks) that stays on a shortest path.
  for (Vertex i = 0; i < n; ++i) {
    m.next_ref(i, i) = i;
    for (Vertex j = 0; j < n; ++j) {
      if (i == j) continue;
      for (auto [nb, w] : inst.neighbors(i)) {
        if (w + m.dist(nb, j) == m.dist(i, j)) {
          m.next_ref(i, j) = nb;
          break;  // neighbors are sorted by index
        }
      }
    }
  }
  return m;
}

}  // namespace patrol
