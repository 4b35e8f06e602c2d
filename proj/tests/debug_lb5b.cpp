#include <chrono>
#include <cstdio>

#include "patrol/multi_attack.hpp"
#include "patrol/online.hpp"

using namespace patrol;

int main(int argc, char** argv) {
  int kmax = argc > 1 ? std::atoi(argv[1]) : 4;
  for (int k = 3; k <= kmax; ++k) {
    auto raw = gen_lower_bound_instance(k);
    auto unit = expand_to_unit_time(raw);
    auto dist = all_pairs_shortest_paths(unit);
    auto t0 = std::chrono::steady_clock::now();
    SequentialBudget big;
    big.max_states = 4'000'000'000ull;
    SequentialSolver solver(unit, dist, big);
    double best = -1e300;
    for (Vertex v = 0; v < unit.vertex_count(); ++v) best = std::max(best, solver.value(v, {}, k, 0));
    auto t1 = std::chrono::steady_clock::now();
    std::printf("k=%d |V|=%d v*=%.6g states=%llu (%.2fs)\n", k, unit.vertex_count(), best,
                (unsigned long long)solver.states_used(),
                std::chrono::duration<double>(t1 - t0).count());
    std::fflush(stdout);
  }
  return 0;
}
