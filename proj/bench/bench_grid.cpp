// Serial reference vs OpenMP grid evaluation of all five invariants.
//
//   kccjet_bench [points] [repeats]
//
// Prints wall time of each kernel, the speedup, and whether the two result
// arrays agree bit for bit.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#include "kccjet/geometry.hpp"
#include "kccjet/grid.hpp"
#include "kccjet/kcc.hpp"

using namespace kccjet;

namespace {

std::vector<expr::Expr> flatten(const kcc::InvariantSet& s) {
  std::vector<expr::Expr> out;
  for (kcc::Invariant w : kcc::kAllInvariants) {
    const ExprTensor t = kcc::invariant_components(s, w);
    out.insert(out.end(), t.data().begin(), t.data().end());
  }
  return out;
}

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t points = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 3;

  const int n = 2;
  auto p = [](const char* s) { return expr::parse(s, 2); };
  const geometry::SodeModel m(n, geometry::TemporalMetric(p("1 + t^2")),
                              {p("x1*y2^2 - t*y1 + sin(x2)"), p("cos(t)*y1*y2 + x1*x2 + y2^3/3")});
  const std::vector<expr::Expr> comps = flatten(kcc::all_invariants(m));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<expr::Env> env(points);
  for (auto& e : env) e = expr::Env{1.0 + 0.5 * u(gen), {u(gen), u(gen)}, {u(gen), u(gen)}};

  GridResult serial, parallel;
  const double ts = best_of(repeats, [&] { serial = evaluate_grid_serial(comps, env); });
  const expr::Program prog(comps);
  const double tp = best_of(repeats, [&] { parallel = evaluate_grid(prog, env); });

  const bool same = serial.values == parallel.values && serial.failures() == parallel.failures();
  std::printf("components %zu, points %zu, threads %d\n", comps.size(), points, worker_threads());
  std::printf("serial    %10.4f s\n", ts);
  std::printf("parallel  %10.4f s\n", tp);
  std::printf("speedup   %10.2f x\n", ts / tp);
  std::printf("identical %s\n", same ? "yes" : "no");
  return same ? 0 : 1;
}
