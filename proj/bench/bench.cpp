// Serial reference vs OpenMP kernels on the same inputs. Prints wall time per
// kernel and checks that both paths agree bit for bit.

#include <chrono>
#include <cstdio>
#include <functional>

#include <CLI11.hpp>

#include "cocache/catalog.hpp"
#include "cocache/errors.hpp"
#include "cocache/parallel.hpp"
#include "cocache/regret.hpp"
#include "cocache/sim.hpp"
#include "cocache/weights.hpp"

using namespace cocache;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

template <class R>
void row(const char* name, int reps, const std::function<R(Execution)>& run) {
  R serial, parallel;
  const double ts = best_of(reps, [&] { serial = run(Execution::serial); });
  const double tp = best_of(reps, [&] { parallel = run(Execution::parallel); });
  std::printf("%-16s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", name, ts, tp, ts / tp,
              serial == parallel ? "identical" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel timings"};
  int threads = 0, reps = 3;
  std::size_t files = 200, slots = 60, tau = 20;
  app.add_option("--threads", threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--reps", reps, "repetitions per kernel, best time is reported")->check(CLI::PositiveNumber);
  app.add_option("--files", files, "catalog size");
  app.add_option("--slots", slots, "trace length");
  app.add_option("--tau", tau, "window length");
  CLI11_PARSE(app, argc, argv);
  set_threads(threads);
  set_warning_handler([](const std::string&) {});

  try {
    const Topology topo = Topology::pentagon();
    const Vec sizes = random_sizes(files, 10, 100, 1);
    double total = 0.0;
    for (double s : sizes) total += s;
    const Catalog catalog = Catalog::make(sizes, 0.3 * total);
    SyntheticConfig sc;
    sc.n_regimes = 3;
    sc.regime_length = 6;
    sc.requests_per_slot = 5000;
    const DemandTrace trace = generate_synthetic(catalog, topo, slots, sc);
    SimConfig cfg;
    cfg.tau = tau;
    cfg.tau1 = cfg.tau2 = tau / 2;
    const std::size_t T = slots - 1;
    if (T + 1 < tau + cfg.tau2) throw ValidationError("--slots too short for --tau");

    std::printf("threads %d, files %zu, slots %zu, tau %zu\n", max_threads(), files, slots, tau);
    const auto strategies = regret_sequence(trace, catalog, 0, T, tau);
    row<Vec>("hit_matrix", reps, [&](Execution e) {
      return hit_matrix(strategies, trace, catalog, 0, T, tau, DemandScale::normalized, e).values;
    });
    const WindowSpec spec{T, tau, cfg.tau1, cfg.tau2};
    row<std::vector<CachingStrategy>>("build_windows", reps, [&](Execution e) {
      std::vector<CachingStrategy> out;
      for (const auto& w : build_windows(trace, catalog, topo, spec, e)) out.push_back(w.regret_strategies.back());
      return out;
    });
    const auto windows = build_windows(trace, catalog, topo, spec);
    row<std::vector<CachingStrategy>>("run_subroutine", reps, [&](Execution e) {
      return run_subroutine(windows, topo, catalog, cfg.optimizer, e).strategies;
    });
    row<MetricsLog>("run_simulation", 1, [&](Execution e) {
      SimConfig c = cfg;
      c.exec = e;
      return run_simulation(trace, catalog, topo, PolicyKind::proposed, c);
    });
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
