#include "cocache/validate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cocache/discrepancy.hpp"
#include "cocache/federated.hpp"
#include "cocache/lrfu.hpp"
#include "cocache/oracle.hpp"
#include "cocache/regret.hpp"
#include "cocache/rng.hpp"
#include "cocache/weights.hpp"

namespace cocache {

namespace {

constexpr std::uint64_t kCatalogStream = 0xCA7A;
constexpr std::uint64_t kInstanceStream = 0x1257;

KnapsackSolver knapsack_or_default(const ValidationOptions& opt) {
  if (opt.knapsack) return opt.knapsack;
  return [](std::span<const double> d, const Catalog& c) { return per_slot_optimal(d, c); };
}

ProximalSolver proximal_or_default(const ValidationOptions& opt) {
  if (opt.proximal) return opt.proximal;
  return [](std::span<const double> d, const CachingStrategy& a, double l, const Catalog& c) {
    return federated_solve(d, a, l, c);
  };
}

Vec random_demand(SplitMix64& rng, std::size_t n, double hi) {
  Vec d(n);
  for (double& x : d) x = rng.uniform() < 0.2 ? 0.0 : hi * rng.uniform();
  return d;
}

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

// Shared body of the two linear-objective oracle checks.
CheckResult hit_oracle_check(const std::string& name, const ValidationOptions& opt, const KnapsackSolver& solve) {
  CheckResult r{name, true, ""};
  double worst_gap = 0.0;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < opt.instances; ++i) {
    const Catalog cat = random_small_catalog(mix_seed(opt.seed, kCatalogStream, i), 4);
    SplitMix64 rng(mix_seed(opt.seed, kInstanceStream, i));
    const Vec d = random_demand(rng, cat.n_files(), 10.0);
    const CachingStrategy pi = solve(d, cat);
    const auto grid = oracle::grid_max_hit(d, cat, 0.05);
    const double value = is_feasible(pi, cat) ? hit_rate(pi, d, cat) : -INFINITY;
    const double slack = oracle::hit_grid_slack(d, cat, 0.05);
    const double gap = grid.value - value;  // positive when the solver lost to a grid point
    worst_gap = std::max(worst_gap, gap);
    if (!(gap <= 1e-9 * std::max(1.0, grid.value)) || value > grid.value + slack + 1e-9) ++failures;
  }
  r.passed = failures == 0;
  r.detail = std::to_string(opt.instances) + " instances, " + std::to_string(failures) + " failures, worst gap " +
             format("%.3g", worst_gap);
  return r;
}

}  // namespace

Catalog random_small_catalog(std::uint64_t seed, std::size_t max_files) {
  SplitMix64 rng(seed);
  const std::size_t n = 1 + rng.below(max_files);
  Vec sizes(n);
  for (double& s : sizes) s = double(1 + rng.below(10));
  double total = 0.0;
  for (double s : sizes) total += s;
  // Budget in [0.1, 0.9] of the catalog keeps the constraint binding.
  return Catalog::make(std::move(sizes), total * (0.1 + 0.8 * rng.uniform()));
}

CheckResult check_knapsack_oracle(const ValidationOptions& opt) {
  return hit_oracle_check("knapsack-vs-grid", opt, knapsack_or_default(opt));
}

CheckResult check_lrfu_oracle(const ValidationOptions& opt) {
  return hit_oracle_check("lrfu-fractional-vs-grid", opt, [](std::span<const double> d, const Catalog& c) {
    return lrfu_strategy(d, c, LrfuConfig{10, LrfuMode::fractional, LrfuOrdering::by_value});
  });
}

CheckResult check_proximal_oracle(const ValidationOptions& opt) {
  const ProximalSolver solve = proximal_or_default(opt);
  CheckResult r{"proximal-qp-vs-grid", true, ""};
  double worst_gap = 0.0, worst_residual = 0.0;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < opt.instances; ++i) {
    const Catalog cat = random_small_catalog(mix_seed(opt.seed, kCatalogStream, 3, i), 3);
    SplitMix64 rng(mix_seed(opt.seed, kInstanceStream, 3, i));
    const Vec d = random_demand(rng, cat.n_files(), 3.0);
    Vec raw(cat.n_files());
    for (double& x : raw) x = rng.uniform();
    const CachingStrategy anchor = project_budget(raw, cat).strategy;
    const double lambda = 0.1 + 4.9 * rng.uniform();

    const CachingStrategy pi = solve(d, anchor, lambda, cat);
    const double value =
        is_feasible(pi, cat) ? federated_objective(pi.view(), d, anchor.view(), lambda, cat) : INFINITY;
    const auto grid = oracle::grid_min_proximal(d, anchor.view(), lambda, cat, 0.02);
    const double slack = oracle::proximal_grid_slack(d, anchor.view(), lambda, cat, 0.02);
    const double gap = value - grid.value;  // positive when a grid point beat the solver
    worst_gap = std::max(worst_gap, gap);
    bool ok = gap <= 1e-9 * std::max(1.0, std::abs(grid.value)) && grid.value - value <= 1e-3 + slack;

    // Binding iff the unconstrained clamp point overflows the budget.
    double free_len = 0.0;
    for (std::size_t f = 0; f < d.size(); ++f)
      free_len += std::clamp(anchor[f] + cat.sizes[f] * d[f] / (2.0 * lambda), 0.0, cat.fraction_cap) * cat.sizes[f];
    if (free_len > cat.cache_budget) {
      const double residual = std::abs(cached_length(pi.view(), cat) - cat.cache_budget);
      worst_residual = std::max(worst_residual, residual / cat.cache_budget);
      ok = ok && residual <= 1e-9 * cat.cache_budget;
    }
    if (!ok) ++failures;
  }
  r.passed = failures == 0;
  r.detail = std::to_string(opt.instances) + " instances, " + std::to_string(failures) + " failures, worst gap " +
             format("%.3g, worst relative budget residual %.3g", worst_gap, worst_residual);
  return r;
}

CheckResult check_subroutine_invariants(const ValidationOptions& opt, std::size_t windows) {
  CheckResult r{"subroutine-simplex-invariants", true, ""};
  std::size_t violations = 0, iterations = 0;
  const std::size_t tau = 4, tau1 = 2, tau2 = 2, T = tau + tau2 + 1;
  const Topology topo = Topology::line(3);
  for (std::size_t w = 0; w < windows; ++w) {
    const std::uint64_t s = mix_seed(opt.seed, 0x5B, w);
    SplitMix64 rng(s);
    const std::size_t n = 4 + rng.below(6);
    Catalog cat = Catalog::make(random_sizes(n, 1, 10, s), 1.0);
    cat.cache_budget = cat.total_size() * (0.1 + 0.6 * rng.uniform());
    SyntheticConfig sc;
    sc.zipf_exponent = 2.0 * rng.uniform();
    sc.n_regimes = 2;
    sc.regime_length = 3;
    sc.requests_per_slot = 20 + rng.below(200);
    sc.seed = s;
    const DemandTrace trace = generate_synthetic(cat, topo, T + 1, sc);

    const auto win = build_windows(trace, cat, topo, WindowSpec{T, tau, tau1, tau2}, Execution::serial);

    OptimizerConfig cfg;
    cfg.record_trace = true;
    cfg.a = 5.0 * rng.uniform();
    cfg.lambda = 2.0 * rng.uniform();
    cfg.max_iters = 100;
    const SubroutineResult res = run_subroutine(win, topo, cat, cfg, Execution::serial);
    for (const auto& rec : res.trace) {
      ++iterations;
      double a_sum = 0.0, w_sum = rec.w_self;
      bool ok = rec.w_self >= 0.0;
      for (double a : rec.alpha) {
        ok = ok && a >= 0.0;
        a_sum += a;
      }
      for (double x : rec.w_neighbors) {
        ok = ok && x >= 0.0;
        w_sum += x;
      }
      if (!ok || std::abs(a_sum - 1.0) > 1e-9 || std::abs(w_sum - 1.0) > 1e-9) ++violations;
    }
    for (const auto& pi : res.strategies)
      if (!is_feasible(pi, cat)) ++violations;
    for (const auto& st : res.states)
      for (const auto& p : st.pi_inner)
        if (!is_feasible(CachingStrategy(p), cat)) ++violations;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(windows) + " windows, " + std::to_string(iterations) + " iterate records, " +
             std::to_string(violations) + " violations";
  return r;
}

BoundFrequency lrfu_bound_violations(std::uint64_t seed, std::size_t windows, double delta, std::size_t tau) {
  BoundFrequency out;
  const std::size_t tau2 = std::max<std::size_t>(1, tau / 2);
  const std::size_t t = tau + tau2;
  const Topology topo = Topology::pentagon();
  for (std::size_t w = 0; w < windows; ++w) {
    const std::uint64_t s = mix_seed(seed, 0xB0, w);
    Catalog cat = Catalog::make(random_sizes(50, 10, 100, s), 1.0);
    cat.cache_budget = 0.2 * cat.total_size();
    SyntheticConfig sc;
    sc.requests_per_slot = 1000;
    sc.seed = s;
    const DemandTrace trace = generate_synthetic(cat, topo, t + 1, sc);
    Vec mean = demand_profile(cat.n_files(), topo.n_sbs(), sc, 0, 0);
    for (double& x : mean) x *= double(sc.requests_per_slot);
    const double expected = hit_rate(per_slot_optimal(mean, cat), mean, cat);
    const LrfuBoundRecord rec = lrfu_bound_diagnostic(trace, 0, t, tau, cat, delta, expected, tau2, tau2);
    ++out.windows;
    if (!rec.holds()) ++out.violations;
  }
  return out;
}

CheckResult check_lrfu_bound(const ValidationOptions& opt) {
  const BoundFrequency f = lrfu_bound_violations(opt.seed, opt.bound_windows, opt.delta);
  CheckResult r{"lrfu-bound-violation-frequency", f.frequency() <= opt.delta + 0.05, ""};
  r.detail = format("violation frequency %.4f over %.0f windows (limit %.4f)", f.frequency(), double(f.windows),
                    opt.delta + 0.05);
  return r;
}

std::vector<CheckResult> run_validation(const ValidationOptions& opt) {
  return {check_knapsack_oracle(opt), check_lrfu_oracle(opt), check_proximal_oracle(opt),
          check_subroutine_invariants(opt), check_lrfu_bound(opt)};
}

}  // namespace cocache
