#include <doctest.h>

#include <cmath>
#include <random>

#include "cocache/errors.hpp"
#include "cocache/sim.hpp"
#include "helpers.hpp"

using namespace cocache;
using namespace cocache::testing;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.tau = 4;
  cfg.tau1 = 2;
  cfg.tau2 = 2;
  cfg.optimizer.max_iters = 60;
  return cfg;
}

struct Setup {
  Catalog catalog;
  Topology topology;
  DemandTrace trace;
};

Setup regime_setup(std::uint64_t seed, std::size_t slots = 24, Topology topo = Topology::pentagon()) {
  Catalog c = Catalog::make(random_sizes(15, 10, 100, seed), 1.0);
  c.cache_budget = 0.3 * c.total_size();
  SyntheticConfig sc;
  sc.zipf_exponent = 0.8;
  sc.n_regimes = 3;
  sc.regime_length = 5;
  sc.requests_per_slot = 300;
  sc.seed = seed;
  auto trace = generate_synthetic(c, topo, slots, sc);
  return {c, std::move(topo), std::move(trace)};
}

}  // namespace

TEST_CASE("policy names round-trip") {
  CHECK(all_policies().size() == 8);
  for (PolicyKind p : all_policies()) CHECK(parse_policy(policy_name(p)) == p);
  CHECK(policy_name(PolicyKind::uniform_weights) == "uniform-alpha+uniform-w");
  CHECK_THROWS_AS(parse_policy("lru"), ValidationError);
  CHECK(uses_subroutine(PolicyKind::proposed));
  CHECK_FALSE(uses_subroutine(PolicyKind::lrfu));
}

TEST_CASE("default operating point") {
  SimConfig cfg;
  CHECK(cfg.tau == 10);
  CHECK(cfg.tau1 == 5);
  CHECK(cfg.tau2 == 5);
  CHECK(cfg.federated.lambda == 2.0);
  cfg.refresh_every = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("exchange delivers exactly the neighbors' payloads") {
  CHECK(exchange(std::vector<int>{7}, Topology::isolated(1))[0].empty());
  auto two = exchange(std::vector<int>{10, 20}, Topology::line(2));
  CHECK(two[0] == std::vector<int>{20});
  CHECK(two[1] == std::vector<int>{10});
  auto five = exchange(std::vector<int>{1, 2, 3, 4, 5}, Topology::pentagon());
  CHECK(five[2] == std::vector<int>{2, 4});
}

TEST_CASE("zero trace scores zero for every policy") {
  Catalog c = Catalog::make(random_sizes(6, 1, 10, 1), 10);
  DemandTrace zero(15, 5, 6);
  QuietWarnings quiet;
  for (PolicyKind p : all_policies()) {
    auto log = run_simulation(zero, c, Topology::pentagon(), p, small_config());
    CHECK(log.rows.size() == 15 * 5);
    for (const auto& r : log.rows) CHECK(r.hit == 0.0);
    CHECK(log.cumulative_hit() == 0.0);
  }
}

TEST_CASE("full cache serves everything") {
  auto s = regime_setup(2);
  QuietWarnings quiet;
  Catalog full = Catalog::make(s.catalog.sizes, s.catalog.total_size());
  auto log = run_simulation(s.trace, full, s.topology, PolicyKind::uniform_static, small_config());
  for (const auto& r : log.rows) {
    double expect = 0;
    for (std::size_t f = 0; f < full.n_files(); ++f) expect += s.trace.at(r.slot, r.sbs, f) * full.sizes[f];
    CHECK(r.hit == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("realized hits stay under the per-slot optimum and sums are running totals") {
  auto s = regime_setup(3);
  for (PolicyKind p : all_policies()) {
    auto log = run_simulation(s.trace, s.catalog, s.topology, p, small_config());
    Vec running(5, 0.0);
    for (const auto& r : log.rows) {
      auto d = s.trace.row(r.slot, r.sbs);
      CHECK(r.hit >= 0.0);
      CHECK(r.hit <= hit_rate(per_slot_optimal(d, s.catalog), d, s.catalog) * (1 + 1e-12));
      running[r.sbs] += r.hit;
      CHECK(r.cum_hit == running[r.sbs]);
    }
    double total = 0;
    for (std::size_t b = 0; b < 5; ++b) {
      CHECK(log.cumulative_hit(b) == running[b]);
      total += running[b];
    }
    CHECK(log.cumulative_hit() == doctest::Approx(total));
  }
}

TEST_CASE("diagnostics appear once windows are full") {
  auto s = regime_setup(4);
  auto cfg = small_config();
  auto log = run_simulation(s.trace, s.catalog, s.topology, PolicyKind::proposed, cfg);
  const std::size_t first = cfg.tau + cfg.tau2 - 1;
  for (const auto& r : log.rows) {
    if (r.slot < first || r.slot + 1 == s.trace.n_slots()) {
      CHECK(r.iters == 0);
      CHECK(r.eps1 == 0.0);
    } else {
      CHECK(r.iters > 0);
      CHECK(r.eps1 >= r.disc_hat);
      CHECK(r.regret_over_tau == doctest::Approx(0.0).scale(1.0));
    }
  }

  cfg.refresh_every = 3;
  auto sparse = run_simulation(s.trace, s.catalog, s.topology, PolicyKind::proposed, cfg);
  for (const auto& r : sparse.rows)
    if (r.slot >= first && r.slot + 1 < s.trace.n_slots()) CHECK((r.iters > 0) == ((r.slot - first) % 3 == 0));
}

TEST_CASE("results do not depend on the thread count") {
  auto s = regime_setup(5);
  for (PolicyKind p : {PolicyKind::proposed, PolicyKind::federated, PolicyKind::uniform_alpha_optimal_w}) {
    set_threads(1);
    auto one = run_simulation(s.trace, s.catalog, s.topology, p, small_config());
    set_threads(4);
    auto four = run_simulation(s.trace, s.catalog, s.topology, p, small_config());
    auto cfg = small_config();
    cfg.exec = Execution::serial;
    auto serial = run_simulation(s.trace, s.catalog, s.topology, p, cfg);
    CHECK(one == four);
    CHECK(one == serial);
  }
  set_threads(max_threads());
}

TEST_CASE("slot-T scoring ignores slot-T demand") {
  // If the strategy scored at slot T were computed with slot-T demand, the
  // slot-T hit would not be additive in that demand.
  auto s = regime_setup(6);
  const std::size_t T = 12, n = s.catalog.n_files();
  auto with_row = [&](const Vec& row) {
    DemandTrace t = s.trace;
    for (std::size_t b = 0; b < 5; ++b)
      for (std::size_t f = 0; f < n; ++f) t.at(T, b, f) = row[f];
    return t;
  };
  std::mt19937_64 rng(6);
  for (PolicyKind p : all_policies()) {
    const auto base = run_simulation(s.trace, s.catalog, s.topology, p, small_config());
    Vec a = random_vec(rng, n, 0, 50), b = random_vec(rng, n, 0, 50), ab(n);
    for (std::size_t f = 0; f < n; ++f) ab[f] = a[f] + b[f];
    const auto la = run_simulation(with_row(a), s.catalog, s.topology, p, small_config());
    const auto lb = run_simulation(with_row(b), s.catalog, s.topology, p, small_config());
    const auto lab = run_simulation(with_row(ab), s.catalog, s.topology, p, small_config());
    for (std::size_t i = 0; i < base.rows.size(); ++i) {
      const auto& r = base.rows[i];
      if (r.slot < T) {
        CHECK(la.rows[i] == r);
      } else if (r.slot == T) {
        CHECK(lab.rows[i].hit == doctest::Approx(la.rows[i].hit + lb.rows[i].hit).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("zero-w and proposed coincide on a single sBS") {
  auto s = regime_setup(7, 24, Topology::isolated(1));
  auto a = run_simulation(s.trace, s.catalog, s.topology, PolicyKind::proposed, small_config());
  auto b = run_simulation(s.trace, s.catalog, s.topology, PolicyKind::zero_w_optimal_alpha, small_config());
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].hit == b.rows[i].hit);
}

TEST_CASE("topology mismatch is rejected up front") {
  auto s = regime_setup(8);
  CHECK_THROWS_AS(run_simulation(s.trace, s.catalog, Topology::line(3), PolicyKind::lrfu, small_config()),
                  ValidationError);
}

TEST_CASE("compare_policies") {
  auto s = regime_setup(9);
  auto cfg = small_config();
  auto single = compare_policies(s.trace, s.catalog.sizes, s.topology, {PolicyKind::lrfu}, {0.2}, cfg);
  CHECK(single.reference == PolicyKind::lrfu);
  CHECK(single.rows.size() == 6);
  for (const auto& r : single.rows) CHECK(r.log_ratio == 0.0);

  auto twice = compare_policies(s.trace, s.catalog.sizes, s.topology, {PolicyKind::lrfu, PolicyKind::lrfu},
                                {0.1, 0.3}, cfg);
  CHECK(twice.logs.size() == 4);
  CHECK(twice.logs[0] == twice.logs[1]);
  CHECK(twice.logs[2] == twice.logs[3]);

  auto mixed = compare_policies(s.trace, s.catalog.sizes, s.topology,
                                {PolicyKind::lrfu, PolicyKind::proposed, PolicyKind::uniform_static}, {0.2, 0.4}, cfg);
  CHECK(mixed.reference == PolicyKind::proposed);
  for (const auto& r : mixed.rows) {
    if (r.policy == PolicyKind::proposed) CHECK(r.log_ratio == 0.0);
    CHECK(r.avg_hit == doctest::Approx(r.cum_hit / double(s.trace.n_slots())));
  }
  // Each run matches a standalone simulation.
  Catalog c = Catalog::make(s.catalog.sizes, 0.4 * s.catalog.total_size());
  CHECK(mixed.logs[4] == run_simulation(s.trace, c, s.topology, PolicyKind::proposed, cfg, 0.4));

  auto dir = temp_dir("compare");
  write_comparison_csv(mixed, dir / "cmp.csv");
  const std::string text = read_file(dir / "cmp.csv");
  CHECK(text.rfind("policy,cache_frac,sbs,cum_hit,avg_hit,log_ratio_vs_proposed\n", 0) == 0);
  CHECK(text.find("lrfu,0.2,sum,") != std::string::npos);

  std::vector<const MetricsLog*> logs{&mixed.logs[0]};
  write_metrics_csv(logs, dir / "metrics.csv");
  const std::string metrics = read_file(dir / "metrics.csv");
  CHECK(metrics.rfind("slot,sbs,policy,cache_frac,hit,cum_hit,regret_over_tau,disc_hat,mismatch_hat,eps1,eps2,iters\n", 0) == 0);

  CHECK_THROWS_AS(compare_policies(s.trace, s.catalog.sizes, s.topology, {}, {0.2}, cfg), ValidationError);
  CHECK_THROWS_AS(compare_policies(s.trace, s.catalog.sizes, s.topology, {PolicyKind::lrfu}, {0.0}, cfg),
                  ValidationError);
}

TEST_CASE("lambda sweep") {
  auto s = regime_setup(10);
  auto rows = lambda_sweep(s.trace, s.catalog.sizes, s.topology, {0.5, 1, 2, 4, 8}, {0.1, 0.3}, small_config());
  CHECK(rows.size() == 10);
  for (const auto& r : rows) CHECK(r.cum_hit > 0);
  auto dir = temp_dir("lambda");
  write_lambda_csv(rows, dir / "l.csv");
  CHECK(read_file(dir / "l.csv").rfind("cache_frac,lambda,cum_hit,avg_hit\n", 0) == 0);
}
