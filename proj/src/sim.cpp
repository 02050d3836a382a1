#include "cocache/sim.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "cocache/discrepancy.hpp"
#include "cocache/errors.hpp"

namespace cocache {

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> kinds{
      PolicyKind::proposed, PolicyKind::uniform_w_optimal_alpha, PolicyKind::uniform_alpha_optimal_w,
      PolicyKind::zero_w_optimal_alpha, PolicyKind::lrfu, PolicyKind::federated,
      PolicyKind::uniform_static, PolicyKind::uniform_weights};
  return kinds;
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::proposed: return "proposed";
    case PolicyKind::uniform_w_optimal_alpha: return "uniform-w+optimal-alpha";
    case PolicyKind::uniform_alpha_optimal_w: return "uniform-alpha+optimal-w";
    case PolicyKind::zero_w_optimal_alpha: return "zero-w+optimal-alpha";
    case PolicyKind::lrfu: return "lrfu";
    case PolicyKind::federated: return "federated";
    case PolicyKind::uniform_static: return "uniform-static";
    case PolicyKind::uniform_weights: return "uniform-alpha+uniform-w";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  for (PolicyKind k : all_policies())
    if (policy_name(k) == name) return k;
  throw ValidationError("unknown policy '" + name + "'");
}

bool uses_subroutine(PolicyKind kind) {
  return kind != PolicyKind::lrfu && kind != PolicyKind::federated && kind != PolicyKind::uniform_static;
}

void SimConfig::validate() const {
  if (tau == 0 || tau1 == 0 || tau2 == 0) throw ValidationError("tau, tau1 and tau2 must be positive");
  if (tau1 > tau + tau2) throw ValidationError("tau1 must not exceed tau + tau2");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (refresh_every == 0) throw ValidationError("refresh_every must be positive");
  optimizer.validate();
  lrfu.validate();
  federated.validate();
}

OptimizerConfig SimConfig::optimizer_for(PolicyKind kind) const {
  OptimizerConfig o = optimizer;
  switch (kind) {
    case PolicyKind::uniform_w_optimal_alpha: o.w_mode = NeighborWeightMode::uniform; break;
    case PolicyKind::uniform_alpha_optimal_w: o.alpha_mode = AlphaMode::uniform; break;
    case PolicyKind::zero_w_optimal_alpha: o.w_mode = NeighborWeightMode::self_only; break;
    case PolicyKind::uniform_weights:
      o.alpha_mode = AlphaMode::uniform;
      o.w_mode = NeighborWeightMode::uniform;
      break;
    default: break;
  }
  return o;
}

double MetricsLog::cumulative_hit(std::size_t b) const {
  double total = 0.0;
  for (const auto& r : rows)
    if (r.sbs == b) total += r.hit;
  return total;
}

double MetricsLog::cumulative_hit() const {
  double total = 0.0;
  for (const auto& r : rows) total += r.hit;
  return total;
}

namespace {

struct WindowDiagnostics {
  double regret_over_tau = 0.0, disc = 0.0, mismatch = 0.0, eps1 = 0.0, eps2 = 0.0;
};

WindowDiagnostics diagnose(std::size_t b, const SubroutineResult& res, const std::vector<SbsWindow>& windows,
                           const DemandTrace& trace, const Catalog& catalog, const Topology& topology,
                           std::size_t T, const SimConfig& cfg, const OptimizerConfig& opt) {
  WindowDiagnostics d;
  const auto& state = res.states[b];
  const auto& window = windows[b];
  std::vector<Vec> nb_alpha;
  for (std::size_t j : topology.neighbors(b)) nb_alpha.push_back(res.states[j].alpha);
  const double regret =
      realized_regret(window.regret_strategies, trace, catalog, b, T, cfg.tau, DemandScale::normalized);
  d.regret_over_tau = regret / double(cfg.tau);
  d.disc = discrepancy_sup(window.psi, state.alpha, catalog).value;
  const MismatchBasis basis = window.neighbor_own.empty() ? MismatchBasis::local : opt.mismatch_basis;
  d.mismatch = mismatch_for(state, nb_alpha, window, basis);
  const double h_max = h_max_estimate(trace, catalog, b, T, cfg.tau, DemandScale::normalized);
  if (h_max > 0.0) {
    Vec w{state.w_self};
    w.insert(w.end(), state.w_neighbors.begin(), state.w_neighbors.end());
    const BoundReport r = bound_report(state.alpha, w, regret, d.disc, d.mismatch, h_max, cfg.delta, cfg.tau);
    d.eps1 = r.epsilon1;
    d.eps2 = r.epsilon2;
  } else {
    d.eps1 = d.mismatch + d.disc;
    d.eps2 = d.mismatch + 2.0 * d.regret_over_tau + 2.0 * d.disc;
  }
  return d;
}

}  // namespace

MetricsLog run_simulation(const DemandTrace& trace, const Catalog& catalog, const Topology& topology,
                          PolicyKind policy, const SimConfig& cfg, double cache_frac) {
  cfg.validate();
  catalog.validate();
  const std::size_t M = topology.n_sbs();
  if (trace.n_sbs() != M)
    throw ValidationError("trace has " + std::to_string(trace.n_sbs()) + " sBSs, topology has " +
                          std::to_string(M));
  if (trace.n_files() != catalog.n_files())
    throw ValidationError("trace has " + std::to_string(trace.n_files()) + " files, catalog has " +
                          std::to_string(catalog.n_files()));

  const OptimizerConfig opt = cfg.optimizer_for(policy);
  const bool literal_mismatch = opt.mismatch_basis == MismatchBasis::literal;
  LrfuConfig lrfu = cfg.lrfu;
  lrfu.tau = cfg.tau;
  FederatedConfig fed = cfg.federated;
  fed.tau = cfg.tau;
  const DemandTrace fed_trace = policy == PolicyKind::federated && cfg.federated_scale == DemandScale::normalized
                                    ? trace.normalized()
                                    : DemandTrace();
  const DemandTrace& fed_source = fed_trace.n_slots() ? fed_trace : trace;

  MetricsLog log;
  log.n_sbs = M;
  log.rows.reserve(trace.n_slots() * M);
  std::vector<CachingStrategy> installed(M, uniform_strategy(catalog));
  FederatedState fed_state = FederatedState::initial(catalog, M);
  Vec cum(M, 0.0);
  const std::size_t first_full = cfg.tau + cfg.tau2 - 1;

  for (std::size_t T = 0; T < trace.n_slots(); ++T) {
    const std::size_t base = log.rows.size();
    for (std::size_t b = 0; b < M; ++b) {
      MetricsRow row;
      row.slot = T;
      row.sbs = b;
      row.policy = policy;
      row.cache_frac = cache_frac;
      row.hit = hit_rate(installed[b], trace.row(T, b), catalog);
      cum[b] += row.hit;
      row.cum_hit = cum[b];
      log.rows.push_back(row);
    }
    if (T + 1 == trace.n_slots()) break;

    // Slot boundary: everything below reads slots <= T only.
    switch (policy) {
      case PolicyKind::uniform_static:
        break;
      case PolicyKind::lrfu:
        for (std::size_t b = 0; b < M; ++b)
          installed[b] = lrfu_strategy(lrfu_demand_estimate(trace, b, T + 1, lrfu.tau), catalog, lrfu);
        break;
      case PolicyKind::federated:
        fed_state = federated_round(fed_state, fed_source, topology, catalog, T + 1, fed, cfg.exec);
        installed = fed_state.strategies;
        break;
      default: {
        if (T < first_full) {
          const LrfuConfig warm{cfg.tau, LrfuMode::fractional, lrfu.ordering};
          for (std::size_t b = 0; b < M; ++b)
            installed[b] = lrfu_strategy(lrfu_demand_estimate(trace, b, T + 1, cfg.tau), catalog, warm);
          break;
        }
        if ((T - first_full) % cfg.refresh_every != 0) break;
        const WindowSpec spec{T, cfg.tau, cfg.tau1, cfg.tau2, cfg.regret_mode, literal_mismatch};
        const auto windows = build_windows(trace, catalog, topology, spec, cfg.exec);
        const SubroutineResult res = run_subroutine(windows, topology, catalog, opt, cfg.exec);
        installed = res.strategies;
        for (std::size_t b = 0; b < M; ++b) {
          const WindowDiagnostics d = diagnose(b, res, windows, trace, catalog, topology, T, cfg, opt);
          MetricsRow& row = log.rows[base + b];
          row.regret_over_tau = d.regret_over_tau;
          row.disc_hat = d.disc;
          row.mismatch_hat = d.mismatch;
          row.eps1 = d.eps1;
          row.eps2 = d.eps2;
          row.iters = res.iterations;
        }
      }
    }
  }
  return log;
}

namespace {

// Shortest text that reads back to the same double.
struct Num {
  double x;
};

std::ostream& operator<<(std::ostream& out, Num n) {
  if (std::isnan(n.x)) return out << "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.x);
  return out << std::string_view(buf, std::size_t(ptr - buf));
}

}  // namespace

void write_metrics_csv(const std::vector<const MetricsLog*>& logs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "slot,sbs,policy,cache_frac,hit,cum_hit,regret_over_tau,disc_hat,mismatch_hat,eps1,eps2,iters\n";
  for (const MetricsLog* log : logs)
    for (const auto& r : log->rows) {
      out << r.slot << ',' << r.sbs << ',' << policy_name(r.policy) << ',' << Num{r.cache_frac} << ','
          << Num{r.hit} << ',' << Num{r.cum_hit} << ',' << Num{r.regret_over_tau} << ',' << Num{r.disc_hat} << ','
          << Num{r.mismatch_hat} << ',' << Num{r.eps1} << ',' << Num{r.eps2} << ',' << r.iters << '\n';
    }
}

Comparison compare_policies(const DemandTrace& trace, const Vec& sizes, const Topology& topology,
                            const std::vector<PolicyKind>& policies, const Vec& cache_fracs, const SimConfig& cfg,
                            double fraction_cap) {
  if (policies.empty()) throw ValidationError("no policies to compare");
  if (cache_fracs.empty()) throw ValidationError("no cache fractions given");
  for (double f : cache_fracs)
    if (!(f > 0.0)) throw ValidationError("cache fractions must be positive");
  cfg.validate();

  Comparison cmp;
  cmp.reference = policies.front();
  for (PolicyKind p : policies)
    if (p == PolicyKind::proposed) cmp.reference = p;

  double total = 0.0;
  for (double s : sizes) total += s;
  const std::size_t P = policies.size();
  const std::size_t runs = cache_fracs.size() * P;
  cmp.logs.resize(runs);

  // Runs are independent; inner kernels go serial to avoid nested teams.
  SimConfig inner = cfg;
  if (cfg.exec == Execution::parallel && runs > 1) inner.exec = Execution::serial;
  auto run = [&](std::size_t k) {
    Catalog catalog = Catalog::make(sizes, cache_fracs[k / P] * total);
    catalog.fraction_cap = fraction_cap;
    cmp.logs[k] = run_simulation(trace, catalog, topology, policies[k % P], inner, cache_fracs[k / P]);
  };
  if (cfg.exec == Execution::parallel && runs > 1) {
    COCACHE_OMP_PRAGMA("omp parallel for schedule(dynamic)")
    for (long long k = 0; k < static_cast<long long>(runs); ++k) run(std::size_t(k));
  } else {
    for (std::size_t k = 0; k < runs; ++k) run(k);
  }

  const std::size_t M = topology.n_sbs();
  const double n_slots = double(std::max<std::size_t>(trace.n_slots(), 1));
  std::size_t ref_index = 0;
  while (policies[ref_index] != cmp.reference) ++ref_index;
  auto ratio = [](double ref, double x) {
    if (ref == x) return 0.0;
    if (ref <= 0.0 || x <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::log(ref / x);
  };
  for (std::size_t c = 0; c < cache_fracs.size(); ++c) {
    const MetricsLog& ref = cmp.logs[c * P + ref_index];
    for (std::size_t p = 0; p < P; ++p) {
      const MetricsLog& log = cmp.logs[c * P + p];
      for (std::size_t b = 0; b <= M; ++b) {
        ComparisonRow row;
        row.policy = policies[p];
        row.cache_frac = cache_fracs[c];
        if (b < M) row.sbs = b;
        row.cum_hit = b < M ? log.cumulative_hit(b) : log.cumulative_hit();
        row.avg_hit = row.cum_hit / n_slots;
        const double ref_hit = b < M ? ref.cumulative_hit(b) : ref.cumulative_hit();
        row.log_ratio = ratio(ref_hit, row.cum_hit);
        cmp.rows.push_back(row);
      }
    }
  }
  return cmp;
}

void write_comparison_csv(const Comparison& cmp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "policy,cache_frac,sbs,cum_hit,avg_hit,log_ratio_vs_" << policy_name(cmp.reference) << '\n';
  for (const auto& r : cmp.rows) {
    out << policy_name(r.policy) << ',' << Num{r.cache_frac} << ',';
    if (r.sbs) out << *r.sbs;
    else out << "sum";
    out << ',' << Num{r.cum_hit} << ',' << Num{r.avg_hit} << ',' << Num{r.log_ratio} << '\n';
  }
}

std::vector<LambdaSweepRow> lambda_sweep(const DemandTrace& trace, const Vec& sizes, const Topology& topology,
                                         const Vec& lambdas, const Vec& cache_fracs, const SimConfig& cfg,
                                         double fraction_cap) {
  for (double l : lambdas)
    if (l < 0.0) throw ValidationError("lambda sweep values must be non-negative");
  double total = 0.0;
  for (double s : sizes) total += s;
  const std::size_t L = lambdas.size();
  std::vector<LambdaSweepRow> rows(cache_fracs.size() * L);
  SimConfig inner = cfg;
  inner.exec = Execution::serial;
  auto run = [&](std::size_t k) {
    Catalog catalog = Catalog::make(sizes, cache_fracs[k / L] * total);
    catalog.fraction_cap = fraction_cap;
    SimConfig c = inner;
    c.federated.lambda = lambdas[k % L];
    const MetricsLog log = run_simulation(trace, catalog, topology, PolicyKind::federated, c, cache_fracs[k / L]);
    rows[k] = {cache_fracs[k / L], lambdas[k % L], log.cumulative_hit(),
               log.cumulative_hit() / double(std::max<std::size_t>(trace.n_slots(), 1))};
  };
  if (cfg.exec == Execution::parallel) {
    COCACHE_OMP_PRAGMA("omp parallel for schedule(dynamic)")
    for (long long k = 0; k < static_cast<long long>(rows.size()); ++k) run(std::size_t(k));
  } else {
    for (std::size_t k = 0; k < rows.size(); ++k) run(k);
  }
  return rows;
}

void write_lambda_csv(const std::vector<LambdaSweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "cache_frac,lambda,cum_hit,avg_hit\n";
  for (const auto& r : rows) out << Num{r.cache_frac} << ',' << Num{r.lambda} << ',' << Num{r.cum_hit} << ',' << Num{r.avg_hit} << '\n';
}

}  // namespace cocache
