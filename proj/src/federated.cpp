#include "cocache/federated.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cocache/errors.hpp"
#include "cocache/lrfu.hpp"

namespace cocache {

CachingStrategy neighbor_average(const std::vector<CachingStrategy>& received) {
  if (received.empty()) throw ValidationError("neighbor_average needs at least one strategy");
  const std::size_t n = received.front().size();
  Vec mean(n, 0.0);
  for (const auto& s : received) {
    if (s.size() != n) throw ValidationError("neighbor strategies differ in length");
    for (std::size_t f = 0; f < n; ++f) mean[f] += s[f];
  }
  for (double& x : mean) x /= double(received.size());
  return CachingStrategy(std::move(mean));
}

double federated_objective(std::span<const double> pi, std::span<const double> d_hat,
                           std::span<const double> anchor, double lambda, const Catalog& catalog) {
  double miss = 0.0, prox = 0.0;
  for (std::size_t f = 0; f < pi.size(); ++f) {
    miss += (1.0 - pi[f]) * catalog.sizes[f] * d_hat[f];
    prox += (pi[f] - anchor[f]) * (pi[f] - anchor[f]);
  }
  return miss + lambda * prox;
}

namespace {

// pi_f(mu) = clamp(anchor_f + L_f (dhat_f - mu) / (2 lambda), 0, cap)
void fill(Vec& pi, double mu, std::span<const double> d_hat, const CachingStrategy& anchor, double lambda,
          const Catalog& catalog) {
  for (std::size_t f = 0; f < pi.size(); ++f) {
    const double x = anchor[f] + catalog.sizes[f] * (d_hat[f] - mu) / (2.0 * lambda);
    pi[f] = std::clamp(x, 0.0, catalog.fraction_cap);
  }
}

}  // namespace

CachingStrategy federated_solve(std::span<const double> d_hat, const CachingStrategy& anchor, double lambda,
                                const Catalog& catalog) {
  if (lambda < 0.0 || !std::isfinite(lambda)) throw ValidationError("federated lambda must be finite and >= 0");
  if (d_hat.size() != catalog.n_files() || anchor.size() != catalog.n_files())
    throw ValidationError("federated_solve: dimensions do not match catalog");
  if (lambda == 0.0) {
    warn("federated lambda = 0: objective is linear, using the per-slot optimum");
    return per_slot_optimal(d_hat, catalog);
  }
  if (!std::isfinite(catalog.fraction_cap)) throw ValidationError("federated_solve requires a finite fraction cap");

  const double C = catalog.cache_budget;
  Vec pi(d_hat.size());
  fill(pi, 0.0, d_hat, anchor, lambda, catalog);
  if (cached_length(pi, catalog) <= C) return CachingStrategy(std::move(pi));

  // Cached length is non-increasing in mu and reaches 0 once every entry clamps
  // at zero.
  double lo = 0.0, hi = 1.0;
  for (;;) {
    fill(pi, hi, d_hat, anchor, lambda, catalog);
    if (cached_length(pi, catalog) <= C) break;
    lo = hi;
    hi *= 2.0;
  }
  // Bisect down to adjacent doubles; hi always stays feasible.
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(lo < mid && mid < hi)) break;
    fill(pi, mid, d_hat, anchor, lambda, catalog);
    if (cached_length(pi, catalog) > C) lo = mid;
    else hi = mid;
  }
  fill(pi, hi, d_hat, anchor, lambda, catalog);
  return CachingStrategy(std::move(pi));
}

void FederatedConfig::validate() const {
  if (lambda < 0.0) throw ValidationError("federated lambda must be non-negative");
  if (tau == 0) throw ValidationError("federated tau must be positive");
}

FederatedState FederatedState::initial(const Catalog& catalog, std::size_t n_sbs) {
  FederatedState s;
  s.strategies.assign(n_sbs, uniform_strategy(catalog));
  s.anchors = s.strategies;
  s.d_hat.assign(n_sbs, Vec(catalog.n_files(), 0.0));
  return s;
}

FederatedState federated_round(const FederatedState& state, const DemandTrace& trace, const Topology& topology,
                               const Catalog& catalog, std::size_t t, const FederatedConfig& cfg, Execution exec) {
  cfg.validate();
  const std::size_t M = topology.n_sbs();
  if (t == 0) throw ValidationError("federated_round needs t >= 1");
  if (state.strategies.size() != M || trace.n_sbs() != M)
    throw ValidationError("federated state, trace and topology disagree on sBS count");

  FederatedState next;
  next.strategies.resize(M);
  next.anchors.resize(M);
  next.d_hat.resize(M);
  next.round = state.round + 1;

  auto solve = [&](std::size_t b) {
    std::vector<CachingStrategy> received;
    for (std::size_t j : topology.neighbors(b)) received.push_back(state.strategies[j]);
    if (cfg.include_self || received.empty()) received.push_back(state.strategies[b]);
    next.anchors[b] = neighbor_average(received);
    next.d_hat[b] = windowed_demand_estimate(trace, b, t, cfg.tau);
    next.strategies[b] = federated_solve(next.d_hat[b], next.anchors[b], cfg.lambda, catalog);
  };
  if (exec == Execution::parallel) {
    COCACHE_OMP_PRAGMA("omp parallel for schedule(static)")
    for (long long b = 0; b < static_cast<long long>(M); ++b) solve(std::size_t(b));
  } else {
    for (std::size_t b = 0; b < M; ++b) solve(b);
  }
  return next;
}

}  // namespace cocache
