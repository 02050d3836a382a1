#include "cocache/lrfu.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "cocache/discrepancy.hpp"
#include "cocache/errors.hpp"

namespace cocache {

void LrfuConfig::validate() const {
  if (tau == 0) throw ValidationError("lrfu tau must be positive");
}

Vec windowed_demand_estimate(const DemandTrace& trace, std::size_t b, std::size_t t, std::size_t span) {
  if (span == 0) throw ValidationError("demand window must be positive");
  if (t == 0) throw ValidationError("demand estimate at slot 0 has no history");
  if (t > trace.n_slots()) throw IndexError("slot " + std::to_string(t) + " out of range");
  if (b >= trace.n_sbs()) throw IndexError("sBS " + std::to_string(b) + " out of range");
  const std::size_t first = t > span ? t - span : 0;
  Vec mean(trace.n_files(), 0.0);
  for (std::size_t s = first; s < t; ++s) {
    auto row = trace.row(s, b);
    for (std::size_t f = 0; f < row.size(); ++f) mean[f] += row[f];
  }
  const double n = double(t - first);
  for (double& x : mean) x /= n;
  return mean;
}

CachingStrategy lrfu_strategy(std::span<const double> d_hat, const Catalog& catalog, const LrfuConfig& cfg) {
  cfg.validate();
  if (d_hat.size() != catalog.n_files()) throw ValidationError("demand estimate does not match catalog");
  for (double x : d_hat)
    if (x < 0.0) throw ValidationError("negative demand estimate");
  if (cfg.mode == LrfuMode::fractional) return per_slot_optimal(d_hat, catalog);

  Vec key(d_hat.begin(), d_hat.end());
  if (cfg.ordering == LrfuOrdering::by_value)
    for (std::size_t f = 0; f < key.size(); ++f) key[f] *= catalog.sizes[f];
  std::vector<std::size_t> order(key.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });

  // Integral placements store whole files, so the fraction cap is 1 at most.
  const double whole = std::min(1.0, catalog.fraction_cap);
  CachingStrategy pi = CachingStrategy::zeros(key.size());
  double remaining = catalog.cache_budget;
  for (std::size_t f : order) {
    const double need = whole * catalog.sizes[f];
    if (need <= remaining) {
      pi[f] = whole;
      remaining -= need;
    }
  }
  return pi;
}

LrfuBoundRecord lrfu_bound_diagnostic(const DemandTrace& trace, std::size_t b, std::size_t t, std::size_t tau,
                                      const Catalog& catalog, double delta, std::optional<double> expected_optimum,
                                      std::size_t tau1, std::size_t tau2) {
  if (tau == 0) throw ValidationError("window length must be positive");
  if (tau1 == 0) tau1 = std::max<std::size_t>(1, tau / 2);
  if (tau2 == 0) tau2 = std::max<std::size_t>(1, tau / 2);
  if (t == 0) throw ValidationError("bound diagnostic at slot 0 has no history");
  const std::size_t last = t - 1;

  LrfuBoundRecord r;
  const Vec d_hat = lrfu_demand_estimate(trace, b, t, tau);
  const CachingStrategy pi = lrfu_strategy(d_hat, catalog, LrfuConfig{tau, LrfuMode::fractional});
  r.lhs = hit_rate(pi, d_hat, catalog);

  if (expected_optimum) {
    r.sup_term = *expected_optimum;
  } else {
    const std::size_t first = window_start(last, tau);
    for (std::size_t s = first; s <= last; ++s) {
      auto d = trace.row(s, b);
      r.sup_term += hit_rate(per_slot_optimal(d, catalog), d, catalog);
    }
    r.sup_term /= double(last - first + 1);
  }

  const Vec uniform(tau, 1.0 / double(tau));
  r.d_gl = global_local_discrepancy_estimate(trace, catalog, b, last, tau, DemandScale::raw);
  const PsiTable psi = psi_table(trace, catalog, b, last, tau, tau1, tau2, DemandScale::raw);
  r.d_local = discrepancy_sup(psi, uniform, catalog).value;
  r.h_max = h_max_estimate(trace, catalog, b, last, tau, DemandScale::raw);
  r.azuma = azuma_term(uniform, r.h_max, delta, tau);
  return r;
}

}  // namespace cocache
