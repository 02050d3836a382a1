#include "cocache/discrepancy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cocache/errors.hpp"

namespace cocache {

namespace {

// Per-file mean over slots [first, last] at sBS b.
Vec window_mean(const DemandTrace& trace, std::size_t b, std::size_t first, std::size_t last, DemandScale scale) {
  Vec mean(trace.n_files(), 0.0);
  for (std::size_t l = first; l <= last; ++l) {
    auto row = trace.row(l, b);
    if (scale == DemandScale::normalized) {
      const Vec p = normalize_slot(row);
      for (std::size_t f = 0; f < p.size(); ++f) mean[f] += p[f];
    } else {
      for (std::size_t f = 0; f < row.size(); ++f) mean[f] += row[f];
    }
  }
  const double n = double(last - first + 1);
  for (double& x : mean) x /= n;
  return mean;
}

// max over feasible pi of sum_f value_f * pi_f, where value already carries L_f.
std::pair<double, CachingStrategy> best_response(std::span<const double> value, const Catalog& catalog) {
  Vec per_unit(value.size());
  for (std::size_t f = 0; f < value.size(); ++f) per_unit[f] = value[f] / catalog.sizes[f];
  CachingStrategy pi = fractional_knapsack(per_unit, catalog, true);
  double total = 0.0;
  for (std::size_t f = 0; f < value.size(); ++f) total += value[f] * pi[f];
  return {total, std::move(pi)};
}

void check_alpha(std::span<const double> alpha, std::size_t tau) {
  if (alpha.size() != tau)
    throw ValidationError("alpha has length " + std::to_string(alpha.size()) + ", window has " + std::to_string(tau));
}

}  // namespace

PsiTable psi_table(const DemandTrace& trace, const Catalog& catalog, std::size_t b, std::size_t T, std::size_t tau,
                   std::size_t tau1, std::size_t tau2, DemandScale scale) {
  if (tau == 0 || tau1 == 0 || tau2 == 0) throw ValidationError("psi windows must be positive");
  if (catalog.n_files() != trace.n_files()) throw ValidationError("catalog and trace disagree on file count");
  if (T >= trace.n_slots()) throw IndexError("slot " + std::to_string(T) + " out of range");
  if (b >= trace.n_sbs()) throw IndexError("sBS " + std::to_string(b) + " out of range");
  if (tau1 > T + 1) throw ValidationError("tau1 window needs slots before 0 at T=" + std::to_string(T));
  if (T + 1 < tau + tau2)
    throw ValidationError("psi window underflow: earliest required slot is " +
                          std::to_string(static_cast<long long>(T) + 1 - static_cast<long long>(tau + tau2)) +
                          ", first available is 0");

  const std::size_t n = trace.n_files();
  PsiTable psi{tau, n, T, tau1, tau2, Vec(tau * n, 0.0)};
  // Prefix sums over slots lo..T: prefix[k] holds rows lo..lo+k-1.
  const std::size_t lo = std::min(T + 1 - tau - tau2, T + 1 - tau1);
  const std::size_t span = T + 1 - lo;
  Vec prefix((span + 1) * n, 0.0);
  for (std::size_t k = 0; k < span; ++k) {
    auto raw = trace.row(lo + k, b);
    const Vec row = scale == DemandScale::normalized ? normalize_slot(raw) : Vec(raw.begin(), raw.end());
    for (std::size_t f = 0; f < n; ++f) prefix[(k + 1) * n + f] = prefix[k * n + f] + row[f];
  }
  // Mean over slots [first, last].
  auto mean = [&](std::size_t first, std::size_t last, std::size_t f) {
    return (prefix[(last + 1 - lo) * n + f] - prefix[(first - lo) * n + f]) / double(last - first + 1);
  };
  const std::size_t start = T + 1 - tau;
  for (std::size_t i = 0; i < tau; ++i) {
    const std::size_t t = start + i;
    for (std::size_t f = 0; f < n; ++f)
      psi(i, f) = catalog.sizes[f] * (mean(T + 1 - tau1, T, f) - mean(t - tau2, t - 1, f));
  }
  return psi;
}

double discrepancy_estimate(const PsiTable& psi, std::span<const double> alpha,
                            const std::vector<CachingStrategy>& iterates) {
  check_alpha(alpha, psi.tau);
  if (iterates.size() != psi.tau) throw ValidationError("expected one iterate per window slot");
  double total = 0.0;
  for (std::size_t i = 0; i < psi.tau; ++i) {
    if (iterates[i].size() != psi.n_files) throw ValidationError("iterate length does not match psi table");
    double gamma = 0.0;
    for (std::size_t f = 0; f < psi.n_files; ++f) gamma += psi(i, f) * iterates[i][f];
    total += alpha[i] * gamma;
  }
  return std::abs(total);
}

DiscrepancySup discrepancy_sup(const PsiTable& psi, std::span<const double> alpha, const Catalog& catalog) {
  check_alpha(alpha, psi.tau);
  if (psi.n_files != catalog.n_files()) throw ValidationError("psi table does not match catalog");
  DiscrepancySup best{-1.0, +1, {}};
  Vec signed_row(psi.n_files);
  for (int sign : {+1, -1}) {
    DiscrepancySup branch{0.0, sign, {}};
    for (std::size_t i = 0; i < psi.tau; ++i) {
      for (std::size_t f = 0; f < psi.n_files; ++f) signed_row[f] = sign * psi(i, f);
      auto [value, pi] = best_response(signed_row, catalog);
      branch.value += alpha[i] * value;
      branch.strategies.push_back(std::move(pi));
    }
    if (branch.value > best.value) best = std::move(branch);
  }
  return best;
}

double mismatch_estimate(std::span<const double> w_neighbors, std::span<const double> alpha_self,
                         const std::vector<Vec>& alpha_neighbors, const HitMatrix& H_self,
                         const std::vector<HitMatrix>& H_neighbors) {
  const std::size_t tau = H_self.tau;
  check_alpha(alpha_self, tau);
  if (w_neighbors.size() != alpha_neighbors.size() || w_neighbors.size() != H_neighbors.size())
    throw ValidationError("mismatch: neighbor weights, alphas and hit matrices differ in count");
  const double own = H_self.weighted_total(alpha_self);
  double total = 0.0;
  for (std::size_t j = 0; j < w_neighbors.size(); ++j) {
    if (w_neighbors[j] < 0.0) throw ValidationError("neighbor weights must be non-negative");
    if (H_neighbors[j].tau != tau) throw ValidationError("mismatch: hit matrix dimensions differ");
    total += w_neighbors[j] * (own - H_neighbors[j].weighted_total(alpha_neighbors[j]));
  }
  return total / double(tau);
}

double azuma_term(std::span<const double> alpha, double h_max, double delta, std::size_t tau) {
  if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta must lie in (0, 1]");
  double sq = 0.0;
  for (double a : alpha) sq += a * a;
  return h_max * std::sqrt(sq) * std::sqrt((2.0 / double(tau)) * std::log(1.0 / delta));
}

BoundReport bound_report(std::span<const double> alpha, std::span<const double> w, double regret, double discrepancy,
                         double mismatch, double h_max, double delta, std::size_t tau) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(h_max > 0.0)) throw ValidationError("h_max must be positive");
  check_alpha(alpha, tau);
  double w_sum = 0.0;
  for (double x : w) w_sum += x;
  if (!w.empty() && std::abs(w_sum - 1.0) > 1e-9) throw ValidationError("w must sum to one");

  BoundReport r;
  r.h_max = h_max;
  r.delta = delta;
  r.azuma_term = azuma_term(alpha, h_max, delta, tau);
  r.mismatch_hat = mismatch;
  r.discrepancy_hat = discrepancy;
  r.regret_term = 2.0 * regret / double(tau);
  const double u = 1.0 / double(tau);
  for (double a : alpha) r.alpha_deviation += std::abs(a - u);
  r.alpha_deviation *= h_max;
  r.epsilon1 = r.azuma_term + r.mismatch_hat + r.discrepancy_hat;
  r.epsilon2 = 2.0 * r.azuma_term + r.mismatch_hat + r.regret_term + r.alpha_deviation + 2.0 * r.discrepancy_hat;
  return r;
}

double h_max_estimate(const DemandTrace& trace, const Catalog& catalog, std::size_t b, std::size_t T,
                      std::size_t tau, DemandScale scale) {
  const std::size_t start = window_start(T, tau);
  if (T >= trace.n_slots()) throw IndexError("slot out of range");
  double best = 0.0;
  for (std::size_t l = start; l <= T; ++l) {
    Vec d = scale == DemandScale::normalized ? normalize_slot(trace.row(l, b))
                                             : Vec(trace.row(l, b).begin(), trace.row(l, b).end());
    best = std::max(best, hit_rate(per_slot_optimal(d, catalog), d, catalog));
  }
  return best;
}

double global_local_discrepancy_estimate(const DemandTrace& trace, const Catalog& catalog, std::size_t b,
                                         std::size_t t, std::size_t tau, DemandScale scale) {
  if (tau == 0) throw ValidationError("window length must be positive");
  if (t >= trace.n_slots()) throw IndexError("slot " + std::to_string(t) + " out of range");
  if (b >= trace.n_sbs()) throw IndexError("sBS " + std::to_string(b) + " out of range");
  if (t + 1 < tau)
    throw ValidationError("global/local window underflow: earliest required slot is " +
                          std::to_string(static_cast<long long>(t) + 1 - static_cast<long long>(tau)));
  const std::size_t first = t + 1 - tau;
  const Vec local = window_mean(trace, b, first, t, scale);
  Vec pooled(trace.n_files(), 0.0);
  for (std::size_t other = 0; other < trace.n_sbs(); ++other) {
    const Vec m = window_mean(trace, other, first, t, scale);
    for (std::size_t f = 0; f < m.size(); ++f) pooled[f] += m[f];
  }
  Vec diff(trace.n_files());
  for (std::size_t f = 0; f < diff.size(); ++f)
    diff[f] = catalog.sizes[f] * (local[f] - pooled[f] / double(trace.n_sbs()));
  const double up = best_response(diff, catalog).first;
  for (double& x : diff) x = -x;
  const double down = best_response(diff, catalog).first;
  return std::max(up, down);
}

}  // namespace cocache
