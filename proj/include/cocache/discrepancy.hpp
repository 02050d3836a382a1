#pragma once

#include <vector>

#include "cocache/catalog.hpp"
#include "cocache/regret.hpp"
#include "cocache/strategy.hpp"

namespace cocache {

/// Psi[i][f] = L_f * (mean of demand over the tau1 slots ending at T
///                    - mean of demand over the tau2 slots preceding t),
/// for t = T - tau + 1 + i.
struct PsiTable {
  std::size_t tau = 0;
  std::size_t n_files = 0;
  std::size_t T = 0;
  std::size_t tau1 = 0;
  std::size_t tau2 = 0;
  Vec values;  // row-major, tau x n_files

  double operator()(std::size_t i, std::size_t f) const { return values[i * n_files + f]; }
  double& operator()(std::size_t i, std::size_t f) { return values[i * n_files + f]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * n_files, n_files}; }
};

/// Requires T - tau + 1 - tau2 >= 0 and tau1 <= T + 1.
PsiTable psi_table(const DemandTrace& trace, const Catalog& catalog, std::size_t b, std::size_t T,
                   std::size_t tau, std::size_t tau1, std::size_t tau2,
                   DemandScale scale = DemandScale::normalized);

/// |sum_i alpha_i sum_f Psi[i][f] * pi_i[f]| at the given per-slot iterates.
double discrepancy_estimate(const PsiTable& psi, std::span<const double> alpha,
                            const std::vector<CachingStrategy>& iterates);

struct DiscrepancySup {
  double value = 0.0;
  int sign = +1;  // branch that attains the sup
  std::vector<CachingStrategy> strategies;
};

/// Exact sup over feasible per-slot strategies of the discrepancy estimate.
/// For a fixed sign the problem splits into one fractional knapsack per slot.
DiscrepancySup discrepancy_sup(const PsiTable& psi, std::span<const double> alpha, const Catalog& catalog);

/// Cross-sBS mismatch
///   (1/tau) sum_j w_j [ sum_{s,l} alpha_self[s] H_self[l][s]
///                       - sum_{s,l} alpha_j[s] H_j[l][s] ],
/// where H_j holds neighbor j's strategies scored on the demand basis the
/// caller chose (local demands by default, the neighbor's own for the
/// literal formula).
double mismatch_estimate(std::span<const double> w_neighbors, std::span<const double> alpha_self,
                         const std::vector<Vec>& alpha_neighbors, const HitMatrix& H_self,
                         const std::vector<HitMatrix>& H_neighbors);

struct BoundReport {
  double azuma_term = 0.0;
  double mismatch_hat = 0.0;
  double discrepancy_hat = 0.0;
  double regret_term = 0.0;
  double alpha_deviation = 0.0;
  double epsilon1 = 0.0;
  double epsilon2 = 0.0;
  double h_max = 0.0;
  double delta = 0.0;
  double gamma = 0.0;  // proof slack, always reported as zero
};

/// Assembles the high-probability bound terms. `regret` is the raw window
/// regret; the report carries 2 * regret / tau.
BoundReport bound_report(std::span<const double> alpha, std::span<const double> w, double regret,
                         double discrepancy, double mismatch, double h_max, double delta, std::size_t tau);

/// h_max * ||alpha||_2 * sqrt((2 / tau) * log(1 / delta)).
double azuma_term(std::span<const double> alpha, double h_max, double delta, std::size_t tau);

/// Largest per-slot optimal hit over the window ending at T.
double h_max_estimate(const DemandTrace& trace, const Catalog& catalog, std::size_t b, std::size_t T,
                      std::size_t tau, DemandScale scale = DemandScale::raw);

/// Local-vs-pooled discrepancy: sup over feasible pi of
/// |sum_f pi_f L_f (mean local demand - mean demand pooled over all sBSs)|,
/// with both means taken over the window of tau slots ending at t.
double global_local_discrepancy_estimate(const DemandTrace& trace, const Catalog& catalog, std::size_t b,
                                         std::size_t t, std::size_t tau, DemandScale scale = DemandScale::raw);

}  // namespace cocache
