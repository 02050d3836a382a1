#pragma once

#include <vector>

#include "cocache/catalog.hpp"
#include "cocache/parallel.hpp"
#include "cocache/strategy.hpp"

namespace cocache {

/// Coordinate-wise mean of the received strategies.
CachingStrategy neighbor_average(const std::vector<CachingStrategy>& received);

/// argmin_pi sum_f (1 - pi_f) L_f dhat_f + lambda * ||pi - anchor||^2 over the
/// feasible set, solved exactly by bisection on the budget multiplier.
/// lambda == 0 degenerates to the linear problem and returns per_slot_optimal.
CachingStrategy federated_solve(std::span<const double> d_hat, const CachingStrategy& anchor, double lambda,
                                const Catalog& catalog);

/// The proximal objective minimized by federated_solve.
double federated_objective(std::span<const double> pi, std::span<const double> d_hat,
                           std::span<const double> anchor, double lambda, const Catalog& catalog);

struct FederatedConfig {
  double lambda = 2.0;
  std::size_t tau = 10;
  bool include_self = false;  // average own previous strategy into the anchor

  void validate() const;
};

struct FederatedState {
  std::vector<CachingStrategy> strategies;  // installed per sBS
  std::vector<CachingStrategy> anchors;     // neighbor averages used in the last round
  std::vector<Vec> d_hat;                   // demand estimates of the last round
  std::size_t round = 0;

  static FederatedState initial(const Catalog& catalog, std::size_t n_sbs);
};

/// One exchange + solve at the boundary before slot t: every sBS averages the
/// strategies its neighbors installed for slot t-1, estimates demand over
/// slots t-tau .. t-1 and installs the proximal solution for slot t.
FederatedState federated_round(const FederatedState& state, const DemandTrace& trace, const Topology& topology,
                               const Catalog& catalog, std::size_t t, const FederatedConfig& cfg,
                               Execution exec = Execution::parallel);

}  // namespace cocache
