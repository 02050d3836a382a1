#pragma once

#include <span>

#include "cocache/catalog.hpp"
#include "cocache/strategy.hpp"

namespace cocache::oracle {

// Brute-force references over the grid {0, step, 2 step, ..., cap}^N. They
// share no code with the solvers they check; keep N small.

struct GridResult {
  Vec point;
  double value = 0.0;
  std::size_t evaluated = 0;  // feasible grid points visited
};

/// Best grid point for sum_f d_f pi_f L_f under the budget.
GridResult grid_max_hit(std::span<const double> d, const Catalog& catalog, double step);

/// Best grid point for sum_f (1 - pi_f) L_f dhat_f + lambda ||pi - anchor||^2.
GridResult grid_min_proximal(std::span<const double> d_hat, std::span<const double> anchor, double lambda,
                             const Catalog& catalog, double step);

/// Worst-case objective loss from rounding an optimum down onto the grid.
double hit_grid_slack(std::span<const double> d, const Catalog& catalog, double step);
double proximal_grid_slack(std::span<const double> d_hat, std::span<const double> anchor, double lambda,
                           const Catalog& catalog, double step);

}  // namespace cocache::oracle
