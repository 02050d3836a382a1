#pragma once

#include <vector>

#include "cocache/catalog.hpp"
#include "cocache/parallel.hpp"
#include "cocache/strategy.hpp"

namespace cocache {

// Slots are zero-based. A window of length tau ending at slot T covers
// T - tau + 1 .. T, and position i in any window-indexed container refers to
// slot T - tau + 1 + i.
std::size_t window_start(std::size_t T, std::size_t tau);

enum class RegretMode {
  per_slot_opt,  // hindsight optimum of each slot's own popularity profile
  ftl,           // follow-the-leader on the running mean inside the window
};

/// The per-slot strategies pi^R for sBS b over the window ending at T.
std::vector<CachingStrategy> regret_sequence(const DemandTrace& trace, const Catalog& catalog, std::size_t b,
                                             std::size_t T, std::size_t tau,
                                             RegretMode mode = RegretMode::per_slot_opt);

/// sum over the window of hit(per-slot optimum) - hit(strategies[i]), each
/// slot scored on its own demand. Never negative.
double realized_regret(const std::vector<CachingStrategy>& strategies, const DemandTrace& trace,
                       const Catalog& catalog, std::size_t b, std::size_t T, std::size_t tau,
                       DemandScale scale = DemandScale::raw);

/// H[l][s] = hit of strategy s on the demand of window slot l at sBS `owner`.
struct HitMatrix {
  std::size_t tau = 0;
  std::size_t owner = 0;
  Vec values;  // row-major, tau x tau

  double operator()(std::size_t l, std::size_t s) const { return values[l * tau + s]; }
  double& operator()(std::size_t l, std::size_t s) { return values[l * tau + s]; }
  // sum_l H[l][s]
  double column_sum(std::size_t s) const;
  // sum_{s,l} alpha_s H[l][s]
  double weighted_total(std::span<const double> alpha) const;
};

HitMatrix hit_matrix(const std::vector<CachingStrategy>& strategies, const DemandTrace& trace,
                     const Catalog& catalog, std::size_t b, std::size_t T, std::size_t tau,
                     DemandScale scale = DemandScale::normalized, Execution exec = Execution::parallel);

}  // namespace cocache
