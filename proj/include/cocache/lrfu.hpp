#pragma once

#include <optional>

#include "cocache/catalog.hpp"
#include "cocache/strategy.hpp"

namespace cocache {

enum class LrfuMode { fractional, integral };
// Ordering key for integral admission: L_f * dhat_f or dhat_f alone.
enum class LrfuOrdering { by_value, by_demand };

struct LrfuConfig {
  std::size_t tau = 10;
  LrfuMode mode = LrfuMode::fractional;
  LrfuOrdering ordering = LrfuOrdering::by_value;

  void validate() const;
};

/// Per-file mean of the raw demands at sBS b over `span` slots ending at t-1,
/// i.e. slots t-span .. t-1. Windows reaching before slot 0 are truncated and
/// averaged over the slots that exist. The LRFU window uses span = tau + 1.
Vec windowed_demand_estimate(const DemandTrace& trace, std::size_t b, std::size_t t, std::size_t span);

/// LRFU window: slots t-tau-1 .. t-1.
inline Vec lrfu_demand_estimate(const DemandTrace& trace, std::size_t b, std::size_t t, std::size_t tau) {
  return windowed_demand_estimate(trace, b, t, tau + 1);
}

CachingStrategy lrfu_strategy(std::span<const double> d_hat, const Catalog& catalog, const LrfuConfig& cfg);

struct LrfuBoundRecord {
  double lhs = 0.0;          // sum_f pi_f dhat_f L_f
  double sup_term = 0.0;     // expected optimum, or the windowed empirical proxy
  double d_gl = 0.0;         // global/local discrepancy
  double d_local = 0.0;      // temporal discrepancy at uniform alpha
  double azuma = 0.0;
  double h_max = 0.0;

  double rhs() const { return sup_term + d_gl + d_local + azuma; }
  bool holds() const { return lhs <= rhs(); }
};

/// Evaluates both sides of the LRFU concentration bound at slot t for sBS b
/// on raw demands. `expected_optimum`, when given, replaces the empirical
/// proxy for the supremum term (the mean per-slot optimum over the window).
LrfuBoundRecord lrfu_bound_diagnostic(const DemandTrace& trace, std::size_t b, std::size_t t, std::size_t tau,
                                      const Catalog& catalog, double delta,
                                      std::optional<double> expected_optimum = std::nullopt,
                                      std::size_t tau1 = 0, std::size_t tau2 = 0);

}  // namespace cocache
