#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cocache/catalog.hpp"
#include "cocache/strategy.hpp"

namespace cocache {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

using KnapsackSolver = std::function<CachingStrategy(std::span<const double>, const Catalog&)>;
using ProximalSolver =
    std::function<CachingStrategy(std::span<const double>, const CachingStrategy&, double, const Catalog&)>;

struct ValidationOptions {
  std::uint64_t seed = 7;
  std::size_t instances = 200;
  std::size_t bound_windows = 500;
  double delta = 0.05;
  // Solvers under test; default to the library's own.
  KnapsackSolver knapsack;
  ProximalSolver proximal;
};

/// Random small catalogs: 1..max_files files with integer sizes in [1, 10]
/// and a budget strictly between zero and the catalog size.
Catalog random_small_catalog(std::uint64_t seed, std::size_t max_files);

CheckResult check_knapsack_oracle(const ValidationOptions& opt);
CheckResult check_lrfu_oracle(const ValidationOptions& opt);
CheckResult check_proximal_oracle(const ValidationOptions& opt);
CheckResult check_subroutine_invariants(const ValidationOptions& opt, std::size_t windows = 50);

/// Fraction of independent i.i.d. windows on which the LRFU bound fails,
/// with the supremum term computed from the known demand distribution.
struct BoundFrequency {
  std::size_t windows = 0;
  std::size_t violations = 0;
  double frequency() const { return windows ? double(violations) / double(windows) : 0.0; }
};
BoundFrequency lrfu_bound_violations(std::uint64_t seed, std::size_t windows, double delta, std::size_t tau = 10);
CheckResult check_lrfu_bound(const ValidationOptions& opt);

std::vector<CheckResult> run_validation(const ValidationOptions& opt);

}  // namespace cocache
