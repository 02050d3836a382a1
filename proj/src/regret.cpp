#include "cocache/regret.hpp"

#include <algorithm>
#include <string>

#include "cocache/errors.hpp"

namespace cocache {

namespace {

void check_window(const DemandTrace& trace, std::size_t b, std::size_t T, std::size_t tau) {
  if (tau == 0) throw ValidationError("window length must be positive");
  if (T + 1 < tau)
    throw ValidationError("window of " + std::to_string(tau) + " slots does not fit before slot " +
                          std::to_string(T));
  if (T >= trace.n_slots()) throw IndexError("slot " + std::to_string(T) + " out of range");
  if (b >= trace.n_sbs()) throw IndexError("sBS " + std::to_string(b) + " out of range");
}

Vec demand_row(const DemandTrace& trace, std::size_t t, std::size_t b, DemandScale scale) {
  auto row = trace.row(t, b);
  if (scale == DemandScale::normalized) return normalize_slot(row);
  return Vec(row.begin(), row.end());
}

}  // namespace

std::size_t window_start(std::size_t T, std::size_t tau) {
  if (T + 1 < tau) throw ValidationError("window underflows slot 0");
  return T + 1 - tau;
}

std::vector<CachingStrategy> regret_sequence(const DemandTrace& trace, const Catalog& catalog, std::size_t b,
                                             std::size_t T, std::size_t tau, RegretMode mode) {
  check_window(trace, b, T, tau);
  const std::size_t start = window_start(T, tau);
  std::vector<CachingStrategy> out;
  out.reserve(tau);
  Vec running(catalog.n_files(), 0.0);
  for (std::size_t i = 0; i < tau; ++i) {
    const Vec p = normalize_slot(trace.row(start + i, b));
    if (mode == RegretMode::per_slot_opt) {
      out.push_back(per_slot_optimal(p, catalog));
    } else {
      for (std::size_t f = 0; f < p.size(); ++f) running[f] += p[f];
      Vec mean(running);
      for (double& x : mean) x /= double(i + 1);
      out.push_back(per_slot_optimal(mean, catalog));
    }
  }
  return out;
}

double realized_regret(const std::vector<CachingStrategy>& strategies, const DemandTrace& trace,
                       const Catalog& catalog, std::size_t b, std::size_t T, std::size_t tau, DemandScale scale) {
  check_window(trace, b, T, tau);
  if (strategies.size() != tau) throw ValidationError("expected one strategy per window slot");
  const std::size_t start = window_start(T, tau);
  double regret = 0.0;
  for (std::size_t i = 0; i < tau; ++i) {
    const Vec d = demand_row(trace, start + i, b, scale);
    regret += hit_rate(per_slot_optimal(d, catalog), d, catalog) - hit_rate(strategies[i], d, catalog);
  }
  return std::max(regret, 0.0);
}

double HitMatrix::column_sum(std::size_t s) const {
  double total = 0.0;
  for (std::size_t l = 0; l < tau; ++l) total += (*this)(l, s);
  return total;
}

double HitMatrix::weighted_total(std::span<const double> alpha) const {
  if (alpha.size() != tau) throw ValidationError("weight vector does not match hit matrix");
  double total = 0.0;
  for (std::size_t s = 0; s < tau; ++s) total += alpha[s] * column_sum(s);
  return total;
}

HitMatrix hit_matrix(const std::vector<CachingStrategy>& strategies, const DemandTrace& trace,
                     const Catalog& catalog, std::size_t b, std::size_t T, std::size_t tau, DemandScale scale,
                     Execution exec) {
  check_window(trace, b, T, tau);
  if (strategies.size() != tau) throw ValidationError("expected one strategy per window slot");
  for (const auto& s : strategies)
    if (s.size() != catalog.n_files()) throw ValidationError("strategy length does not match catalog");
  const std::size_t start = window_start(T, tau);

  std::vector<Vec> demand(tau);
  for (std::size_t l = 0; l < tau; ++l) demand[l] = demand_row(trace, start + l, b, scale);

  HitMatrix H{tau, b, Vec(tau * tau, 0.0)};
  const std::size_t n = catalog.n_files();
  const double* sizes = catalog.sizes.data();
  // Same sum as hit_rate, without its per-call checks.
  auto cell = [&](std::size_t l, std::size_t s) {
    const double* d = demand[l].data();
    const double* pi = strategies[s].fractions.data();
    double hit = 0.0;
    for (std::size_t f = 0; f < n; ++f) hit += d[f] * pi[f] * sizes[f];
    H(l, s) = hit;
  };
  const long long cells = static_cast<long long>(tau * tau);
  if (exec == Execution::parallel) {
    COCACHE_OMP_PRAGMA("omp parallel for schedule(static)")
    for (long long c = 0; c < cells; ++c) cell(std::size_t(c) / tau, std::size_t(c) % tau);
  } else {
    for (std::size_t l = 0; l < tau; ++l)
      for (std::size_t s = 0; s < tau; ++s) cell(l, s);
  }
  return H;
}

}  // namespace cocache
