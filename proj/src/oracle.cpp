#include "cocache/oracle.hpp"

#include <cmath>
#include <functional>

#include "cocache/errors.hpp"

namespace cocache::oracle {

namespace {

// Visits every grid point whose cached length fits the budget.
void enumerate(const Catalog& catalog, double step, const std::function<void(const Vec&)>& visit) {
  const std::size_t n = catalog.n_files();
  if (n == 0 || n > 6) throw ValidationError("grid oracle supports 1..6 files");
  if (!(step > 0.0) || !std::isfinite(catalog.fraction_cap)) throw ValidationError("grid oracle needs a finite cap");
  const auto levels = static_cast<std::size_t>(std::floor(catalog.fraction_cap / step + 1e-9)) + 1;
  std::vector<std::size_t> idx(n, 0);
  Vec pi(n, 0.0);
  const double limit = catalog.cache_budget * (1.0 + 1e-12);
  for (;;) {
    double len = 0.0;
    for (std::size_t f = 0; f < n; ++f) {
      pi[f] = double(idx[f]) * step;
      len += pi[f] * catalog.sizes[f];
    }
    if (len <= limit) visit(pi);
    std::size_t f = 0;
    while (f < n && ++idx[f] == levels) idx[f++] = 0;
    if (f == n) break;
  }
}

}  // namespace

GridResult grid_max_hit(std::span<const double> d, const Catalog& catalog, double step) {
  GridResult best{{}, -INFINITY, 0};
  enumerate(catalog, step, [&](const Vec& pi) {
    double v = 0.0;
    for (std::size_t f = 0; f < pi.size(); ++f) v += d[f] * pi[f] * catalog.sizes[f];
    ++best.evaluated;
    if (v > best.value) {
      best.value = v;
      best.point = pi;
    }
  });
  return best;
}

GridResult grid_min_proximal(std::span<const double> d_hat, std::span<const double> anchor, double lambda,
                             const Catalog& catalog, double step) {
  GridResult best{{}, INFINITY, 0};
  enumerate(catalog, step, [&](const Vec& pi) {
    double v = 0.0;
    for (std::size_t f = 0; f < pi.size(); ++f) {
      const double gap = pi[f] - anchor[f];
      v += (1.0 - pi[f]) * catalog.sizes[f] * d_hat[f] + lambda * gap * gap;
    }
    ++best.evaluated;
    if (v < best.value) {
      best.value = v;
      best.point = pi;
    }
  });
  return best;
}

double hit_grid_slack(std::span<const double> d, const Catalog& catalog, double step) {
  double s = 0.0;
  for (std::size_t f = 0; f < d.size(); ++f) s += std::abs(d[f]) * catalog.sizes[f];
  return s * step;
}

double proximal_grid_slack(std::span<const double> d_hat, std::span<const double> anchor, double lambda,
                           const Catalog& catalog, double step) {
  // Moving pi_f down by at most `step` changes the linear part by L_f dhat_f
  // step and the quadratic part by at most (2 |pi_f - anchor_f| + step) step.
  double s = 0.0;
  for (std::size_t f = 0; f < d_hat.size(); ++f) {
    const double reach = std::max(catalog.fraction_cap, std::abs(anchor[f])) + std::abs(anchor[f]);
    s += catalog.sizes[f] * std::abs(d_hat[f]) * step + lambda * (2.0 * reach + step) * step;
  }
  return s;
}

}  // namespace cocache::oracle
