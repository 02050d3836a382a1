#include "cocache/strategy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "cocache/errors.hpp"

namespace cocache {

namespace {

void check_dims(std::size_t got, const Catalog& catalog, const char* what) {
  if (got != catalog.n_files())
    throw ValidationError(std::string(what) + " has length " + std::to_string(got) + ", catalog has " +
                          std::to_string(catalog.n_files()) + " files");
}

// Indices sorted by key descending, ties broken by ascending index.
std::vector<std::size_t> order_descending(std::span<const double> key) {
  std::vector<std::size_t> idx(key.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return key[a] > key[b] || (key[a] == key[b] && a < b); });
  return idx;
}

}  // namespace

double cached_length(std::span<const double> pi, const Catalog& catalog) {
  check_dims(pi.size(), catalog, "strategy");
  double total = 0.0;
  for (std::size_t f = 0; f < pi.size(); ++f) total += pi[f] * catalog.sizes[f];
  return total;
}

bool is_feasible(const CachingStrategy& pi, const Catalog& catalog) {
  if (pi.size() != catalog.n_files()) return false;
  for (double x : pi.fractions)
    if (!(x >= 0.0 && x <= catalog.fraction_cap)) return false;
  return cached_length(pi.view(), catalog) <= catalog.cache_budget * (1.0 + kBudgetSlack);
}

double hit_rate(std::span<const double> pi, std::span<const double> d, const Catalog& catalog) {
  check_dims(pi.size(), catalog, "strategy");
  check_dims(d.size(), catalog, "demand");
  double hit = 0.0;
  for (std::size_t f = 0; f < d.size(); ++f) hit += d[f] * pi[f] * catalog.sizes[f];
  return hit;
}

CachingStrategy fractional_knapsack(std::span<const double> score, const Catalog& catalog, bool positive_only) {
  check_dims(score.size(), catalog, "score");
  CachingStrategy pi = CachingStrategy::zeros(score.size());
  double remaining = catalog.cache_budget;
  for (std::size_t f : order_descending(score)) {
    if (remaining <= 0.0) break;
    if (positive_only && !(score[f] > 0.0)) break;
    const double full = catalog.fraction_cap * catalog.sizes[f];
    if (full <= remaining) {
      pi[f] = catalog.fraction_cap;
      remaining -= full;
    } else {
      pi[f] = remaining / catalog.sizes[f];
      remaining = 0.0;
    }
  }
  return pi;
}

CachingStrategy per_slot_optimal(std::span<const double> d, const Catalog& catalog) {
  for (double x : d)
    if (x < 0.0) throw ValidationError("negative demand passed to per_slot_optimal");
  return fractional_knapsack(d, catalog, false);
}

CachingStrategy uniform_strategy(const Catalog& catalog) {
  const double share = std::min(catalog.fraction_cap, catalog.cache_budget / catalog.total_size());
  return CachingStrategy::filled(catalog.n_files(), share);
}

Projection project_budget(std::span<const double> raw, const Catalog& catalog, ProjectionMode mode) {
  check_dims(raw.size(), catalog, "strategy");
  const double budget = catalog.cache_budget;
  Vec p(raw.begin(), raw.end());
  for (double& x : p) {
    if (!std::isfinite(x)) throw ValidationError("non-finite entry in strategy");
    x = std::max(x, 0.0);
  }

  double total = cached_length(p, catalog);
  if (mode == ProjectionMode::always_scale) {
    if (total == 0.0) return {CachingStrategy(std::move(p)), true};
    if (std::abs(total - budget) > 1e-12 * budget) {
      const double scale = budget / total;
      for (double& x : p) x *= scale;
      total = budget;
    }
  } else if (total > budget) {
    const double scale = budget / total;
    for (double& x : p) x *= scale;
    total = budget;
  }

  const double cap = catalog.fraction_cap;
  double freed = 0.0;
  for (std::size_t f = 0; f < p.size(); ++f) {
    if (p[f] > cap) {
      freed += (p[f] - cap) * catalog.sizes[f];
      p[f] = cap;
    }
  }
  if (freed > 0.0) {
    // Max-heap on (fraction, -index): pops largest first, ties by lower index.
    std::vector<std::pair<double, std::size_t>> open;
    open.reserve(p.size());
    for (std::size_t f = 0; f < p.size(); ++f)
      if (p[f] > 0.0 && p[f] < cap) open.emplace_back(p[f], f);
    auto less = [](const auto& a, const auto& b) { return a.first < b.first || (a.first == b.first && a.second > b.second); };
    std::make_heap(open.begin(), open.end(), less);
    while (freed > 0.0 && !open.empty()) {
      std::pop_heap(open.begin(), open.end(), less);
      const std::size_t f = open.back().second;
      open.pop_back();
      const double room = (cap - p[f]) * catalog.sizes[f];
      if (room <= freed) {
        p[f] = cap;
        freed -= room;
      } else {
        p[f] += freed / catalog.sizes[f];
        freed = 0.0;
      }
    }
  }
  return {CachingStrategy(std::move(p)), false};
}

CachingStrategy blend(std::span<const CachingStrategy> strategies, std::span<const double> weights) {
  if (strategies.empty()) throw ValidationError("blend needs at least one strategy");
  if (strategies.size() != weights.size())
    throw ValidationError("blend: " + std::to_string(strategies.size()) + " strategies but " +
                          std::to_string(weights.size()) + " weights");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("blend weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("blend weights sum to " + std::to_string(sum));

  const std::size_t n = strategies.front().size();
  Vec out(n, 0.0);
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    if (strategies[i].size() != n) throw ValidationError("blend: strategies differ in length");
    if (weights[i] == 0.0) continue;
    for (std::size_t f = 0; f < n; ++f) out[f] += weights[i] * strategies[i][f];
  }
  return CachingStrategy(std::move(out));
}

void save_strategy(const CachingStrategy& pi, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "file,fraction\n";
  char buf[32];
  for (std::size_t f = 0; f < pi.size(); ++f) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, pi[f]);
    out << f << ',' << std::string_view(buf, std::size_t(ptr - buf)) << '\n';
  }
}

CachingStrategy load_strategy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "file,fraction") throw ParseError(path.string() + ":1: expected header 'file,fraction'");
  Vec values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    std::size_t file = 0;
    double x = 0.0;
    const char* b = line.data();
    const char* e = b + line.size();
    if (comma == std::string::npos || std::from_chars(b, b + comma, file).ptr != b + comma ||
        std::from_chars(b + comma + 1, e, x).ptr != e || file != values.size())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    values.push_back(x);
  }
  return CachingStrategy(std::move(values));
}

}  // namespace cocache
