#include "cocache/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "cocache/errors.hpp"
#include "cocache/rng.hpp"

namespace cocache {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& warning_handler() {
  static WarningHandler h = [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };
  return h;
}

}  // namespace

void warn(const std::string& message) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(message);
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex());
  auto previous = std::move(warning_handler());
  warning_handler() = std::move(handler);
  return previous;
}

// ---------------------------------------------------------------------------
// Catalog / Topology / DemandTrace
// ---------------------------------------------------------------------------

double Catalog::total_size() const { return std::accumulate(sizes.begin(), sizes.end(), 0.0); }

void Catalog::validate() const {
  if (sizes.empty()) throw ValidationError("catalog has no files");
  for (std::size_t f = 0; f < sizes.size(); ++f) {
    if (!(sizes[f] > 0.0) || !std::isfinite(sizes[f]))
      throw ValidationError("file " + std::to_string(f) + " has non-positive size");
  }
  if (!(cache_budget > 0.0) || !std::isfinite(cache_budget))
    throw ValidationError("cache budget must be positive");
  if (!(fraction_cap > 0.0)) throw ValidationError("fraction cap must be positive");
  if (cache_budget >= total_size())
    warn("cache budget " + std::to_string(cache_budget) + " holds the entire catalog");
}

Catalog Catalog::make(Vec sizes, double cache_budget) {
  Catalog c;
  c.sizes = std::move(sizes);
  c.cache_budget = cache_budget;
  c.validate();
  return c;
}

Topology::Topology(std::vector<std::vector<std::size_t>> neighbors) : neighbors_(std::move(neighbors)) {
  const std::size_t n = neighbors_.size();
  for (std::size_t b = 0; b < n; ++b) {
    auto& nb = neighbors_[b];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    for (std::size_t other : nb) {
      if (other >= n) throw ValidationError("neighbor " + std::to_string(other) + " out of range");
      if (other == b) throw ValidationError("self-loop at sBS " + std::to_string(b));
    }
  }
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t other : neighbors_[b]) {
      const auto& back = neighbors_[other];
      if (!std::binary_search(back.begin(), back.end(), b))
        throw ValidationError("topology is not symmetric between " + std::to_string(b) + " and " +
                              std::to_string(other));
    }
  }
}

Topology Topology::from_edges(std::size_t n_sbs,
                              const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<std::size_t>> nb(n_sbs);
  for (auto [a, b] : edges) {
    if (a >= n_sbs || b >= n_sbs) throw ValidationError("edge endpoint out of range");
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  return Topology(std::move(nb));
}

Topology Topology::isolated(std::size_t n_sbs) { return Topology(std::vector<std::vector<std::size_t>>(n_sbs)); }

Topology Topology::line(std::size_t n_sbs) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t b = 0; b + 1 < n_sbs; ++b) edges.emplace_back(b, b + 1);
  return from_edges(n_sbs, edges);
}

Topology Topology::complete(std::size_t n_sbs) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < n_sbs; ++a)
    for (std::size_t b = a + 1; b < n_sbs; ++b) edges.emplace_back(a, b);
  return from_edges(n_sbs, edges);
}

Topology Topology::pentagon() { return from_edges(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}); }

const std::vector<std::size_t>& Topology::neighbors(std::size_t b) const {
  if (b >= neighbors_.size()) throw IndexError("sBS " + std::to_string(b) + " out of range");
  return neighbors_[b];
}

DemandTrace::DemandTrace(std::size_t n_slots, std::size_t n_sbs, std::size_t n_files)
    : n_slots_(n_slots), n_sbs_(n_sbs), n_files_(n_files), data_(n_slots * n_sbs * n_files, 0.0) {}

DemandTrace DemandTrace::normalized() const {
  DemandTrace out(n_slots_, n_sbs_, n_files_);
  for (std::size_t t = 0; t < n_slots_; ++t)
    for (std::size_t b = 0; b < n_sbs_; ++b) {
      const Vec p = normalize_slot(row(t, b));
      std::copy(p.begin(), p.end(), out.row(t, b).begin());
    }
  return out;
}

std::span<const double> slot_demand(const DemandTrace& trace, std::size_t b, std::size_t t) {
  if (t >= trace.n_slots())
    throw IndexError("slot " + std::to_string(t) + " out of range (n_slots=" +
                     std::to_string(trace.n_slots()) + ")");
  if (b >= trace.n_sbs())
    throw IndexError("sBS " + std::to_string(b) + " out of range (n_sbs=" + std::to_string(trace.n_sbs()) +
                     ")");
  return trace.row(t, b);
}

Vec normalize_slot(std::span<const double> d) {
  double total = 0.0;
  for (double x : d) {
    if (x < 0.0) throw ValidationError("negative demand in slot vector");
    total += x;
  }
  Vec out(d.size(), 0.0);
  if (total == 0.0) return out;
  for (std::size_t f = 0; f < d.size(); ++f) out[f] = d[f] / total;
  return out;
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string format_double(double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace

Catalog load_catalog(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "missing header");
  ++lineno;
  if (split(line) != std::vector<std::string_view>{"file", "size"})
    parse_fail(path, lineno, "expected header 'file,size'");

  std::vector<std::pair<std::size_t, double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cols = split(line);
    std::size_t file = 0;
    double size = 0.0;
    if (cols.size() != 2 || !parse_number(cols[0], file) || !parse_number(cols[1], size))
      parse_fail(path, lineno, "malformed row '" + line + "'");
    rows.emplace_back(file, size);
  }
  Catalog c;
  c.sizes.assign(rows.size(), 0.0);
  std::vector<bool> seen(rows.size(), false);
  for (auto [file, size] : rows) {
    if (file >= rows.size()) throw ValidationError("catalog file ids must be contiguous from 0; got " + std::to_string(file));
    if (seen[file]) throw ValidationError("duplicate catalog file " + std::to_string(file));
    seen[file] = true;
    if (!(size > 0.0)) throw ValidationError("file " + std::to_string(file) + " has non-positive size");
    c.sizes[file] = size;
  }
  if (c.sizes.empty()) throw ValidationError("catalog has no files");
  // The CSV carries no budget; callers set it (usually as a catalog fraction).
  c.cache_budget = 0.1 * c.total_size();
  return c;
}

std::pair<Catalog, DemandTrace> load_trace(const std::filesystem::path& catalog_path,
                                           const std::filesystem::path& trace_path, std::size_t n_sbs,
                                           std::size_t n_slots) {
  Catalog catalog = load_catalog(catalog_path);
  const std::size_t n_files = catalog.n_files();

  auto in = open_in(trace_path);
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) parse_fail(trace_path, 1, "missing header");
  if (split(line) != std::vector<std::string_view>{"slot", "sbs", "file", "demand"})
    parse_fail(trace_path, lineno, "expected header 'slot,sbs,file,demand'");

  struct Row {
    std::size_t t, b, f;
    double d;
  };
  std::vector<Row> rows;
  std::size_t max_t = 0, max_b = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cols = split(line);
    Row r{};
    if (cols.size() != 4 || !parse_number(cols[0], r.t) || !parse_number(cols[1], r.b) ||
        !parse_number(cols[2], r.f) || !parse_number(cols[3], r.d))
      parse_fail(trace_path, lineno, "malformed row '" + line + "'");
    if (r.f >= n_files) throw ValidationError("file " + std::to_string(r.f) + " out of range (line " + std::to_string(lineno) + ")");
    if (r.d < 0.0 || !std::isfinite(r.d))
      throw ValidationError("negative demand at line " + std::to_string(lineno));
    if (n_sbs && r.b >= n_sbs) throw ValidationError("sbs " + std::to_string(r.b) + " out of range");
    if (n_slots && r.t >= n_slots) throw ValidationError("slot " + std::to_string(r.t) + " out of range");
    max_t = std::max(max_t, r.t);
    max_b = std::max(max_b, r.b);
    rows.push_back(r);
  }
  if (!n_slots) n_slots = rows.empty() ? 0 : max_t + 1;
  if (!n_sbs) n_sbs = rows.empty() ? 0 : max_b + 1;
  DemandTrace trace(n_slots, n_sbs, n_files);
  for (const Row& r : rows) trace.at(r.t, r.b, r.f) += r.d;
  return {std::move(catalog), std::move(trace)};
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "file,size\n";
  for (std::size_t f = 0; f < catalog.n_files(); ++f) out << f << ',' << format_double(catalog.sizes[f]) << '\n';
}

void save_trace(const DemandTrace& trace, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "slot,sbs,file,demand\n";
  for (std::size_t t = 0; t < trace.n_slots(); ++t)
    for (std::size_t b = 0; b < trace.n_sbs(); ++b) {
      auto row = trace.row(t, b);
      for (std::size_t f = 0; f < row.size(); ++f)
        if (row[f] != 0.0) out << t << ',' << b << ',' << f << ',' << format_double(row[f]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

void SyntheticConfig::validate() const {
  if (!(zipf_exponent >= 0.0)) throw ValidationError("zipf_exponent must be non-negative");
  if (n_regimes == 0) throw ValidationError("n_regimes must be positive");
  if (regime_length == 0) throw ValidationError("regime_length must be positive");
  if (!(cross_sbs_mixing >= 0.0 && cross_sbs_mixing <= 1.0))
    throw ValidationError("cross_sbs_mixing must lie in [0,1]");
  if (requests_per_slot == 0) throw ValidationError("requests_per_slot must be positive");
}

std::size_t regime_of_slot(const SyntheticConfig& cfg, std::size_t t) {
  return (t / cfg.regime_length) % cfg.n_regimes;
}

namespace {

// Stream tags keep the permutation and sampling streams disjoint.
constexpr std::uint64_t kGlobalPerm = 0x676c6f62;
constexpr std::uint64_t kLocalPerm = 0x6c6f6361;
constexpr std::uint64_t kRequests = 0x72657173;

Vec zipf_weights(std::size_t n, double s) {
  Vec w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (w[i] = std::pow(double(i + 1), -s));
  for (double& x : w) x /= total;
  return w;
}

// Rank-to-file assignment drawn fresh per regime.
std::vector<std::size_t> permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

}  // namespace

Vec demand_profile(std::size_t n_files, std::size_t n_sbs, const SyntheticConfig& cfg, std::size_t regime,
                   std::size_t b) {
  cfg.validate();
  if (b >= n_sbs) throw IndexError("sBS out of range");
  const Vec ranks = zipf_weights(n_files, cfg.zipf_exponent);
  const auto global = permutation(n_files, mix_seed(cfg.seed, kGlobalPerm, regime));
  const auto local = permutation(n_files, mix_seed(cfg.seed, kLocalPerm, regime, b));
  Vec p(n_files, 0.0);
  for (std::size_t r = 0; r < n_files; ++r) {
    p[global[r]] += cfg.cross_sbs_mixing * ranks[r];
    p[local[r]] += (1.0 - cfg.cross_sbs_mixing) * ranks[r];
  }
  return p;
}

DemandTrace generate_synthetic(const Catalog& catalog, const Topology& topology, std::size_t n_slots,
                               const SyntheticConfig& cfg) {
  cfg.validate();
  const std::size_t n_files = catalog.n_files();
  const std::size_t n_sbs = topology.n_sbs();
  if (n_files == 0 || n_sbs == 0) throw ValidationError("empty catalog or topology");

  const std::size_t n_profiles = std::min(cfg.n_regimes, n_slots ? (n_slots - 1) / cfg.regime_length + 1 : 0);
  std::vector<std::vector<Vec>> cdf(n_profiles, std::vector<Vec>(n_sbs));
  for (std::size_t r = 0; r < n_profiles; ++r)
    for (std::size_t b = 0; b < n_sbs; ++b) {
      Vec p = demand_profile(n_files, n_sbs, cfg, r, b);
      std::partial_sum(p.begin(), p.end(), p.begin());
      p.back() = 1.0;
      cdf[r][b] = std::move(p);
    }

  DemandTrace trace(n_slots, n_sbs, n_files);
  // Each (slot, sBS) cell has its own stream, so the result does not depend on
  // how the loop is scheduled.
  const auto cells = static_cast<long long>(n_slots * n_sbs);
  for (long long cell = 0; cell < cells; ++cell) {
    const std::size_t t = std::size_t(cell) / n_sbs;
    const std::size_t b = std::size_t(cell) % n_sbs;
    const Vec& c = cdf[regime_of_slot(cfg, t)][b];
    SplitMix64 rng(mix_seed(cfg.seed, kRequests, t, b));
    auto row = trace.row(t, b);
    for (std::size_t k = 0; k < cfg.requests_per_slot; ++k) {
      const double u = rng.uniform();
      const auto it = std::upper_bound(c.begin(), c.end(), u);
      row[std::min<std::size_t>(std::size_t(it - c.begin()), n_files - 1)] += 1.0;
    }
  }
  return trace;
}

Vec random_sizes(std::size_t n_files, double lo, double hi, std::uint64_t seed, bool integral) {
  if (!(lo > 0.0) || hi < lo) throw ValidationError("size range must satisfy 0 < lo <= hi");
  SplitMix64 rng(mix_seed(seed, 0x73697a65));
  Vec sizes(n_files);
  for (double& s : sizes) {
    if (integral) {
      const auto lo_i = static_cast<std::uint64_t>(std::ceil(lo));
      const auto hi_i = static_cast<std::uint64_t>(std::floor(hi));
      s = double(lo_i + rng.below(hi_i - lo_i + 1));
    } else {
      s = lo + (hi - lo) * rng.uniform();
    }
  }
  return sizes;
}

}  // namespace cocache
