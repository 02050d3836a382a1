#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace cocache {

using Vec = std::vector<double>;

/// Content library: per-file coded lengths and the per-sBS cache budget, both
/// in the same length units.
struct Catalog {
  Vec sizes;
  double cache_budget = 0.0;
  // Upper bound on any caching fraction. 1.0 models "at most the whole file";
  // +inf reproduces the uncapped feasible set.
  double fraction_cap = 1.0;

  std::size_t n_files() const { return sizes.size(); }
  double total_size() const;
  bool capped() const { return fraction_cap < std::numeric_limits<double>::infinity(); }

  /// Throws ValidationError on non-positive sizes or budget. Warns when the
  /// whole catalog fits in the cache.
  void validate() const;

  static Catalog make(Vec sizes, double cache_budget);
};

/// Undirected sBS graph without self-loops.
class Topology {
 public:
  Topology() = default;
  explicit Topology(std::vector<std::vector<std::size_t>> neighbors);

  static Topology from_edges(std::size_t n_sbs,
                             const std::vector<std::pair<std::size_t, std::size_t>>& edges);
  static Topology isolated(std::size_t n_sbs);
  static Topology line(std::size_t n_sbs);
  static Topology complete(std::size_t n_sbs);
  // Five sBSs on a cycle: 0-1-2-3-4-0.
  static Topology pentagon();

  std::size_t n_sbs() const { return neighbors_.size(); }
  // Sorted ascending; the position of b' in this list is its neighbor slot j_b(b').
  const std::vector<std::size_t>& neighbors(std::size_t b) const;
  std::size_t degree(std::size_t b) const { return neighbors(b).size(); }

 private:
  std::vector<std::vector<std::size_t>> neighbors_;
};

enum class DemandScale { raw, normalized };

/// Aggregate request counts D[t][b][f], stored densely.
class DemandTrace {
 public:
  DemandTrace() = default;
  DemandTrace(std::size_t n_slots, std::size_t n_sbs, std::size_t n_files);

  std::size_t n_slots() const { return n_slots_; }
  std::size_t n_sbs() const { return n_sbs_; }
  std::size_t n_files() const { return n_files_; }

  double& at(std::size_t t, std::size_t b, std::size_t f) { return data_[index(t, b, f)]; }
  double at(std::size_t t, std::size_t b, std::size_t f) const { return data_[index(t, b, f)]; }

  // Unchecked row access; see slot_demand() for the checked accessor.
  std::span<const double> row(std::size_t t, std::size_t b) const {
    return {data_.data() + index(t, b, 0), n_files_};
  }
  std::span<double> row(std::size_t t, std::size_t b) {
    return {data_.data() + index(t, b, 0), n_files_};
  }

  /// Copy with every (slot, sBS) row replaced by its popularity profile.
  DemandTrace normalized() const;

  // Raw data access, mostly for hashing and equality in tests.
  const Vec& data() const { return data_; }
  bool operator==(const DemandTrace&) const = default;

 private:
  std::size_t index(std::size_t t, std::size_t b, std::size_t f) const {
    return (t * n_sbs_ + b) * n_files_ + f;
  }

  std::size_t n_slots_ = 0;
  std::size_t n_sbs_ = 0;
  std::size_t n_files_ = 0;
  Vec data_;
};

struct SyntheticConfig {
  double zipf_exponent = 0.8;
  std::size_t n_regimes = 1;
  std::size_t regime_length = 1;
  double cross_sbs_mixing = 0.5;
  std::size_t requests_per_slot = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Reads the catalog and trace CSVs and validates them against the topology
/// size implied by the trace (max sbs id + 1) unless n_sbs is given.
std::pair<Catalog, DemandTrace> load_trace(const std::filesystem::path& catalog_path,
                                           const std::filesystem::path& trace_path,
                                           std::size_t n_sbs = 0, std::size_t n_slots = 0);

Catalog load_catalog(const std::filesystem::path& path);
void save_catalog(const Catalog& catalog, const std::filesystem::path& path);
// Sparse: zero entries are omitted. Rows ordered by (slot, sbs, file).
void save_trace(const DemandTrace& trace, const std::filesystem::path& path);

/// Multinomial request counts drawn from the per-(regime, sBS) mixture of a
/// shared and a local Zipf profile. Pure function of its arguments.
DemandTrace generate_synthetic(const Catalog& catalog, const Topology& topology,
                               std::size_t n_slots, const SyntheticConfig& cfg);

/// The request distribution generate_synthetic samples from at sBS b during
/// the given regime. Sums to one.
Vec demand_profile(std::size_t n_files, std::size_t n_sbs, const SyntheticConfig& cfg,
                   std::size_t regime, std::size_t b);

std::size_t regime_of_slot(const SyntheticConfig& cfg, std::size_t t);

/// Sizes drawn uniformly from [lo, hi]; integer-valued when `integral`.
Vec random_sizes(std::size_t n_files, double lo, double hi, std::uint64_t seed,
                 bool integral = true);

std::span<const double> slot_demand(const DemandTrace& trace, std::size_t b, std::size_t t);

/// d / sum(d), or the zero vector when the slot carries no requests.
Vec normalize_slot(std::span<const double> d);

}  // namespace cocache
