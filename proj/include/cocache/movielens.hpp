#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cocache/catalog.hpp"

namespace cocache {

struct MovieLensOptions {
  std::size_t n_sbs = 5;
  std::size_t n_slots = 200;
  std::size_t max_files = 0;  // keep the most-rated movies; 0 keeps all
  double size_min = 10.0;
  double size_max = 100.0;
  std::uint64_t seed = 1;
};

struct ImportedTrace {
  Catalog catalog;          // budget defaults to 10% of the catalog
  DemandTrace trace;
  std::vector<long long> movie_ids;  // original id of each dense file index
};

/// Converts a ratings log (`userId,movieId,rating,timestamp` with optional
/// header, or the `::`-separated .dat layout) into per-slot request counts.
/// Each rating is one request; the time span is cut into n_slots equal
/// buckets and every rating is assigned to one of n_sbs disjoint chunks
/// uniformly at random.
ImportedTrace import_movielens(const std::filesystem::path& ratings, const MovieLensOptions& opt);

}  // namespace cocache
