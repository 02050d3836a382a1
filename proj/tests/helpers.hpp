#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "cocache/catalog.hpp"
#include "cocache/errors.hpp"

namespace cocache::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cocache_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Silences warnings for the lifetime of the guard.
struct QuietWarnings {
  WarningHandler previous;
  QuietWarnings() : previous(set_warning_handler([](const std::string&) {})) {}
  ~QuietWarnings() { set_warning_handler(previous); }
};

inline Vec random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(rng);
  return v;
}

inline void fill_random(DemandTrace& trace, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  for (std::size_t t = 0; t < trace.n_slots(); ++t)
    for (std::size_t b = 0; b < trace.n_sbs(); ++b)
      for (double& x : trace.row(t, b)) x = u(rng);
}

}  // namespace cocache::testing
