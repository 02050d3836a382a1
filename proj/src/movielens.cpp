#include "cocache/movielens.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <string>

#include "cocache/errors.hpp"
#include "cocache/rng.hpp"

namespace cocache {

namespace {

struct Rating {
  long long movie;
  long long timestamp;
};

bool parse_int(std::string_view s, long long& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> fields(std::string_view line) {
  const std::string_view sep = line.find("::") != std::string_view::npos ? "::" : ",";
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = line.find(sep, pos);
    out.push_back(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + sep.size();
  }
  return out;
}

}  // namespace

ImportedTrace import_movielens(const std::filesystem::path& ratings, const MovieLensOptions& opt) {
  if (opt.n_sbs == 0 || opt.n_slots == 0) throw ValidationError("n_sbs and n_slots must be positive");
  std::ifstream in(ratings);
  if (!in) throw ParseError("cannot open " + ratings.string());

  std::vector<Rating> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = fields(line);
    Rating r{};
    if (f.size() < 4 || !parse_int(f[1], r.movie) || !parse_int(f[3], r.timestamp)) {
      if (lineno == 1) continue;  // header
      throw ParseError(ratings.string() + ":" + std::to_string(lineno) + ": expected user,movie,rating,timestamp");
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ParseError(ratings.string() + ": no ratings");

  std::map<long long, std::size_t> counts;
  for (const auto& r : rows) ++counts[r.movie];
  std::vector<long long> keep;
  for (const auto& [movie, n] : counts) keep.push_back(movie);
  if (opt.max_files && keep.size() > opt.max_files) {
    std::stable_sort(keep.begin(), keep.end(), [&](long long a, long long b) { return counts[a] > counts[b]; });
    keep.resize(opt.max_files);
    std::sort(keep.begin(), keep.end());
  }
  std::map<long long, std::size_t> dense;
  for (std::size_t i = 0; i < keep.size(); ++i) dense[keep[i]] = i;

  long long t0 = rows.front().timestamp, t1 = t0;
  for (const auto& r : rows) {
    t0 = std::min(t0, r.timestamp);
    t1 = std::max(t1, r.timestamp);
  }
  // Equal-width bins over [t0, t1]; the last bin is closed.
  const double span = t1 > t0 ? double(t1 - t0) : 1.0;

  ImportedTrace out;
  out.movie_ids = keep;
  out.trace = DemandTrace(opt.n_slots, opt.n_sbs, keep.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto it = dense.find(rows[i].movie);
    if (it == dense.end()) continue;
    const auto slot = std::min<std::size_t>(
        opt.n_slots - 1, static_cast<std::size_t>(double(rows[i].timestamp - t0) / span * double(opt.n_slots)));
    SplitMix64 rng(mix_seed(opt.seed, i));
    const auto b = static_cast<std::size_t>(rng.below(opt.n_sbs));
    out.trace.at(slot, b, it->second) += 1.0;
  }
  Vec sizes = random_sizes(keep.size(), opt.size_min, opt.size_max, opt.seed);
  double total = 0.0;
  for (double s : sizes) total += s;
  out.catalog = Catalog::make(std::move(sizes), 0.1 * total);
  return out;
}

}  // namespace cocache
