#include "cocache/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "cocache/errors.hpp"

namespace cocache {

using nlohmann::json;

namespace {

template <class E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<PenaltySign> kPenalty[] = {{PenaltySign::penalize, "penalize"}, {PenaltySign::literal, "literal"}};
constexpr EnumName<MismatchBasis> kBasis[] = {{MismatchBasis::local, "local"}, {MismatchBasis::literal, "literal"}};
constexpr EnumName<ProjectionMode> kProjection[] = {{ProjectionMode::only_if_exceeded, "only-if-exceeded"},
                                                    {ProjectionMode::always_scale, "always-scale"}};
constexpr EnumName<RegretMode> kRegret[] = {{RegretMode::per_slot_opt, "per-slot-opt"}, {RegretMode::ftl, "ftl"}};
constexpr EnumName<DemandScale> kScale[] = {{DemandScale::raw, "raw"}, {DemandScale::normalized, "normalized"}};
constexpr EnumName<LrfuMode> kLrfuMode[] = {{LrfuMode::fractional, "fractional"}, {LrfuMode::integral, "integral"}};
constexpr EnumName<LrfuOrdering> kOrdering[] = {{LrfuOrdering::by_value, "by-value"},
                                                {LrfuOrdering::by_demand, "by-demand"}};

template <class E, std::size_t N>
const char* name_of(const EnumName<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <class E, std::size_t N>
E parse_enum(const EnumName<E> (&table)[N], const json& j, const std::string& field) {
  if (!j.is_string()) throw ValidationError(field + ": expected a string");
  const auto s = j.get<std::string>();
  std::string options;
  for (const auto& e : table) {
    if (s == e.name) return e.value;
    options += std::string(options.empty() ? "" : ", ") + e.name;
  }
  throw ValidationError(field + ": unknown value '" + s + "' (expected one of " + options + ")");
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!ok.count(key)) throw ValidationError((where.empty() ? "" : where + ".") + key + ": unknown field");
}

template <class T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
  if (!j.contains(key)) return;
  const std::string field = (where.empty() ? "" : where + ".") + key;
  try {
    const json& v = j.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ValidationError(field + ": expected true or false");
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ValidationError(field + ": expected a non-negative integer");
    } else if constexpr (std::is_arithmetic_v<T>) {
      if (!v.is_number()) throw ValidationError(field + ": expected a number");
    }
    dst = v.get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(field + ": " + e.what());
  }
}

std::size_t parse_count(std::string_view s, const std::string& spec) {
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ValidationError("topology: bad number '" + std::string(s) + "' in '" + spec + "'");
  return n;
}

}  // namespace

SyntheticConfig regime_switching_demand() {
  SyntheticConfig c;
  c.zipf_exponent = 0.5;
  c.n_regimes = 3;
  c.regime_length = 6;
  c.cross_sbs_mixing = 0.5;
  c.requests_per_slot = 20000;
  return c;
}

Topology parse_topology(const std::string& spec) {
  if (spec == "pentagon") return Topology::pentagon();
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ValidationError("topology: unknown spec '" + spec + "'");
  const std::string kind = spec.substr(0, colon);
  std::string rest = spec.substr(colon + 1);
  if (kind == "edges") {
    const auto c2 = rest.find(':');
    const std::size_t n = parse_count(std::string_view(rest).substr(0, c2), spec);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    if (c2 != std::string::npos) {
      std::stringstream ss(rest.substr(c2 + 1));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) throw ValidationError("topology: bad edge '" + item + "'");
        edges.emplace_back(parse_count(std::string_view(item).substr(0, dash), spec),
                           parse_count(std::string_view(item).substr(dash + 1), spec));
      }
    }
    return Topology::from_edges(n, edges);
  }
  const std::size_t n = parse_count(rest, spec);
  if (n == 0) throw ValidationError("topology: needs at least one sBS");
  if (kind == "line") return Topology::line(n);
  if (kind == "complete") return Topology::complete(n);
  if (kind == "isolated") return Topology::isolated(n);
  if (kind == "ring") {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t b = 0; b + 1 < n; ++b) edges.emplace_back(b, b + 1);
    if (n > 2) edges.emplace_back(n - 1, 0);
    return Topology::from_edges(n, edges);
  }
  throw ValidationError("topology: unknown kind '" + kind + "'");
}

void RunConfig::validate() const {
  if (catalog_path.has_value() != trace_path.has_value())
    throw ValidationError("catalog and trace must be given together");
  if (synthetic.n_files == 0) throw ValidationError("synthetic.n_files: must be positive");
  if (synthetic.n_slots == 0) throw ValidationError("synthetic.n_slots: must be positive");
  if (!(synthetic.size_min > 0.0 && synthetic.size_min <= synthetic.size_max))
    throw ValidationError("synthetic.size_min/size_max: need 0 < min <= max");
  synthetic.demand.validate();
  parse_topology(topology);
  if (policies.empty()) throw ValidationError("policies: empty list");
  if (cache_fracs.empty()) throw ValidationError("cache_fracs: empty list");
  for (double f : cache_fracs)
    if (!(f > 0.0)) throw ValidationError("cache_fracs: values must be positive");
  for (double l : lambda_sweep)
    if (!(l >= 0.0)) throw ValidationError("lambda_sweep: values must be non-negative");
  if (!(fraction_cap > 0.0)) throw ValidationError("fraction_cap: must be positive");
  if (threads < 0) throw ValidationError("threads: must be non-negative");
  sim.validate();
}

json to_json(const RunConfig& c) {
  json j;
  if (c.catalog_path) j["catalog"] = c.catalog_path->string();
  if (c.trace_path) j["trace"] = c.trace_path->string();
  const auto& d = c.synthetic.demand;
  j["synthetic"] = {{"n_files", c.synthetic.n_files},
                    {"n_slots", c.synthetic.n_slots},
                    {"size_min", c.synthetic.size_min},
                    {"size_max", c.synthetic.size_max},
                    {"zipf_exponent", d.zipf_exponent},
                    {"n_regimes", d.n_regimes},
                    {"regime_length", d.regime_length},
                    {"cross_sbs_mixing", d.cross_sbs_mixing},
                    {"requests_per_slot", d.requests_per_slot}};
  j["topology"] = c.topology;
  json pols = json::array();
  for (PolicyKind p : c.policies) pols.push_back(policy_name(p));
  j["policies"] = pols;
  j["cache_fracs"] = c.cache_fracs;
  j["lambda_sweep"] = c.lambda_sweep;
  j["fraction_cap"] = c.fraction_cap;
  const auto& s = c.sim;
  const auto& o = s.optimizer;
  j["tau"] = s.tau;
  j["tau1"] = s.tau1;
  j["tau2"] = s.tau2;
  j["delta"] = s.delta;
  j["refresh_every"] = s.refresh_every;
  j["regret_mode"] = name_of(kRegret, s.regret_mode);
  j["optimizer"] = {{"a", o.a},
                    {"b_coef", o.b_coef},
                    {"lambda", o.lambda},
                    {"eta0", o.eta0},
                    {"beta0", o.beta0},
                    {"gamma0", o.gamma0},
                    {"max_iters", o.max_iters},
                    {"tol", o.tol},
                    {"penalty_sign", name_of(kPenalty, o.penalty_sign)},
                    {"mismatch_basis", name_of(kBasis, o.mismatch_basis)},
                    {"projection", name_of(kProjection, o.projection)}};
  j["federated"] = {{"lambda", s.federated.lambda},
                    {"include_self", s.federated.include_self},
                    {"demand_scale", name_of(kScale, s.federated_scale)}};
  j["lrfu"] = {{"mode", name_of(kLrfuMode, s.lrfu.mode)}, {"ordering", name_of(kOrdering, s.lrfu.ordering)}};
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  j["threads"] = c.threads;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  check_keys(j, "", {"catalog", "trace", "synthetic", "topology", "policies", "cache_fracs", "lambda_sweep",
                     "fraction_cap", "tau", "tau1", "tau2", "delta", "refresh_every", "regret_mode", "optimizer",
                     "federated", "lrfu", "seed", "out", "threads"});
  RunConfig c;
  if (j.contains("catalog")) c.catalog_path = j.at("catalog").get<std::string>();
  if (j.contains("trace")) c.trace_path = j.at("trace").get<std::string>();
  if (j.contains("synthetic")) {
    const json& s = j.at("synthetic");
    check_keys(s, "synthetic", {"n_files", "n_slots", "size_min", "size_max", "zipf_exponent", "n_regimes",
                                "regime_length", "cross_sbs_mixing", "requests_per_slot"});
    read(s, "n_files", c.synthetic.n_files, "synthetic");
    read(s, "n_slots", c.synthetic.n_slots, "synthetic");
    read(s, "size_min", c.synthetic.size_min, "synthetic");
    read(s, "size_max", c.synthetic.size_max, "synthetic");
    read(s, "zipf_exponent", c.synthetic.demand.zipf_exponent, "synthetic");
    read(s, "n_regimes", c.synthetic.demand.n_regimes, "synthetic");
    read(s, "regime_length", c.synthetic.demand.regime_length, "synthetic");
    read(s, "cross_sbs_mixing", c.synthetic.demand.cross_sbs_mixing, "synthetic");
    read(s, "requests_per_slot", c.synthetic.demand.requests_per_slot, "synthetic");
  }
  read(j, "topology", c.topology, "");
  if (j.contains("policies")) {
    const json& p = j.at("policies");
    if (p.is_string()) {
      c.policies = parse_policy_list(p.get<std::string>());
    } else if (p.is_array()) {
      c.policies.clear();
      for (const auto& x : p) c.policies.push_back(parse_policy(x.get<std::string>()));
    } else {
      throw ValidationError("policies: expected a list or a comma-separated string");
    }
  }
  read(j, "cache_fracs", c.cache_fracs, "");
  read(j, "lambda_sweep", c.lambda_sweep, "");
  read(j, "fraction_cap", c.fraction_cap, "");
  read(j, "tau", c.sim.tau, "");
  read(j, "tau1", c.sim.tau1, "");
  read(j, "tau2", c.sim.tau2, "");
  read(j, "delta", c.sim.delta, "");
  read(j, "refresh_every", c.sim.refresh_every, "");
  if (j.contains("regret_mode")) c.sim.regret_mode = parse_enum(kRegret, j.at("regret_mode"), "regret_mode");
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    auto& t = c.sim.optimizer;
    check_keys(o, "optimizer", {"a", "b_coef", "lambda", "eta0", "beta0", "gamma0", "max_iters", "tol",
                                "penalty_sign", "mismatch_basis", "projection"});
    read(o, "a", t.a, "optimizer");
    read(o, "b_coef", t.b_coef, "optimizer");
    read(o, "lambda", t.lambda, "optimizer");
    read(o, "eta0", t.eta0, "optimizer");
    read(o, "beta0", t.beta0, "optimizer");
    read(o, "gamma0", t.gamma0, "optimizer");
    read(o, "max_iters", t.max_iters, "optimizer");
    read(o, "tol", t.tol, "optimizer");
    if (o.contains("penalty_sign")) t.penalty_sign = parse_enum(kPenalty, o.at("penalty_sign"), "optimizer.penalty_sign");
    if (o.contains("mismatch_basis"))
      t.mismatch_basis = parse_enum(kBasis, o.at("mismatch_basis"), "optimizer.mismatch_basis");
    if (o.contains("projection")) t.projection = parse_enum(kProjection, o.at("projection"), "optimizer.projection");
  }
  if (j.contains("federated")) {
    const json& f = j.at("federated");
    check_keys(f, "federated", {"lambda", "include_self", "demand_scale"});
    read(f, "lambda", c.sim.federated.lambda, "federated");
    read(f, "include_self", c.sim.federated.include_self, "federated");
    if (f.contains("demand_scale"))
      c.sim.federated_scale = parse_enum(kScale, f.at("demand_scale"), "federated.demand_scale");
  }
  if (j.contains("lrfu")) {
    const json& l = j.at("lrfu");
    check_keys(l, "lrfu", {"mode", "ordering"});
    if (l.contains("mode")) c.sim.lrfu.mode = parse_enum(kLrfuMode, l.at("mode"), "lrfu.mode");
    if (l.contains("ordering")) c.sim.lrfu.ordering = parse_enum(kOrdering, l.at("ordering"), "lrfu.ordering");
  }
  read(j, "seed", c.seed, "");
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  read(j, "threads", c.threads, "");
  c.synthetic.demand.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

std::vector<PolicyKind> parse_policy_list(const std::string& list) {
  if (list == "all") return all_policies();
  std::vector<PolicyKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_policy(item));
  if (out.empty()) throw ValidationError("policies: empty list");
  return out;
}

Vec parse_number_list(const std::string& list, const std::string& field) {
  Vec out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw ValidationError(field + ": empty entry in '" + list + "'");
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw ValidationError(field + ": bad number '" + item + "'");
    out.push_back(x);
  }
  return out;
}

}  // namespace cocache
