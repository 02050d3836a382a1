#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cocache/config.hpp"
#include "cocache/errors.hpp"
#include "cocache/movielens.hpp"
#include "cocache/report.hpp"
#include "cocache/sim.hpp"
#include "cocache/validate.hpp"

namespace fs = std::filesystem;
using namespace cocache;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> policies;
  std::optional<std::string> cache_fracs;
  std::optional<std::string> lambda_sweep;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "OpenMP threads (0 = default)");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.policies) cfg.policies = parse_policy_list(*o.policies);
  if (o.cache_fracs) cfg.cache_fracs = parse_number_list(*o.cache_fracs, "cache_fracs");
  if (o.lambda_sweep) cfg.lambda_sweep = parse_number_list(*o.lambda_sweep, "lambda_sweep");
  if (o.threads) cfg.threads = *o.threads;
  cfg.synthetic.demand.seed = cfg.seed;
  cfg.validate();
  if (cfg.threads > 0) set_threads(cfg.threads);
  return cfg;
}

// Writes via a temporary sibling and renames, so readers never see a partial file.
template <class Fn>
void atomic_write(const fs::path& path, Fn&& write) {
  const fs::path tmp = path.string() + ".tmp";
  write(tmp);
  fs::rename(tmp, path);
}

struct Workload {
  Catalog catalog;
  DemandTrace trace;
};

Workload workload(const RunConfig& cfg, const Topology& topo) {
  if (cfg.catalog_path) {
    auto [cat, trace] = load_trace(*cfg.catalog_path, *cfg.trace_path, topo.n_sbs());
    return {std::move(cat), std::move(trace)};
  }
  const auto& s = cfg.synthetic;
  Vec sizes = random_sizes(s.n_files, s.size_min, s.size_max, cfg.seed);
  double total = 0.0;
  for (double x : sizes) total += x;
  Catalog cat = Catalog::make(std::move(sizes), 0.1 * total);
  cat.fraction_cap = cfg.fraction_cap;
  DemandTrace trace = generate_synthetic(cat, topo, s.n_slots, s.demand);
  return {std::move(cat), std::move(trace)};
}

int cmd_generate(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const Topology topo = parse_topology(cfg.topology);
  const Workload w = workload(cfg, topo);
  fs::create_directories(cfg.out);
  atomic_write(cfg.out / "catalog.csv", [&](const fs::path& p) { save_catalog(w.catalog, p); });
  atomic_write(cfg.out / "trace.csv", [&](const fs::path& p) { save_trace(w.trace, p); });
  atomic_write(cfg.out / "config.json", [&](const fs::path& p) { save_run_config(cfg, p); });
  std::cout << "wrote " << (cfg.out / "catalog.csv").string() << " and " << (cfg.out / "trace.csv").string() << " ("
            << w.trace.n_slots() << " slots, " << w.trace.n_sbs() << " sBSs, " << w.trace.n_files() << " files)\n";
  return 0;
}

int cmd_run(const Overrides& o) {
  const RunConfig cfg = resolve(o);
  const Topology topo = parse_topology(cfg.topology);
  const Workload w = workload(cfg, topo);
  fs::create_directories(cfg.out);
  atomic_write(cfg.out / "config.json", [&](const fs::path& p) { save_run_config(cfg, p); });

  const Comparison cmp =
      compare_policies(w.trace, w.catalog.sizes, topo, cfg.policies, cfg.cache_fracs, cfg.sim, cfg.fraction_cap);
  std::vector<const MetricsLog*> logs;
  for (const auto& l : cmp.logs) logs.push_back(&l);
  atomic_write(cfg.out / "metrics.csv", [&](const fs::path& p) { write_metrics_csv(logs, p); });
  atomic_write(cfg.out / "comparison.csv", [&](const fs::path& p) { write_comparison_csv(cmp, p); });
  for (std::size_t b = 0; b < topo.n_sbs(); ++b)
    atomic_write(cfg.out / ("hit_sbs" + std::to_string(b) + ".svg"),
                 [&](const fs::path& p) { write_svg(hit_vs_cache_plot(cmp, b), p); });
  atomic_write(cfg.out / "hit_sum.svg", [&](const fs::path& p) { write_svg(hit_vs_cache_plot(cmp, std::nullopt), p); });
  atomic_write(cfg.out / "log_ratio.svg", [&](const fs::path& p) { write_svg(log_ratio_plot(cmp), p); });

  if (!cfg.lambda_sweep.empty()) {
    const auto rows =
        lambda_sweep(w.trace, w.catalog.sizes, topo, cfg.lambda_sweep, cfg.cache_fracs, cfg.sim, cfg.fraction_cap);
    atomic_write(cfg.out / "lambda_sweep.csv", [&](const fs::path& p) { write_lambda_csv(rows, p); });
    atomic_write(cfg.out / "lambda_sweep.svg", [&](const fs::path& p) { write_svg(lambda_plot(rows), p); });
  }

  std::printf("%-26s %10s %16s %12s\n", "policy", "cache", "avg hit (sum)", "log ratio");
  for (const auto& r : cmp.rows)
    if (!r.sbs) std::printf("%-26s %10.3g %16.6g %12.4g\n", policy_name(r.policy).c_str(), r.cache_frac, r.avg_hit, r.log_ratio);
  std::cout << "outputs in " << cfg.out.string() << "\n";
  return 0;
}

int cmd_validate(std::uint64_t seed) {
  ValidationOptions opt;
  opt.seed = seed;
  bool ok = true;
  for (const auto& r : run_validation(opt)) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

int cmd_import(const fs::path& ratings, const fs::path& out, const MovieLensOptions& opt) {
  const ImportedTrace imp = import_movielens(ratings, opt);
  fs::create_directories(out);
  atomic_write(out / "catalog.csv", [&](const fs::path& p) { save_catalog(imp.catalog, p); });
  atomic_write(out / "trace.csv", [&](const fs::path& p) { save_trace(imp.trace, p); });
  atomic_write(out / "movie_ids.csv", [&](const fs::path& p) {
    std::ofstream f(p);
    f << "file,movie_id\n";
    for (std::size_t i = 0; i < imp.movie_ids.size(); ++i) f << i << ',' << imp.movie_ids[i] << '\n';
  });
  std::cout << "imported " << imp.movie_ids.size() << " movies into " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed coded-caching simulator"};
  app.require_subcommand(1);

  Overrides gen_o, run_o;
  auto* gen = app.add_subcommand("generate", "write a synthetic catalog and trace");
  add_common(gen, gen_o);

  auto* run = app.add_subcommand("run", "compare caching policies over a cache-size sweep");
  add_common(run, run_o);
  run->add_option("--policies", run_o.policies, "comma-separated policy names or 'all'");
  run->add_option("--cache-fracs", run_o.cache_fracs, "comma-separated cache fractions");
  run->add_option("--lambda-sweep", run_o.lambda_sweep, "comma-separated federated lambdas");

  std::uint64_t val_seed = 7;
  auto* val = app.add_subcommand("validate", "run the oracle and property checks");
  val->add_option("--seed", val_seed, "seed for the random instances");

  fs::path ratings, import_out = "movielens";
  MovieLensOptions ml;
  auto* imp = app.add_subcommand("import-movielens", "convert a ratings log into catalog and trace CSVs");
  imp->add_option("ratings", ratings, "ratings file")->required()->check(CLI::ExistingFile);
  imp->add_option("--out", import_out, "output directory");
  imp->add_option("--n-sbs", ml.n_sbs, "number of disjoint chunks");
  imp->add_option("--n-slots", ml.n_slots, "number of time slots");
  imp->add_option("--max-files", ml.max_files, "keep only the most-rated movies (0 = all)");
  imp->add_option("--seed", ml.seed, "seed for chunk assignment and file sizes");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return cmd_generate(gen_o);
    if (*run) return cmd_run(run_o);
    if (*val) return cmd_validate(val_seed);
    if (*imp) return cmd_import(ratings, import_out, ml);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
