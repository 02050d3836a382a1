#include "cocache/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "cocache/errors.hpp"
#include "cocache/exchange.hpp"

namespace cocache {

void OptimizerConfig::validate() const {
  if (a < 0.0 || b_coef < 0.0 || lambda < 0.0) throw ValidationError("a, b_coef and lambda must be non-negative");
  if (!(eta0 > 0.0 && beta0 > 0.0 && gamma0 > 0.0)) throw ValidationError("step-size bases must be positive");
  if (max_iters == 0) throw ValidationError("max_iters must be positive");
  if (!(tol > 0.0)) throw ValidationError("tol must be positive");
}

std::vector<SbsWindow> build_windows(const DemandTrace& trace, const Catalog& catalog, const Topology& topology,
                                     const WindowSpec& spec, Execution exec) {
  const std::size_t M = topology.n_sbs();
  if (trace.n_sbs() != M) throw ValidationError("trace and topology disagree on the number of sBSs");
  std::vector<SbsWindow> windows(M);
  auto own = [&](std::size_t b) {
    auto& w = windows[b];
    w.regret_strategies = regret_sequence(trace, catalog, b, spec.T, spec.tau, spec.regret_mode);
    w.psi = psi_table(trace, catalog, b, spec.T, spec.tau, spec.tau1, spec.tau2, DemandScale::normalized);
    w.self = hit_matrix(w.regret_strategies, trace, catalog, b, spec.T, spec.tau, DemandScale::normalized,
                        Execution::serial);
  };
  std::vector<std::vector<CachingStrategy>> payloads(M);
  auto cross = [&](std::size_t b, const std::vector<std::vector<CachingStrategy>>& inbox) {
    auto& w = windows[b];
    const auto& nb = topology.neighbors(b);
    for (std::size_t j = 0; j < nb.size(); ++j) {
      w.cross.push_back(hit_matrix(inbox[j], trace, catalog, b, spec.T, spec.tau, DemandScale::normalized,
                                   Execution::serial));
      if (spec.literal_mismatch) w.neighbor_own.push_back(windows[nb[j]].self);
    }
  };

  if (exec == Execution::parallel) {
    COCACHE_OMP_PRAGMA("omp parallel for schedule(static)")
    for (long long b = 0; b < static_cast<long long>(M); ++b) own(std::size_t(b));
  } else {
    for (std::size_t b = 0; b < M; ++b) own(b);
  }
  for (std::size_t b = 0; b < M; ++b) payloads[b] = windows[b].regret_strategies;
  const auto inbox = cocache::exchange(payloads, topology);
  if (exec == Execution::parallel) {
    COCACHE_OMP_PRAGMA("omp parallel for schedule(static)")
    for (long long b = 0; b < static_cast<long long>(M); ++b) cross(std::size_t(b), inbox[std::size_t(b)]);
  } else {
    for (std::size_t b = 0; b < M; ++b) cross(b, inbox[b]);
  }
  return windows;
}

WeightState init_state(const Catalog& catalog, std::size_t tau, std::size_t n_neighbors) {
  if (tau == 0) throw ValidationError("window length must be positive");
  WeightState s;
  s.alpha.assign(tau, 1.0 / double(tau));
  const double share = 1.0 / double(n_neighbors + 1);
  s.w_self = share;
  s.w_neighbors.assign(n_neighbors, share);
  const double start = std::min(catalog.fraction_cap, catalog.cache_budget / catalog.total_size());
  s.pi_inner.assign(tau, Vec(catalog.n_files(), start));
  return s;
}

Vec gamma_values(const WeightState& state, const PsiTable& psi) {
  if (state.pi_inner.size() != psi.tau) throw ValidationError("pi_inner does not match psi window");
  Vec gamma(psi.tau, 0.0);
  for (std::size_t t = 0; t < psi.tau; ++t) {
    const Vec& pi = state.pi_inner[t];
    if (pi.size() != psi.n_files) throw ValidationError("pi_inner length does not match psi table");
    for (std::size_t f = 0; f < psi.n_files; ++f) gamma[t] += pi[f] * psi(t, f);
  }
  return gamma;
}

void update_pi_inner(WeightState& state, const PsiTable& psi, double eta, const Catalog& catalog,
                     ProjectionMode mode) {
  if (state.alpha.size() != psi.tau) throw ValidationError("alpha does not match psi window");
  const Vec gamma = gamma_values(state, psi);
  double objective = 0.0;
  for (std::size_t t = 0; t < psi.tau; ++t) objective += state.alpha[t] * gamma[t];
  const double sign = objective > 0.0 ? 1.0 : -1.0;
  for (std::size_t t = 0; t < psi.tau; ++t) {
    Vec& pi = state.pi_inner[t];
    const double step = 2.0 * eta * sign * state.alpha[t];
    for (std::size_t f = 0; f < psi.n_files; ++f) pi[f] += step * psi(t, f);
    pi = project_budget(pi, catalog, mode).strategy.fractions;
  }
}

bool update_alpha(WeightState& state, const HitMatrix& self, std::span<const double> gamma,
                  const OptimizerConfig& cfg, double beta) {
  const std::size_t tau = state.alpha.size();
  if (self.tau != tau || gamma.size() != tau) throw ValidationError("update_alpha: window sizes differ");
  const double u = 1.0 / double(tau);
  double neighbor_weight = 0.0;
  for (double w : state.w_neighbors) neighbor_weight += w;
  const double penalty_sign = cfg.penalty_sign == PenaltySign::penalize ? 1.0 : -1.0;

  Vec next(tau);
  double total = 0.0;
  for (std::size_t t = 0; t < tau; ++t) {
    // Coordinates within rounding of 1/tau count as "at or above" uniform.
    const double indicator = state.alpha[t] < u - 1e-12 ? 1.0 : -1.0;
    const double mismatch_grad = (2.0 / double(tau)) * neighbor_weight * self.column_sum(t);
    const double step = self(t, t) - 2.0 * cfg.a * std::abs(gamma[t]) + penalty_sign * cfg.lambda * indicator -
                        cfg.b_coef * mismatch_grad;
    next[t] = std::max(state.alpha[t] + beta * step, 0.0);
    total += next[t];
  }
  if (total <= 0.0) {
    state.alpha.assign(tau, u);
    return true;
  }
  for (double& x : next) x /= total;
  state.alpha = std::move(next);
  return false;
}

void normalize_neighbor_weights(WeightState& state) {
  double total = 0.0;
  for (double& w : state.w_neighbors) {
    w = std::max(w, 0.0);
    total += w;
  }
  if (total < 1.0) {
    state.w_self = 1.0 - total;
  } else {
    state.w_self = 0.0;
    for (double& w : state.w_neighbors) w /= total;
  }
}

void update_w(WeightState& state, std::span<const double> alpha_self, const std::vector<Vec>& alpha_neighbors,
              const HitMatrix& self, const std::vector<HitMatrix>& cross, double gamma, double b_coef) {
  const std::size_t n = state.w_neighbors.size();
  if (alpha_neighbors.size() != n || cross.size() != n)
    throw ValidationError("update_w: expected one alpha and one hit matrix per neighbor");
  const double tau = double(self.tau);
  const double own = self.weighted_total(alpha_self);
  for (std::size_t j = 0; j < n; ++j) {
    const double gap = own - cross[j].weighted_total(alpha_neighbors[j]);
    state.w_neighbors[j] -= (2.0 * gamma / tau) * b_coef * gap;
  }
  normalize_neighbor_weights(state);
}

double mismatch_for(const WeightState& state, const std::vector<Vec>& neighbor_alphas, const SbsWindow& window,
                    MismatchBasis basis) {
  const auto& matrices = basis == MismatchBasis::local ? window.cross : window.neighbor_own;
  if (matrices.size() != state.w_neighbors.size())
    throw ValidationError("mismatch basis matrices missing for this window");
  return mismatch_estimate(state.w_neighbors, state.alpha, neighbor_alphas, window.self, matrices);
}

double surrogate_objective(const WeightState& state, const std::vector<Vec>& neighbor_alphas,
                           const SbsWindow& window, const Catalog& catalog, const OptimizerConfig& cfg) {
  const std::size_t tau = state.alpha.size();
  const double u = 1.0 / double(tau);
  double hit = 0.0, deviation = 0.0;
  for (std::size_t t = 0; t < tau; ++t) {
    hit += state.alpha[t] * window.self(t, t);
    deviation += std::abs(state.alpha[t] - u);
  }
  const double disc = discrepancy_sup(window.psi, state.alpha, catalog).value;
  const double mismatch = mismatch_for(state, neighbor_alphas, window, cfg.mismatch_basis);
  const double penalty = cfg.penalty_sign == PenaltySign::penalize ? -cfg.lambda : cfg.lambda;
  return hit - cfg.a * disc - cfg.b_coef * mismatch + penalty * deviation;
}

CachingStrategy blended_strategy(std::size_t b, const std::vector<WeightState>& states,
                                 const std::vector<SbsWindow>& windows, const Topology& topology,
                                 const Catalog& catalog) {
  std::vector<CachingStrategy> parts;
  Vec weights;
  auto add = [&](std::size_t owner, double w) {
    if (w == 0.0) return;
    const auto& alpha = states[owner].alpha;
    for (std::size_t t = 0; t < alpha.size(); ++t) {
      if (alpha[t] == 0.0) continue;
      parts.push_back(windows[owner].regret_strategies[t]);
      weights.push_back(w * alpha[t]);
    }
  };
  add(b, states[b].w_self);
  const auto& nb = topology.neighbors(b);
  for (std::size_t j = 0; j < nb.size(); ++j) add(nb[j], states[b].w_neighbors[j]);

  double total = 0.0;
  for (double w : weights) total += w;
  // w and alpha each sum to one up to rounding; fold the residue back in.
  for (double& w : weights) w /= total;
  return project_budget(blend(parts, weights).fractions, catalog).strategy;
}

namespace {

void apply_fixed_modes(WeightState& s, const OptimizerConfig& cfg) {
  if (cfg.alpha_mode == AlphaMode::uniform) s.alpha.assign(s.alpha.size(), 1.0 / double(s.alpha.size()));
  switch (cfg.w_mode) {
    case NeighborWeightMode::uniform: {
      const double share = 1.0 / double(s.w_neighbors.size() + 1);
      s.w_self = share;
      s.w_neighbors.assign(s.w_neighbors.size(), share);
      break;
    }
    case NeighborWeightMode::self_only:
      s.w_self = 1.0;
      s.w_neighbors.assign(s.w_neighbors.size(), 0.0);
      break;
    case NeighborWeightMode::optimize:
      break;
  }
}

std::vector<Vec> neighbor_alphas(std::size_t b, const std::vector<WeightState>& states, const Topology& topology) {
  std::vector<Vec> out;
  for (std::size_t j : topology.neighbors(b)) out.push_back(states[j].alpha);
  return out;
}

double max_change(const WeightState& a, const WeightState& b) {
  double d = std::abs(a.w_self - b.w_self);
  for (std::size_t t = 0; t < a.alpha.size(); ++t) d = std::max(d, std::abs(a.alpha[t] - b.alpha[t]));
  for (std::size_t j = 0; j < a.w_neighbors.size(); ++j)
    d = std::max(d, std::abs(a.w_neighbors[j] - b.w_neighbors[j]));
  return d;
}

}  // namespace

SubroutineResult run_subroutine(const std::vector<SbsWindow>& windows, const Topology& topology,
                                const Catalog& catalog, const OptimizerConfig& cfg, Execution exec) {
  cfg.validate();
  const std::size_t M = topology.n_sbs();
  if (windows.size() != M) throw ValidationError("run_subroutine: one window per sBS required");
  const std::size_t tau = windows.empty() ? 0 : windows.front().regret_strategies.size();
  for (std::size_t b = 0; b < M; ++b) {
    const auto& w = windows[b];
    if (w.regret_strategies.size() != tau || w.self.tau != tau || w.psi.tau != tau)
      throw ValidationError("run_subroutine: window sizes differ at sBS " + std::to_string(b));
    if (w.cross.size() != topology.degree(b))
      throw ValidationError("run_subroutine: sBS " + std::to_string(b) + " lacks neighbor hit matrices");
  }

  SubroutineResult result;
  result.states.reserve(M);
  for (std::size_t b = 0; b < M; ++b) {
    result.states.push_back(init_state(catalog, tau, topology.degree(b)));
    apply_fixed_modes(result.states.back(), cfg);
  }

  const bool learn_alpha = cfg.alpha_mode == AlphaMode::optimize;
  const bool learn_w = cfg.w_mode == NeighborWeightMode::optimize;

  auto objectives = [&](const std::vector<WeightState>& states) {
    Vec out(M);
    for (std::size_t b = 0; b < M; ++b)
      out[b] = surrogate_objective(states[b], neighbor_alphas(b, states, topology), windows[b], catalog, cfg);
    return out;
  };
  auto record = [&](std::size_t iter, const std::vector<WeightState>& states, const Vec& obj) {
    for (std::size_t b = 0; b < M; ++b)
      result.trace.push_back({iter, b, obj[b], states[b].alpha, states[b].w_self, states[b].w_neighbors});
  };

  result.initial_objective = objectives(result.states);
  if (cfg.record_trace) record(0, result.states, result.initial_objective);

  if (learn_alpha || learn_w) {
    std::vector<WeightState> next(result.states);
    std::vector<char> resets(M, 0);
    for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
      const double root = std::sqrt(double(k));
      const double eta = cfg.eta0 / root, beta = cfg.beta0 / root, gamma = cfg.gamma0 / root;
      const auto& prev = result.states;

      auto step = [&](std::size_t b) {
        WeightState s = prev[b];
        if (learn_alpha) {
          update_pi_inner(s, windows[b].psi, eta, catalog, cfg.projection);
          const Vec g = gamma_values(s, windows[b].psi);
          if (update_alpha(s, windows[b].self, g, cfg, beta)) resets[b] = 1;
        }
        if (learn_w) {
          update_w(s, prev[b].alpha, neighbor_alphas(b, prev, topology), windows[b].self, windows[b].cross, gamma,
                   cfg.b_coef);
        }
        s.iteration = k;
        next[b] = std::move(s);
      };

      if (exec == Execution::parallel) {
        COCACHE_OMP_PRAGMA("omp parallel for schedule(static)")
        for (long long b = 0; b < static_cast<long long>(M); ++b) step(std::size_t(b));
      } else {
        for (std::size_t b = 0; b < M; ++b) step(b);
      }

      double change = 0.0;
      for (std::size_t b = 0; b < M; ++b) change = std::max(change, max_change(prev[b], next[b]));
      result.states.swap(next);
      result.iterations = k;
      if (cfg.record_trace) record(k, result.states, objectives(result.states));
      if (change < cfg.tol) {
        result.converged = true;
        break;
      }
    }
    for (char r : resets) result.alpha_resets += std::size_t(r);
    if (result.alpha_resets)
      warn("alpha clipped to all-zero and was reset to uniform at " + std::to_string(result.alpha_resets) +
           " sBS(s)");
  } else {
    result.converged = true;
  }

  result.final_objective = objectives(result.states);
  result.strategies.resize(M);
  for (std::size_t b = 0; b < M; ++b)
    result.strategies[b] = blended_strategy(b, result.states, windows, topology, catalog);
  return result;
}

void write_iteration_trace(const std::vector<IterationRecord>& records, const std::filesystem::path& path) {
  std::size_t tau = 0, degree = 0;
  for (const auto& r : records) {
    tau = std::max(tau, r.alpha.size());
    degree = std::max(degree, r.w_neighbors.size());
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "iter,sbs,objective";
  for (std::size_t t = 0; t < tau; ++t) out << ",alpha_" << t;
  out << ",w_self";
  for (std::size_t j = 0; j < degree; ++j) out << ",w_" << j;
  out << '\n';
  for (const auto& r : records) {
    out << r.iter << ',' << r.sbs << ',' << r.objective;
    for (std::size_t t = 0; t < tau; ++t) {
      out << ',';
      if (t < r.alpha.size()) out << r.alpha[t];
    }
    out << ',' << r.w_self;
    for (std::size_t j = 0; j < degree; ++j) {
      out << ',';
      if (j < r.w_neighbors.size()) out << r.w_neighbors[j];
    }
    out << '\n';
  }
}

}  // namespace cocache
