#pragma once

#include <filesystem>
#include <vector>

#include "cocache/catalog.hpp"
#include "cocache/discrepancy.hpp"
#include "cocache/parallel.hpp"
#include "cocache/regret.hpp"
#include "cocache/strategy.hpp"

namespace cocache {

// Sign of the |alpha - 1/tau| term. `penalize` pulls alpha toward uniform;
// `literal` flips the sign and rewards deviation.
enum class PenaltySign { penalize, literal };

// Demand basis for neighbor strategies inside the mismatch estimate.
enum class MismatchBasis { local, literal };

enum class AlphaMode { optimize, uniform };
enum class NeighborWeightMode { optimize, uniform, self_only };

struct OptimizerConfig {
  double a = 7.0;       // discrepancy scale
  double b_coef = 1.0;  // mismatch scale
  double lambda = 1.0;  // alpha-deviation coefficient
  double eta0 = 1.0;
  double beta0 = 0.01;
  double gamma0 = 0.4;
  std::size_t max_iters = 500;
  double tol = 1e-4;
  PenaltySign penalty_sign = PenaltySign::penalize;
  MismatchBasis mismatch_basis = MismatchBasis::local;
  ProjectionMode projection = ProjectionMode::only_if_exceeded;
  AlphaMode alpha_mode = AlphaMode::optimize;
  NeighborWeightMode w_mode = NeighborWeightMode::optimize;
  bool record_trace = false;

  void validate() const;
};

/// Iterate of one sBS. w_neighbors[j] belongs to the j-th entry of the
/// topology's (sorted) neighbor list.
struct WeightState {
  Vec alpha;
  double w_self = 1.0;
  Vec w_neighbors;
  std::vector<Vec> pi_inner;  // discrepancy-ascent iterates, one per window slot
  std::size_t iteration = 0;

  bool operator==(const WeightState&) const = default;
};

/// Everything sBS b knows about the current window after the neighbor exchange.
struct SbsWindow {
  std::vector<CachingStrategy> regret_strategies;  // own pi^R, one per window slot
  PsiTable psi;
  HitMatrix self;                        // own strategies on own (normalized) demand
  std::vector<HitMatrix> cross;          // neighbor strategies on own demand
  std::vector<HitMatrix> neighbor_own;   // neighbor strategies on their own demand (literal mismatch only)
};

struct WindowSpec {
  std::size_t T = 0;
  std::size_t tau = 10;
  std::size_t tau1 = 5;
  std::size_t tau2 = 5;
  RegretMode regret_mode = RegretMode::per_slot_opt;
  bool literal_mismatch = false;  // also fill neighbor_own
};

/// Every sBS's window for the boundary after slot spec.T on normalized
/// demand: own regret strategies, psi and self hits, then the exchange of
/// regret strategies and the cross hit matrices.
std::vector<SbsWindow> build_windows(const DemandTrace& trace, const Catalog& catalog, const Topology& topology,
                                     const WindowSpec& spec, Execution exec = Execution::parallel);

WeightState init_state(const Catalog& catalog, std::size_t tau, std::size_t n_neighbors);

/// Gamma_t = sum_f pi_inner[t][f] * Psi[t][f].
Vec gamma_values(const WeightState& state, const PsiTable& psi);

/// One signed ascent step on |sum_t alpha_t Gamma_t| followed by a budget
/// projection of every slot iterate.
void update_pi_inner(WeightState& state, const PsiTable& psi, double eta, const Catalog& catalog,
                     ProjectionMode mode = ProjectionMode::only_if_exceeded);

/// Per-coordinate alpha step
///   alpha_t += beta [ H[t][t] - 2a|Gamma_t| +/- lambda * g_t - b * (2/tau) W sum_l H[l][t] ]
/// with g_t = 1{alpha_t < 1/tau} - 1{alpha_t >= 1/tau} and W the total
/// neighbor weight, then clip at zero and renormalize. Returns true when the
/// clipped vector was all zero and alpha was reset to uniform.
bool update_alpha(WeightState& state, const HitMatrix& self, std::span<const double> gamma,
                  const OptimizerConfig& cfg, double beta);

/// Neighbor weight step, clip at zero, then the self-weight normalization:
/// if the neighbor weights sum below one the self weight takes the rest,
/// otherwise the self weight is zero and the neighbors are rescaled.
void update_w(WeightState& state, std::span<const double> alpha_self, const std::vector<Vec>& alpha_neighbors,
              const HitMatrix& self, const std::vector<HitMatrix>& cross, double gamma, double b_coef = 1.0);

void normalize_neighbor_weights(WeightState& state);

/// sum_t alpha_t H[t][t] - a D_sup(alpha) - b M(w) -/+ lambda ||alpha - u||_1.
double surrogate_objective(const WeightState& state, const std::vector<Vec>& neighbor_alphas,
                           const SbsWindow& window, const Catalog& catalog, const OptimizerConfig& cfg);

double mismatch_for(const WeightState& state, const std::vector<Vec>& neighbor_alphas, const SbsWindow& window,
                    MismatchBasis basis);

struct IterationRecord {
  std::size_t iter = 0;
  std::size_t sbs = 0;
  double objective = 0.0;
  Vec alpha;
  double w_self = 0.0;
  Vec w_neighbors;
};

struct SubroutineResult {
  std::vector<WeightState> states;
  std::vector<CachingStrategy> strategies;  // blended placement per sBS
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t alpha_resets = 0;
  Vec initial_objective;  // per sBS
  Vec final_objective;
  std::vector<IterationRecord> trace;  // filled when cfg.record_trace
};

/// Runs the weight iterations for every sBS in lockstep: iteration k reads
/// only the iteration k-1 states of all sBSs, so the result is a
/// deterministic function of the inputs. Stops when the largest change in
/// any alpha or w coordinate drops below cfg.tol or at cfg.max_iters.
SubroutineResult run_subroutine(const std::vector<SbsWindow>& windows, const Topology& topology,
                                const Catalog& catalog, const OptimizerConfig& cfg,
                                Execution exec = Execution::parallel);

/// w_self * sum_t alpha_t pi^R_t + sum_j w_j * sum_t alpha_j,t pi^R_j,t,
/// projected back into the feasible set.
CachingStrategy blended_strategy(std::size_t b, const std::vector<WeightState>& states,
                                 const std::vector<SbsWindow>& windows, const Topology& topology,
                                 const Catalog& catalog);

void write_iteration_trace(const std::vector<IterationRecord>& records, const std::filesystem::path& path);

}  // namespace cocache
