// analysis.hpp
// The aging pipeline: the stable constant K, the deep-trap Laplace functional
// theta, the random scale R_N, the local-time functional L_N, clock-process
// Laplace transforms (quenched and quasi-annealed), the shallow remainder, and
// the reference stable subordinator.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rem/chain.hpp"
#include "rem/environment.hpp"
#include "rem/linsolve.hpp"
#include "rem/rng.hpp"
#include "rem/spectral.hpp"

namespace rem {

// ---------------------------------------------------------------------------
// Constant K = alpha beta int e^{-alpha beta z} (1 - e^{-e^{beta z}}) dz.

struct KConstantReport {
  double alpha = 0.0;
  double beta = 0.0;
  /// The integral C, body plus both analytic tails.
  double integral_C = 0.0;
  double left_tail = 0.0;
  double right_tail = 0.0;
  double error_estimate = 0.0;
  double K_quadrature = 0.0;
  /// Gamma(1 - alpha), from the substitution w = e^{beta z}.
  double K_closed_form = 0.0;
};

KConstantReport constant_K(double alpha, double beta);
double constant_K_closed(double alpha);

// ---------------------------------------------------------------------------
// theta(u) = 1 - E[exp(-(lambda/g_N) u e^{beta sqrt(N) E})] with E a standard
// Gaussian conditioned on exceeding the deep threshold.

struct ThetaValue {
  double direct = 0.0;
  /// K 2^{(gamma'-gamma)N} lambda^alpha u^alpha.
  double asymptotic = 0.0;
  /// Lower limit of the z integral, (log g' - log g + log lambda + log u) / beta.
  double omega = 0.0;
};

ThetaValue theta_function(double u, double lambda, const Scales& s);

// ---------------------------------------------------------------------------
// Stable reference.

/// One-sided alpha-stable variable with E[e^{-lambda V}] = e^{-lambda^alpha}.
double sample_one_sided_stable(double alpha, Rng& rng);

/// Rows are independent paths of V with E[e^{-lambda V(t)}] = e^{-K lambda^alpha t},
/// evaluated on the increasing grid.
Eigen::MatrixXd simulate_stable_subordinator(double alpha, double K, std::span<const double> t_grid,
                                             std::uint64_t seed, std::size_t n);

// ---------------------------------------------------------------------------
// Mixing horizon used inside R_N.

/// Either a strong stationary time from a block kernel (kernel budget
/// permitting) or the surrogate K * block with K ~ Geometric(1 - e^{-1}) on
/// {1, 2, ...}, the tail law the strong stationary time has.
struct MixingHorizon {
  bool surrogate = true;
  double block = 0.0;
  std::optional<StrongStationarySampler> sst;
  /// Gap value the block was derived from, if any.
  std::optional<double> lambda;
};

/// N <= kernel budget: exact gap, base block 1/(8 lambda) and the smallest
/// multiple satisfying the minorization. Above: block from an inverse
/// iteration gap estimate, or the supplied block.
MixingHorizon plan_mixing_horizon(const Environment& env, std::optional<double> block, std::uint64_t seed,
                                  int gap_iterations = 30, const SolveOptions& opt = {});

struct HorizonSample {
  /// ell_{T}(x) and ell_{2T}(x) for the sampled horizon T.
  double local = 0.0;
  double local_doubled = 0.0;
  double horizon = 0.0;
  std::uint64_t jumps = 0;
};

/// Runs Y from x up to the mixing horizon (and on to twice it) recording the
/// local time at x.
HorizonSample sample_local_time_to_mix(const ChainSimulator& sim, const MixingHorizon& mh, Vertex x, Rng& rng,
                                       std::uint64_t jump_budget = kDefaultJumpBudget);

// ---------------------------------------------------------------------------
// R_N = 2^{(gamma-gamma')N} (sum_{x in D} E_x[ell_{T_mix}(x)^alpha] / E_nu[H_x])^{-1}.

struct RnConfig {
  std::size_t samples_per_trap = 400;
  /// Deep traps entering the sum; 0 uses all. A uniform subset is scaled up
  /// by |D| / count, which keeps the sum unbiased.
  std::size_t max_traps = 0;
  /// Fixes the mixing block instead of planning it.
  std::optional<double> block;
  int gap_iterations = 30;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  SolveOptions solve;
  std::uint64_t jump_budget = kDefaultJumpBudget;
};

struct TrapTerm {
  Vertex x;
  double e_nu_h = 0.0;
  double ell_alpha = 0.0;
  double ell_alpha_se = 0.0;
  double ell_alpha_doubled = 0.0;
  int solver_iterations = 0;
};

struct RnEstimate {
  double R_N = 0.0;
  double log_R_N = 0.0;
  /// R_N with every horizon doubled (sensitivity to the mixing surrogate).
  double R_N_doubled = 0.0;
  /// Relative standard error of the Monte Carlo sum (trap sampling excluded).
  double relative_se = 0.0;
  bool surrogate = false;
  double block = 0.0;
  std::optional<double> lambda;
  std::size_t deep_count = 0;
  std::size_t traps_used = 0;
  std::vector<TrapTerm> terms;
};

/// Throws ConfigError when the deep set is empty.
RnEstimate estimate_RN(const Environment& env, const RnConfig& cfg);

/// The formula itself, for hand-built terms.
double rn_from_terms(const Scales& s, std::span<const TrapTerm> terms, double scale = 1.0);

// ---------------------------------------------------------------------------
// nu-started trajectories observed on t R_N.

struct AgingConfig {
  std::vector<double> t_grid{0.25, 0.5, 1.0};
  std::vector<double> lambda_grid{0.5, 1.0, 2.0};
  std::size_t n_traj = 1000;
  std::size_t n_env = 1;
  std::size_t n_resample = 200;
  /// Trajectories run to horizon_multiple * max(t) * R_N.
  double horizon_multiple = 1.0;
  std::uint64_t jump_budget = kDefaultJumpBudget;
};

void validate_aging_config(const AgingConfig& c);

/// One trajectory's observables at each grid time t (scaled by R_N and g_N).
struct AgingSample {
  std::vector<double> S;
  std::vector<double> SD;
  std::vector<double> L;
  /// Very-shallow part of (S - S_D) / g_N.
  std::vector<double> very_shallow;
  /// Slice contributions to (S - S_D) / g_N at the last grid time; entry 0
  /// collects the very-shallow set.
  std::vector<double> slice_share;
  /// Deep local times at the last grid time, sorted by vertex.
  std::vector<std::pair<Vertex, double>> deep_local;
  std::uint64_t jumps = 0;
  bool truncated = false;
};

/// Dense index of deep traps plus slice labels, shared by all trajectories.
struct TrapIndex {
  std::vector<std::int32_t> deep_slot;
  std::vector<int> slice;
  int slice_count = 0;
  explicit TrapIndex(const Environment& env);
};

AgingSample run_aging_trajectory(const ChainSimulator& sim, const TrapIndex& index, double R_N,
                                 std::span<const double> t_grid, Rng& rng,
                                 std::uint64_t jump_budget = kDefaultJumpBudget);

/// n nu-started trajectories, trajectory i seeded by derive_seed(seed, {i}).
std::vector<AgingSample> run_aging(const Environment& env, double R_N, std::span<const double> t_grid,
                                   std::size_t n, std::uint64_t seed, unsigned threads,
                                   std::uint64_t jump_budget = kDefaultJumpBudget);

struct LaplaceCell {
  double t = 0.0;
  double lambda = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  double theory = 0.0;
};

struct LaplaceReport {
  double K = 0.0;
  double R_N = 0.0;
  double g_N = 0.0;
  std::vector<LaplaceCell> cells;
  const LaplaceCell* find(double t, double lambda) const;
};

/// Empirical mean of exp(-lambda S_D(t R_N) / g_N) against exp(-K lambda^alpha t).
LaplaceReport empirical_laplace(std::span<const AgingSample> samples, std::span<const double> t_grid,
                                std::span<const double> lambda_grid, double alpha, double R_N, double g_N);

struct LNReport {
  double R_N = 0.0;
  std::vector<double> t;
  std::vector<std::vector<double>> samples;
  std::vector<double> mean;
  std::vector<double> variance;
};

LNReport local_time_functional(std::span<const AgingSample> samples, std::span<const double> t_grid, double R_N);

struct ShallowReport {
  std::vector<double> t;
  std::vector<double> median;
  std::vector<double> mean;
  std::vector<double> min;
  std::vector<double> very_shallow_mean;
  /// (t R_N / g_N) h_N 2^N / Z_N.
  std::vector<double> very_shallow_bound;
  /// Mean per slice at the last grid time, entry 0 the very-shallow set.
  std::vector<double> slice_mean;
};

ShallowReport shallow_contribution(const Environment& env, std::span<const AgingSample> samples,
                                   std::span<const double> t_grid, double R_N);

// ---------------------------------------------------------------------------
// Quasi-annealed Laplace transform.

struct QuasiTrajectory {
  /// Mean over E-bar redraws of exp(-lambda sum ell_x tau_x / g_N).
  double empirical = 0.0;
  double se = 0.0;
  /// prod_x (1 - theta(ell_x)).
  double predicted = 0.0;
  double z = 0.0;
  std::size_t deep_visited = 0;
  double L = 0.0;
};

struct QuasiAnnealedReport {
  SeparationReport separation;
  double t = 0.0;
  double lambda = 0.0;
  double R_N = 0.0;
  std::vector<QuasiTrajectory> trajectories;
  /// Average over both loops.
  double estimate = 0.0;
  double estimate_se = 0.0;
  double predicted_mean = 0.0;
  /// exp(-K lambda^alpha mean L_N(t)) with a delta-method error.
  double stable_form = 0.0;
  double stable_form_se = 0.0;
  std::size_t within_3se = 0;
  double max_abs_z = 0.0;
};

/// Refuses (ViolationError) when two deep traps are neighbors.
QuasiAnnealedReport quasi_annealed_laplace(const TwoStepEnvironment& e, double R_N, double t, double lambda,
                                           std::size_t n_traj, std::size_t n_resample, std::uint64_t seed,
                                           unsigned threads, std::uint64_t jump_budget = kDefaultJumpBudget);

/// Number of edges whose Y rate differs between two environments (exact comparison).
std::size_t rate_mismatches(const Environment& a, const Environment& b);

// ---------------------------------------------------------------------------
// Increments, visits and hitting times.

struct IncrementReport {
  std::vector<double> lambda;
  /// E[exp(-sum_i lambda_i Delta_i / g_N)] and prod_i E[exp(-lambda_i Delta_i / g_N)].
  double joint = 0.0;
  double product = 0.0;
  double combined_se = 0.0;
  std::vector<double> marginal;
  /// KS p-value between the first two increments when their lengths agree.
  std::optional<double> stationarity_p;
};

/// Increments of S_D between consecutive grid times (starting at 0), each
/// weighted by its own lambda.
IncrementReport increments_check(std::span<const AgingSample> samples, std::span<const double> t_grid,
                                 std::span<const double> lambdas);

struct VisitCounterReport {
  double mean = 0.0;
  double se = 0.0;
  std::size_t max = 0;
  std::size_t deep_count = 0;
};

/// Distinct other deep traps hit before the horizon, starting from x.
VisitCounterReport deep_visit_counter(const Environment& env, Vertex x, double horizon, std::size_t n,
                                      std::uint64_t seed, std::uint64_t jump_budget = kDefaultJumpBudget);

struct ExponentialityReport {
  Vertex x;
  double e_nu_h = 0.0;
  double lambda = 0.0;
  std::vector<double> t;
  std::vector<double> survival;
  double sup_deviation = 0.0;
  /// 1 / (lambda E_nu[H_x]).
  double bound = 0.0;
  bool holds = false;
};

/// Exact P_nu[H_x > t] from the killed generator (dense, N <= dense budget).
ExponentialityReport hitting_exponentiality(const Environment& env, Vertex x, double lambda, int points = 50,
                                            int budget_n = kDenseBudgetN);

}  // namespace rem
