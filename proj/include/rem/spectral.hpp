// spectral.hpp
// Generator of the fast chain, its spectral gap (exact at small N, inverse
// iteration estimate above), the canonical-path Poincare bound, transition
// kernels by uniformization, and the strong stationary time sampler.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rem/environment.hpp"
#include "rem/hypercube.hpp"
#include "rem/linsolve.hpp"
#include "rem/rng.hpp"

namespace rem {

inline constexpr int kSparseBudgetN = 20;
inline constexpr int kDenseBudgetN = 12;
inline constexpr int kKernelBudgetN = 12;

using Generator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Q[x][y] = q_xy for neighbors, Q[x][x] = -sum_y q_xy.
Generator build_generator(const Environment& env, int budget_n = kSparseBudgetN);

struct GeneratorChecks {
  double max_row_sum = 0.0;
  /// max |S - S^T| / max|S| for S = D^{1/2} Q D^{-1/2}.
  double symmetry_residual = 0.0;
  /// ||nu Q||_inf.
  double stationarity = 0.0;
};
GeneratorChecks check_generator(const Generator& q, const Eigen::VectorXd& nu);

/// D^{1/2} (-Q) D^{-1/2} built directly from conductances, so it is symmetric
/// bit for bit.
Eigen::MatrixXd symmetrized_dense(const Environment& env);

/// Smallest nonzero eigenvalue of -Q. Throws BudgetError above the dense budget
/// and ViolationError when the zero eigenvalue is not resolved.
double exact_gap(const Environment& env, int budget_n = kDenseBudgetN);

struct GapEstimate {
  double lambda = 0.0;
  int iterations = 0;
  /// Relative change of the Rayleigh quotient in the last iteration.
  double change = 0.0;
};

/// Inverse iteration on L w = nu v with nu-centred iterates and a Rayleigh
/// quotient D(w,w)/Var_nu(w). An estimate: it converges to the gap from above.
GapEstimate estimate_gap(const Environment& env, int iterations, std::uint64_t seed, double tolerance = 1e-8,
                         const SolveOptions& opt = {});

/// Paths avoid vertices with tau < N^{-beta C0}.
std::vector<std::uint8_t> path_good_flags(const Environment& env);

struct PoincareResult {
  double bound = 0.0;
  /// Edge attaining the maximum of congestion / conductance.
  Vertex edge_u;
  int edge_bit = 0;
};

PoincareResult poincare_bound(const Environment& env, const PathSet& paths);

/// Interior edges {u,v} of randomly sampled canonical paths with
/// tau_u ^ tau_v < N^{-beta C0}; nonzero counts mean the path lemma's
/// environment events failed for this draw.
std::size_t count_interior_violations(const Environment& env, std::size_t pairs, std::uint64_t seed);

/// e^{tQ} by uniformization. The base step has Lambda t / 2^s <= 1 with the
/// Poisson series cut once its remaining mass is below 1e-17; the result is
/// then squared s times, renormalizing rows after each squaring.
Eigen::MatrixXd transition_kernel(const Environment& env, double t, int budget_n = kKernelBudgetN);

/// max_{x,y} |P[x][y] - nu_y|.
double mix_defect(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& nu);
/// max_x TV(P[x,.], nu).
double max_tv(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& nu);

/// min_{x,y} P[x][y] / ((1 - e^{-1}) nu_y); the minorization holds when >= 1.
double minorization_ratio(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& nu);

struct MixSample {
  double t_mix = 0.0;
  int blocks = 0;
  Vertex end_state;
};

/// Strong stationary time built from a block kernel P = e^{mQ} satisfying the
/// minorization: after each block, accept with probability
/// (1 - e^{-1}) nu_y / P[z][y].
class StrongStationarySampler {
 public:
  StrongStationarySampler(Eigen::MatrixXd kernel, Eigen::VectorXd nu, double block);

  double block() const { return block_; }
  double minorization() const { return ratio_; }
  MixSample sample(Vertex start, Rng& rng, int max_blocks = 10000) const;
  /// Acceptance probability after a block that went from z to y. Lets a caller
  /// run the chain itself and stop it at a strong stationary time.
  double acceptance(Vertex z, Vertex y) const {
    return (1.0 - std::exp(-1.0)) * nu_[y.code] / kernel_(z.code, y.code);
  }
  const Eigen::MatrixXd& kernel() const { return kernel_; }

 private:
  Eigen::MatrixXd kernel_;
  Eigen::MatrixXd cdf_;
  Eigen::VectorXd nu_;
  double block_;
  double ratio_;
};

struct MixingBlock {
  double base = 0.0;
  int multiple = 0;
  double block = 0.0;
  Eigen::MatrixXd kernel;
};

/// Smallest k <= max_multiple such that e^{k base Q} satisfies the minorization.
MixingBlock find_mixing_block(const Environment& env, double base, int max_multiple = 64,
                              int budget_n = kKernelBudgetN);

/// Sufficient block length from a gap value:
/// 4 (1 + log(1/nu_min) / 2) / lambda gives s(block) <= e^{-1}.
double spectral_mixing_block(const Environment& env, double lambda);

struct SpectralReport {
  int n = 0;
  double beta = 0.0;
  double alpha = 0.0;
  std::uint64_t env_seed = 0;
  std::optional<double> lambda_exact;
  std::optional<double> lambda_power_estimate;
  double poincare_lower = 0.0;
  double m_N = 0.0;
  double log_m_N = 0.0;
  std::optional<double> m_star;
  bool bound_below_gap = true;
};

}  // namespace rem
