// potential.hpp
// Potential theory of the fast chain: Dirichlet form, equilibrium potentials,
// effective conductances, mean hitting times and their extremal
// characterization, and the sphere/conductance bounds around deep traps.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rem/environment.hpp"
#include "rem/linsolve.hpp"

namespace rem {

/// sum over edges of c_zy (g(z) - g(y))^2.
template <class Derived>
double dirichlet_form(const Eigen::MatrixBase<Derived>& g, const Environment& env) {
  const int n = env.n();
  double sum = 0.0;
  for (std::uint32_t z = 0; z < env.size(); ++z)
    for (int i = 0; i < n; ++i) {
      const std::uint32_t y = z ^ (std::uint32_t{1} << i);
      if (y < z) continue;
      const double d = g[z] - g[y];
      sum += std::min(env.tau[z], env.tau[y]) * d * d;
    }
  return sum / env.Z;
}

/// Mask with 1 on the listed vertices.
std::vector<std::uint8_t> vertex_mask(const Environment& env, std::span<const Vertex> set);

struct PotentialField {
  Eigen::VectorXd values;
  Vertex source;
  std::vector<std::uint8_t> sink;
  /// max over free y of |g(y) - sum_z p_yz g(z)|.
  double harmonic_residual = 0.0;
  SolveStats stats;
};

/// g*_{x,B}: 1 at x, 0 on B, harmonic elsewhere.
PotentialField equilibrium_potential(const Environment& env, Vertex x, std::span<const std::uint8_t> sink,
                                     const SolveOptions& opt = {});

struct ConductanceRoutes {
  /// D(g*, g*).
  double dirichlet = 0.0;
  /// sum_{y ~ x} c_xy (1 - g*(y)) = c_x P_x[H_x^+ > H_B].
  double escape = 0.0;
  double relative_gap = 0.0;
  double value() const { return dirichlet; }
};

ConductanceRoutes effective_conductance(const Environment& env, const PotentialField& g);
ConductanceRoutes effective_conductance(const Environment& env, Vertex x, std::span<const std::uint8_t> sink,
                                        const SolveOptions& opt = {});

struct HittingSolution {
  Vertex target;
  /// h(y) = E_y[H_x].
  Eigen::VectorXd h;
  double e_nu = 0.0;
  /// |D(h,h) / E_nu[H_x] - 1|.
  double dirichlet_residual = 0.0;
  /// max over y != x of |(L h)(y) / nu_y - 1|, the generator equation Q h = -1.
  double generator_residual = 0.0;
  SolveStats stats;
};

HittingSolution mean_hitting_exact(const Environment& env, Vertex x, const SolveOptions& opt = {});

struct ExtremalReport {
  double e_nu = 0.0;
  /// |D(g) E_nu[H_x] - 1| for the minimizer g(y) = Z_yx / Z_xx.
  double residual = 0.0;
  int random_trials = 0;
  int violations = 0;
  /// min over trials of D(g~) E_nu[H_x] - 1 (should be >= 0).
  double min_random_excess = 0.0;
  /// D(g + eps v) - D(g) for a tangent perturbation v (should be > 0).
  double perturbation_increase = 0.0;
};

Eigen::VectorXd extremal_minimizer(const HittingSolution& hs);

/// Column Z_{.x} of the fundamental matrix, int_0^inf (P_t(., x) - nu_x) dt,
/// summed term by term over the uniformized kernel (each Poisson weight
/// integrates to 1 / Lambda). Cross-check only; stops once the defect of
/// K^j e_x drops below 1e-12.
Eigen::VectorXd fundamental_column_by_kernel(const Environment& env, Vertex x, int budget_n = 6,
                                             std::uint64_t max_terms = 50'000'000ULL);
/// Affine projection of g onto {g(x) = 1, sum_y nu_y g(y) = 0} by shifting
/// the values off x by a constant.
Eigen::VectorXd project_admissible(Eigen::VectorXd g, const Environment& env, Vertex x);
ExtremalReport extremal_check(const Environment& env, const HittingSolution& hs, int random_count,
                              std::uint64_t seed);

struct AppendixBound {
  std::size_t sink_size = 0;
  double conductance = 0.0;
  ConductanceRoutes routes;
  double nu_sink = 0.0;
  double e_nu = 0.0;
  /// C(x -> B) nu(B)^{-2} - 1 / E_nu[H_x].
  double slack = 0.0;
  /// (1 - nu_x) / (lambda_Y nu_x) - E_nu[H_x], when the gap is supplied.
  std::optional<double> spectral_slack;
};

AppendixBound bound_check_appendix(const Environment& env, const HittingSolution& hs,
                                   std::span<const std::uint8_t> sink, std::optional<double> lambda = {},
                                   const SolveOptions& opt = {});

/// Smallest r in [1, ceil(N^{3 delta})] whose sphere has every
/// tau_y <= 2^{N^{1-delta}/2}.
std::optional<int> good_sphere_radius(const Environment& env, Vertex x);

struct DeepTrapBound {
  Vertex x;
  int radius = 0;
  std::size_t ball_size = 0;
  /// C(x -> A_x^c) from the equilibrium potential.
  double exact = 0.0;
  /// Parallel-law bound: sum of conductances across the ball boundary.
  double parallel_bound = 0.0;
  /// nu_x / C(x -> A_x^c), which is (Z_N C)^{-1} when tau_x >= 1.
  double mean_exit_local_time = 0.0;
};

/// Empty when x has no good sphere.
std::optional<DeepTrapBound> deep_trap_conductance_bound(const Environment& env, Vertex x,
                                                         const SolveOptions& opt = {});

/// Local time at x before leaving the ball B(x, radius), one sample.
double sample_exit_local_time(const Environment& env, Vertex x, int radius, std::uint64_t seed);

}  // namespace rem
