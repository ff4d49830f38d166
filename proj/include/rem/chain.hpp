// chain.hpp
// Rates of the Metropolis chain X and the fast chain Y, exact continuous-time
// simulation of either, local times, clock processes and the time change
// X(t) = Y(S^{-1}(t)).
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rem/environment.hpp"
#include "rem/error.hpp"
#include "rem/hypercube.hpp"
#include "rem/rng.hpp"

namespace rem {

enum class RateModel { MetropolisX, FastY };

/// q_xy = (tau_x ^ tau_y) / (1 ^ tau_x) for Y, r_xy = 1 ^ tau_y / tau_x for X.
/// Computed from the cached weights; no adjacency check.
inline double rate_unchecked(RateModel m, const Environment& env, Vertex x, Vertex y) {
  const double tx = env.tau[x.code], ty = env.tau[y.code];
  const double q = std::min(tx, ty) / std::min(1.0, tx);
  return m == RateModel::FastY ? q : q / std::max(1.0, tx);
}

/// Throws ConfigError for a non-adjacent pair.
double rate(RateModel m, const Environment& env, Vertex x, Vertex y);

/// 1 v tau_x, the clock slope at x.
inline double clock_slope(const Environment& env, Vertex x) { return std::max(1.0, env.tau[x.code]); }

/// Conductance c_xy = nu_x q_xy = (tau_x ^ tau_y) / Z_N.
inline double conductance(const Environment& env, Vertex x, Vertex y) {
  return std::min(env.tau[x.code], env.tau[y.code]) / env.Z;
}

/// Max over edges of |w_x k(x,y) - w_y k(y,x)| / max(w_x k(x,y), w_y k(y,x))
/// with w = nu for Y and w = tau for X. The relative form keeps the check
/// meaningful when conductances span many orders of magnitude.
template <class RateFn>
double detailed_balance_residual(const Environment& env, const Eigen::VectorXd& weight, RateFn&& k) {
  double worst = 0.0;
  const int n = env.n();
  for (std::uint32_t x = 0; x < env.size(); ++x)
    for (int i = 0; i < n; ++i) {
      const Vertex vx(x), vy = vx.flipped(i);
      if (vy.code < x) continue;
      const double a = weight[vx.code] * k(vx, vy), b = weight[vy.code] * k(vy, vx);
      const double scale = std::max(std::abs(a), std::abs(b));
      if (scale > 0.0) worst = std::max(worst, std::abs(a - b) / scale);
    }
  return worst;
}

double detailed_balance_residual(const Environment& env, RateModel m);

/// Piecewise-constant path: states[i] occupies [jump_times[i-1], jump_times[i])
/// with jump_times[-1] = 0 and the last state held until the horizon.
struct Trajectory {
  std::vector<Vertex> states;
  std::vector<double> jump_times;
  double horizon = 0.0;
  bool truncated = false;

  double segment_start(std::size_t i) const { return i == 0 ? 0.0 : jump_times[i - 1]; }
  double segment_end(std::size_t i) const { return i < jump_times.size() ? jump_times[i] : horizon; }
};

inline constexpr std::uint64_t kDefaultJumpBudget = 100'000'000ULL;

/// Walker over one environment. Holding times are Exp(total exit rate) and the
/// successor is drawn proportionally to the rates; both use one stream.
class ChainSimulator {
 public:
  ChainSimulator(const Environment& env, RateModel model);

  const Environment& environment() const { return env_; }
  RateModel model() const { return model_; }
  /// Total exit rate at x.
  double exit_rate(Vertex x) const;
  /// Y_0 ~ nu by inverse CDF on the stored stationary vector.
  Vertex sample_stationary(Rng& rng) const;

  /// Draws the holding time at x and the next state.
  std::pair<double, Vertex> step(Vertex x, Rng& rng) const;

  /// Streams segments (vertex, t0, t1) with t1 <= horizon to visit. Returns
  /// the time reached, which is below the horizon only when the jump budget
  /// ran out.
  template <class Visit>
  double run(Vertex start, double horizon, Rng& rng, Visit&& visit,
             std::uint64_t jump_budget = kDefaultJumpBudget) const {
    double t = 0.0;
    Vertex x = start;
    for (std::uint64_t jumps = 0; jumps < jump_budget; ++jumps) {
      auto [hold, next] = step(x, rng);
      if (t + hold >= horizon) {
        visit(x, t, horizon);
        return horizon;
      }
      visit(x, t, t + hold);
      t += hold;
      x = next;
    }
    return t;
  }

  Trajectory simulate(Vertex start, double horizon, Rng& rng,
                      std::uint64_t jump_budget = kDefaultJumpBudget) const;

 private:
  const Environment& env_;
  RateModel model_;
  std::vector<double> cdf_;
};

/// Simulates from the given start or, if start is empty, from nu.
Trajectory simulate(const Environment& env, RateModel model, std::optional<Vertex> start, double horizon,
                    std::uint64_t traj_seed, std::uint64_t jump_budget = kDefaultJumpBudget);

/// Occupation times sorted by vertex code.
std::vector<std::pair<Vertex, double>> local_times(const Trajectory& traj);

/// S(t) = int_0^t (1 v tau_{Y_s}) ds, or S_D restricted to deep traps.
double clock(const Trajectory& traj, const Environment& env, bool deep_only, double t);

/// Evaluates both clocks on a sorted grid in one pass.
struct ClockValues {
  std::vector<double> S;
  std::vector<double> SD;
};
ClockValues clock_on_grid(const Trajectory& traj, const Environment& env, std::span<const double> grid);

/// X trajectory: same jump chain, holding time at x stretched by 1 v tau_x.
Trajectory time_change_reconstruct(const Trajectory& y, const Environment& env);

struct HitResult {
  double time = 0.0;
  Vertex vertex;
  bool censored = false;
  std::uint64_t jumps = 0;
};

/// First entrance time of the target set (0 when starting inside). With
/// return_time the clock starts only after the first jump, giving H^+.
HitResult hit(const ChainSimulator& sim, Vertex start, std::span<const std::uint8_t> targets, Rng& rng,
              std::uint64_t cap = kDefaultJumpBudget, bool return_time = false);

}  // namespace rem
