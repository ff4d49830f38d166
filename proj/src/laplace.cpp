// laplace.cpp
// theta, Laplace transforms of the deep clock and their quasi-annealed form.
#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rem/analysis.hpp"
#include "rem/error.hpp"
#include "rem/gaussian.hpp"
#include "rem/parallel.hpp"
#include "rem/stats.hpp"

namespace rem {

ThetaValue theta_function(double u, double lambda, const Scales& s) {
  if (!(lambda > 0.0)) throw ConfigError("theta: lambda must be positive");
  if (u < 0.0) throw ConfigError("theta: u must be nonnegative");
  ThetaValue v;
  if (u == 0.0) {
    v.omega = -std::numeric_limits<double>::infinity();
    return v;
  }
  const double beta = s.beta;
  const double rn = std::sqrt(static_cast<double>(s.n));
  const double shift = s.log_g - std::log(lambda) - std::log(u);
  const double theta = s.energy_threshold();
  const double log_sf_theta = gaussian::log_sf(theta);
  v.omega = (s.log_g_prime - s.log_g + std::log(lambda) + std::log(u)) / beta;
  v.asymptotic = constant_K_closed(s.alpha) * s.epsilon_n() * std::pow(lambda * u, s.alpha);

  // s(z) = (beta z + log g - log lambda - log u) / (beta sqrt N) maps z = omega to theta.
  auto energy = [&](double z) { return (beta * z + shift) / (beta * rn); };
  // Above z_cut the factor 1 - exp(-e^{beta z}) equals 1 to double precision
  // and the rest of the integral is a Gaussian tail ratio.
  const double z_cut = std::log(50.0) / beta;
  if (v.omega >= z_cut) {
    v.direct = 1.0;
    return v;
  }
  auto f = [&](double z) {
    const double e = energy(z);
    return std::exp(gaussian::log_pdf(e) - log_sf_theta) * -std::expm1(-std::exp(beta * z));
  };
  const double tail = std::exp(gaussian::log_sf(energy(z_cut)) - log_sf_theta);
  // The integrand decays at least like e^{beta (1 - alpha') z} to the left;
  // below z_cut - 80 / beta it is under e^{-80 (1 - alpha')} of its peak.
  const double lo = std::max(v.omega, z_cut - 80.0 / beta);
  double body = 0.0;
  const double piece = 5.0 / beta;
  for (double a = lo; a < z_cut; a += piece) {
    const double b = std::min(a + piece, z_cut);
    body += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
  }
  v.direct = std::min(1.0, body / rn + tail);
  return v;
}

const LaplaceCell* LaplaceReport::find(double t, double lambda) const {
  for (const auto& c : cells)
    if (std::abs(c.t - t) < 1e-12 && std::abs(c.lambda - lambda) < 1e-12) return &c;
  return nullptr;
}

LaplaceReport empirical_laplace(std::span<const AgingSample> samples, std::span<const double> t_grid,
                                std::span<const double> lambda_grid, double alpha, double R_N, double g_N) {
  if (samples.empty()) throw ConfigError("empirical_laplace: no trajectories");
  LaplaceReport rep;
  rep.K = constant_K_closed(alpha);
  rep.R_N = R_N;
  rep.g_N = g_N;
  std::vector<double> vals(samples.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j)
    for (double lambda : lambda_grid) {
      for (std::size_t i = 0; i < samples.size(); ++i) vals[i] = std::exp(-lambda * samples[i].SD[j]);
      LaplaceCell c;
      c.t = t_grid[j];
      c.lambda = lambda;
      c.empirical = stats::summarize(vals).mean;
      c.se = stats::batch_means_se(vals);
      c.theory = std::exp(-rep.K * std::pow(lambda, alpha) * c.t);
      rep.cells.push_back(c);
    }
  return rep;
}

std::size_t rate_mismatches(const Environment& a, const Environment& b) {
  if (a.size() != b.size()) throw ConfigError("rate_mismatches: dimensions differ");
  std::size_t bad = 0;
  for (std::uint32_t x = 0; x < a.size(); ++x)
    for (int i = 0; i < a.n(); ++i) {
      const Vertex vx(x), vy = vx.flipped(i);
      if (rate_unchecked(RateModel::FastY, a, vx, vy) != rate_unchecked(RateModel::FastY, b, vx, vy)) ++bad;
    }
  return bad;
}

QuasiAnnealedReport quasi_annealed_laplace(const TwoStepEnvironment& e, double R_N, double t, double lambda,
                                           std::size_t n_traj, std::size_t n_resample, std::uint64_t seed,
                                           unsigned threads, std::uint64_t jump_budget) {
  QuasiAnnealedReport rep;
  rep.separation = check_separation(e.env);
  if (rep.separation.min_distance < 2)
    throw ViolationError("quasi_annealed_laplace: deep traps at distance " +
                         std::to_string(rep.separation.min_distance) +
                         "; the jump law of Y depends on their energies");
  if (n_traj == 0 || n_resample < 2) throw ConfigError("quasi_annealed_laplace: need trajectories and >= 2 redraws");
  rep.t = t;
  rep.lambda = lambda;
  rep.R_N = R_N;
  const Scales& s = e.env.scales;
  const std::vector<double> grid{t};
  const std::vector<AgingSample> runs = run_aging(e.env, R_N, grid, n_traj, derive_seed(seed, {0}), threads,
                                                  jump_budget);

  // sum_r v_ir and sum_r v_ir^2 per trajectory, streaming over redraws.
  std::vector<double> sum(n_traj, 0.0), sum2(n_traj, 0.0);
  const double scale = lambda / s.g();
  for (std::size_t r = 0; r < n_resample; ++r) {
    const TwoStepEnvironment redraw = resample_deep_energies(e, derive_seed(seed, {1, r}));
    for (std::size_t i = 0; i < n_traj; ++i) {
      double acc = 0.0;
      for (const auto& [x, ell] : runs[i].deep_local) acc += ell * redraw.env.tau[x.code];
      const double v = std::exp(-scale * acc);
      sum[i] += v;
      sum2[i] += v * v;
    }
  }
  const auto nr = static_cast<double>(n_resample);
  std::vector<double> traj_means(n_traj), Ls(n_traj);
  rep.trajectories.resize(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) {
    QuasiTrajectory& q = rep.trajectories[i];
    q.empirical = sum[i] / nr;
    const double var = std::max(0.0, (sum2[i] - nr * q.empirical * q.empirical) / (nr - 1.0));
    q.se = std::sqrt(var / nr);
    q.predicted = 1.0;
    for (const auto& [x, ell] : runs[i].deep_local) {
      if (ell <= 0.0) continue;
      ++q.deep_visited;
      q.predicted *= 1.0 - theta_function(ell, lambda, s).direct;
    }
    const double diff = q.empirical - q.predicted;
    q.z = q.se > 0.0 ? diff / q.se : (std::abs(diff) < 1e-12 ? 0.0 : std::copysign(INFINITY, diff));
    q.L = runs[i].L[0];
    if (std::abs(q.z) <= 3.0) ++rep.within_3se;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(q.z));
    traj_means[i] = q.empirical;
    Ls[i] = q.L;
  }
  const auto m = stats::summarize(traj_means);
  rep.estimate = m.mean;
  rep.estimate_se = m.std_error;
  rep.predicted_mean = 0.0;
  for (const auto& q : rep.trajectories) rep.predicted_mean += q.predicted / static_cast<double>(n_traj);
  const auto l = stats::summarize(Ls);
  const double k = constant_K_closed(s.alpha) * std::pow(lambda, s.alpha);
  rep.stable_form = std::exp(-k * l.mean);
  rep.stable_form_se = rep.stable_form * k * l.std_error;
  return rep;
}

IncrementReport increments_check(std::span<const AgingSample> samples, std::span<const double> t_grid,
                                 std::span<const double> lambdas) {
  if (t_grid.size() < 2) throw ConfigError("increments_check: need at least two grid points");
  if (lambdas.size() != t_grid.size()) throw ConfigError("increments_check: one lambda per increment");
  IncrementReport rep;
  rep.lambda.assign(lambdas.begin(), lambdas.end());
  const std::size_t k = t_grid.size(), n = samples.size();
  std::vector<std::vector<double>> inc(k, std::vector<double>(n));
  std::vector<double> joint(n);
  for (std::size_t i = 0; i < n; ++i) {
    double prev = 0.0, expo = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      inc[j][i] = samples[i].SD[j] - prev;
      prev = samples[i].SD[j];
      expo += lambdas[j] * inc[j][i];
    }
    joint[i] = std::exp(-expo);
  }
  const auto js = stats::summarize(joint);
  rep.joint = js.mean;
  rep.product = 1.0;
  std::vector<double> ses(k);
  std::vector<double> vals(n);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) vals[i] = std::exp(-lambdas[j] * inc[j][i]);
    const auto ms = stats::summarize(vals);
    rep.marginal.push_back(ms.mean);
    ses[j] = ms.std_error;
    rep.product *= ms.mean;
  }
  double var = js.std_error * js.std_error;
  for (std::size_t j = 0; j < k; ++j) {
    const double d = rep.marginal[j] > 0.0 ? rep.product / rep.marginal[j] : 0.0;
    var += d * d * ses[j] * ses[j];
  }
  rep.combined_se = std::sqrt(var);
  const double d0 = t_grid[0], d1 = t_grid[1] - t_grid[0];
  if (std::abs(d0 - d1) < 1e-12 * std::max(1.0, d0)) rep.stationarity_p = stats::ks_two_sample(inc[0], inc[1]).p_value;
  return rep;
}

}  // namespace rem
