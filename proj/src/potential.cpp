// potential.cpp
#include "rem/potential.hpp"

#include <algorithm>
#include <cmath>

#include "rem/chain.hpp"
#include "rem/error.hpp"
#include "rem/rng.hpp"
#include "rem/spectral.hpp"

namespace rem {

std::vector<std::uint8_t> vertex_mask(const Environment& env, std::span<const Vertex> set) {
  std::vector<std::uint8_t> m(env.size(), 0);
  for (Vertex v : set) m[v.code] = 1;
  return m;
}

PotentialField equilibrium_potential(const Environment& env, Vertex x, std::span<const std::uint8_t> sink,
                                     const SolveOptions& opt) {
  if (sink.size() != env.size()) throw ConfigError("equilibrium_potential: sink mask size mismatch");
  if (sink[x.code]) throw ConfigError("equilibrium_potential: source lies in the sink set");
  if (std::none_of(sink.begin(), sink.end(), [](std::uint8_t b) { return b != 0; }))
    throw ConfigError("equilibrium_potential: empty sink set");
  const auto size = static_cast<Eigen::Index>(env.size());
  std::vector<std::uint8_t> free(env.size());
  for (std::size_t y = 0; y < env.size(); ++y) free[y] = !sink[y] && y != x.code;
  Eigen::VectorXd boundary = Eigen::VectorXd::Zero(size);
  boundary[x.code] = 1.0;
  PotentialField pf;
  pf.source = x;
  pf.sink.assign(sink.begin(), sink.end());
  pf.values = solve_dirichlet(env, free, boundary, Eigen::VectorXd::Zero(size), opt, &pf.stats);

  const int n = env.n();
  for (std::uint32_t y = 0; y < env.size(); ++y) {
    if (!free[y]) continue;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t z = y ^ (std::uint32_t{1} << i);
      const double c = std::min(env.tau[y], env.tau[z]);
      num += c * pf.values[z];
      den += c;
    }
    pf.harmonic_residual = std::max(pf.harmonic_residual, std::abs(pf.values[y] - num / den));
  }
  return pf;
}

ConductanceRoutes effective_conductance(const Environment& env, const PotentialField& g) {
  ConductanceRoutes r;
  r.dirichlet = dirichlet_form(g.values, env);
  const Vertex x = g.source;
  for (int i = 0; i < env.n(); ++i) {
    const Vertex y = x.flipped(i);
    r.escape += conductance(env, x, y) * (1.0 - g.values[y.code]);
  }
  r.relative_gap = std::abs(r.dirichlet - r.escape) / std::max(std::abs(r.dirichlet), std::abs(r.escape));
  return r;
}

ConductanceRoutes effective_conductance(const Environment& env, Vertex x, std::span<const std::uint8_t> sink,
                                        const SolveOptions& opt) {
  return effective_conductance(env, equilibrium_potential(env, x, sink, opt));
}

HittingSolution mean_hitting_exact(const Environment& env, Vertex x, const SolveOptions& opt) {
  const auto size = static_cast<Eigen::Index>(env.size());
  std::vector<std::uint8_t> free(env.size(), 1);
  free[x.code] = 0;
  HittingSolution hs;
  hs.target = x;
  // (-Q h)(y) = 1 off x, multiplied through by nu_y: L h = nu.
  hs.h = solve_dirichlet(env, free, Eigen::VectorXd::Zero(size), env.nu, opt, &hs.stats);
  hs.e_nu = env.nu.dot(hs.h);
  hs.dirichlet_residual = std::abs(dirichlet_form(hs.h, env) / hs.e_nu - 1.0);
  const Eigen::VectorXd lh = apply_laplacian(env, hs.h);
  for (Eigen::Index y = 0; y < size; ++y)
    if (y != x.code) hs.generator_residual = std::max(hs.generator_residual, std::abs(lh[y] / env.nu[y] - 1.0));
  return hs;
}

Eigen::VectorXd extremal_minimizer(const HittingSolution& hs) {
  // nu_x E_y[H_x] = Z_xx - Z_yx and Z_xx = nu_x E_nu[H_x] give Z_yx / Z_xx = 1 - h(y) / E_nu[H_x].
  return Eigen::VectorXd::Ones(hs.h.size()) - hs.h / hs.e_nu;
}

Eigen::VectorXd fundamental_column_by_kernel(const Environment& env, Vertex x, int budget_n,
                                             std::uint64_t max_terms) {
  const Generator q = build_generator(env, budget_n);
  double rate = 0.0;
  for (Eigen::Index y = 0; y < q.rows(); ++y) rate = std::max(rate, -q.coeff(y, y));
  // Twice the largest exit rate keeps every state lazy, so K^j converges.
  const double lambda = 2.0 * rate;
  const double nx = env.nu[x.code];
  Eigen::VectorXd v = Eigen::VectorXd::Zero(q.rows());
  v[x.code] = 1.0;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(q.rows());
  for (std::uint64_t j = 0; j < max_terms; ++j) {
    const Eigen::VectorXd d = v.array() - nx;
    sum += d;
    if (d.cwiseAbs().maxCoeff() < 1e-12) return sum / lambda;
    v += (q * v) / lambda;
  }
  throw BudgetError("fundamental_column_by_kernel: defect above 1e-12 after " + std::to_string(max_terms) +
                    " kernel steps");
}

Eigen::VectorXd project_admissible(Eigen::VectorXd g, const Environment& env, Vertex x) {
  g[x.code] = 1.0;
  const double nx = env.nu[x.code];
  const double rest = env.nu.dot(g) - nx;
  const double shift = (nx + rest) / (1.0 - nx);
  for (Eigen::Index y = 0; y < g.size(); ++y)
    if (y != x.code) g[y] -= shift;
  return g;
}

ExtremalReport extremal_check(const Environment& env, const HittingSolution& hs, int random_count,
                              std::uint64_t seed) {
  ExtremalReport rep;
  rep.e_nu = hs.e_nu;
  const Vertex x = hs.target;
  const Eigen::VectorXd g = extremal_minimizer(hs);
  const double dg = dirichlet_form(g, env);
  rep.residual = std::abs(dg * hs.e_nu - 1.0);

  Rng rng(seed);
  std::normal_distribution<double> normal;
  rep.min_random_excess = std::numeric_limits<double>::infinity();
  const auto size = static_cast<Eigen::Index>(env.size());
  for (int k = 0; k < random_count; ++k) {
    Eigen::VectorXd gt(size);
    for (Eigen::Index y = 0; y < size; ++y) gt[y] = normal(rng.engine());
    gt = project_admissible(std::move(gt), env, x);
    const double excess = dirichlet_form(gt, env) * hs.e_nu - 1.0;
    ++rep.random_trials;
    rep.min_random_excess = std::min(rep.min_random_excess, excess);
    if (excess < -1e-10) ++rep.violations;
  }

  // Tangent direction: v(x) = 0 and sum nu v = 0.
  Eigen::VectorXd v(size);
  for (Eigen::Index y = 0; y < size; ++y) v[y] = normal(rng.engine());
  v[x.code] = 0.0;
  v.array() -= env.nu.dot(v) / (1.0 - env.nu[x.code]);
  v[x.code] = 0.0;
  const double eps = 1e-3;
  rep.perturbation_increase = dirichlet_form(g + eps * v, env) - dg;
  return rep;
}

AppendixBound bound_check_appendix(const Environment& env, const HittingSolution& hs,
                                   std::span<const std::uint8_t> sink, std::optional<double> lambda,
                                   const SolveOptions& opt) {
  AppendixBound ab;
  const Vertex x = hs.target;
  ab.routes = effective_conductance(env, x, sink, opt);
  ab.conductance = ab.routes.value();
  for (std::size_t y = 0; y < env.size(); ++y)
    if (sink[y]) {
      ++ab.sink_size;
      ab.nu_sink += env.nu[static_cast<Eigen::Index>(y)];
    }
  ab.e_nu = hs.e_nu;
  ab.slack = ab.conductance / (ab.nu_sink * ab.nu_sink) - 1.0 / hs.e_nu;
  if (lambda) {
    const double nx = env.nu[x.code];
    ab.spectral_slack = (1.0 - nx) / (*lambda * nx) - hs.e_nu;
  }
  return ab;
}

std::optional<int> good_sphere_radius(const Environment& env, Vertex x) {
  const int n = env.n();
  const double delta = env.params.constants.delta;
  const int rmax = std::min(n, static_cast<int>(std::ceil(std::pow(static_cast<double>(n), 3.0 * delta))));
  const double cap = 0.5 * std::pow(static_cast<double>(n), 1.0 - delta) * std::log(2.0);
  for (int r = 1; r <= rmax; ++r) {
    bool good = true;
    for (Vertex y : enumerate_sphere(x, r, n))
      if (env.log_tau[y.code] > cap) {
        good = false;
        break;
      }
    if (good) return r;
  }
  return std::nullopt;
}

std::optional<DeepTrapBound> deep_trap_conductance_bound(const Environment& env, Vertex x, const SolveOptions& opt) {
  const auto radius = good_sphere_radius(env, x);
  if (!radius) return std::nullopt;
  DeepTrapBound b;
  b.x = x;
  b.radius = *radius;
  const std::vector<Vertex> ball = enumerate_ball(x, b.radius, env.n());
  b.ball_size = ball.size();
  std::vector<std::uint8_t> sink(env.size(), 1);
  for (Vertex y : ball) sink[y.code] = 0;
  b.exact = effective_conductance(env, x, sink, opt).value();
  for (Vertex y : ball)
    for (int i = 0; i < env.n(); ++i) {
      const Vertex z = y.flipped(i);
      if (sink[z.code]) b.parallel_bound += conductance(env, y, z);
    }
  b.mean_exit_local_time = env.nu[x.code] / b.exact;
  return b;
}

double sample_exit_local_time(const Environment& env, Vertex x, int radius, std::uint64_t seed) {
  ChainSimulator sim(env, RateModel::FastY);
  Rng rng(seed);
  double local = 0.0;
  Vertex y = x;
  while (hamming_distance(x, y) <= radius) {
    auto [hold, next] = sim.step(y, rng);
    if (y == x) local += hold;
    y = next;
  }
  return local;
}

}  // namespace rem
