// environment.cpp
#include "rem/environment.hpp"

#include <algorithm>
#include <cmath>

#include "rem/error.hpp"
#include "rem/gaussian.hpp"
#include "rem/rng.hpp"

namespace rem {

namespace {

double neumaier_sum(const Eigen::VectorXd& v) {
  double sum = 0.0, comp = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double sqrt_n(int n) { return std::sqrt(static_cast<double>(n)); }

}  // namespace

double Environment::deep_density_ratio() const {
  return static_cast<double>(deep.size()) * std::exp2((scales.gamma_prime - 1.0) * n());
}

Environment assemble_environment(const RemParams& p, const Scales& s, Eigen::VectorXd energy) {
  const std::uint64_t nv = vertex_count(s.n);
  if (static_cast<std::uint64_t>(energy.size()) != nv)
    throw ConfigError("environment: expected 2^N = " + std::to_string(nv) + " energies, got " +
                      std::to_string(energy.size()));
  Environment env;
  env.params = p;
  env.scales = s;
  env.energy = std::move(energy);
  env.log_tau = (p.beta * sqrt_n(s.n)) * env.energy;
  env.tau = env.log_tau.array().exp();
  const Eigen::VectorXd weight = env.tau.cwiseMin(1.0);
  env.Z = neumaier_sum(weight);
  env.nu = weight / env.Z;
  env.is_deep.assign(nv, 0);
  for (std::uint64_t x = 0; x < nv; ++x)
    if (env.log_tau[static_cast<Eigen::Index>(x)] >= s.log_g_prime) {
      env.is_deep[x] = 1;
      env.deep.emplace_back(static_cast<std::uint32_t>(x));
    }
  return env;
}

Environment environment_from_tau(const RemParams& p, const Eigen::VectorXd& tau) {
  const Scales s = validate_params(p);
  Eigen::VectorXd energy = tau.array().log() / (p.beta * sqrt_n(p.n));
  Environment env = assemble_environment(p, s, std::move(energy));
  // Keep the planted weights bit-exact rather than round-tripping through exp(log).
  env.tau = tau;
  const Eigen::VectorXd weight = env.tau.cwiseMin(1.0);
  env.Z = neumaier_sum(weight);
  env.nu = weight / env.Z;
  return env;
}

Environment sample_environment(const RemParams& p) {
  const Scales s = validate_params(p);
  const std::uint64_t nv = vertex_count(p.n);
  Rng rng(p.env_seed);
  Eigen::VectorXd energy(static_cast<Eigen::Index>(nv));
  for (Eigen::Index x = 0; x < energy.size(); ++x) energy[x] = gaussian::quantile(rng.uniform_open());
  return assemble_environment(p, s, std::move(energy));
}

namespace {

// Smallest energy e > previous with beta sqrt(N) e >= log g'_N, or the largest
// below the threshold, so the assembled deep set matches xi exactly.
double nudge_above(double e, double scale, double log_gp) {
  while (scale * e < log_gp) e = std::nextafter(e, std::numeric_limits<double>::infinity());
  return e;
}
double nudge_below(double e, double scale, double log_gp) {
  while (scale * e >= log_gp) e = std::nextafter(e, -std::numeric_limits<double>::infinity());
  return e;
}

Eigen::VectorXd assembled_energies(const TwoStepEnvironment& t) {
  Eigen::VectorXd e(t.e_bar.size());
  for (Eigen::Index x = 0; x < e.size(); ++x) e[x] = t.xi[static_cast<std::size_t>(x)] ? t.e_bar[x] : t.e_under[x];
  return e;
}

}  // namespace

TwoStepEnvironment sample_two_step(const RemParams& p) {
  const Scales s = validate_params(p);
  const std::uint64_t nv = vertex_count(p.n);
  const double theta = s.energy_threshold();
  const double scale = p.beta * sqrt_n(p.n);
  TwoStepEnvironment t;
  t.deep_probability = gaussian::sf(theta);
  t.xi.assign(nv, 0);
  t.e_bar = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  t.e_under = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  Rng rng(p.env_seed);
  for (std::uint64_t x = 0; x < nv; ++x) {
    const auto i = static_cast<Eigen::Index>(x);
    const bool deep = rng.uniform() < t.deep_probability;
    const double u = rng.uniform_open();
    t.xi[x] = deep ? 1 : 0;
    if (deep)
      t.e_bar[i] = nudge_above(gaussian::upper_tail_from_uniform(theta, u), scale, s.log_g_prime);
    else
      t.e_under[i] = nudge_below(gaussian::lower_body_from_uniform(theta, u), scale, s.log_g_prime);
  }
  t.env = assemble_environment(p, s, assembled_energies(t));
  return t;
}

TwoStepEnvironment resample_deep_energies(const TwoStepEnvironment& e, std::uint64_t seed) {
  TwoStepEnvironment t = e;
  const Scales& s = e.env.scales;
  const double theta = s.energy_threshold();
  const double scale = s.beta * sqrt_n(s.n);
  Rng rng(seed);
  for (std::size_t x = 0; x < t.xi.size(); ++x) {
    if (!t.xi[x]) continue;
    const auto i = static_cast<Eigen::Index>(x);
    t.e_bar[i] = nudge_above(gaussian::upper_tail_from_uniform(theta, rng.uniform_open()), scale, s.log_g_prime);
  }
  // Only deep entries change; shallow tau values stay bit-identical.
  for (Vertex v : t.env.deep) {
    const auto i = static_cast<Eigen::Index>(v.code);
    t.env.energy[i] = t.e_bar[i];
    t.env.log_tau[i] = scale * t.e_bar[i];
    t.env.tau[i] = std::exp(t.env.log_tau[i]);
  }
  return t;
}

SeparationReport check_separation(const Environment& env) {
  SeparationReport r;
  r.deep_count = env.deep.size();
  r.size_ratio = env.deep_density_ratio();
  for (std::size_t i = 0; i < env.deep.size(); ++i)
    for (std::size_t j = i + 1; j < env.deep.size(); ++j)
      r.min_distance = std::min(r.min_distance, hamming_distance(env.deep[i], env.deep[j]));
  r.separated = r.min_distance >= 2;
  return r;
}

namespace {
int slice_count(const Scales& s) {
  return std::max(0, static_cast<int>(std::ceil((s.log_g_prime - s.log_h) / std::log(2.0))));
}
}  // namespace

std::vector<int> slice_labels(const Environment& env) {
  const Scales& s = env.scales;
  const int count = slice_count(s);
  std::vector<int> label(env.size(), 0);
  for (std::size_t x = 0; x < env.size(); ++x) {
    const double lt = env.log_tau[static_cast<Eigen::Index>(x)];
    if (env.is_deep[x])
      label[x] = -1;
    else if (lt <= s.log_h)
      label[x] = 0;
    else
      label[x] = std::clamp(static_cast<int>(std::ceil((s.log_g_prime - lt) / std::log(2.0))), 1, count);
  }
  return label;
}

ShallowSlices shallow_slices(const Environment& env) {
  const Scales& s = env.scales;
  ShallowSlices out;
  const int count = slice_count(s);
  out.slices.resize(static_cast<std::size_t>(count));
  const std::vector<int> label = slice_labels(env);
  for (std::size_t x = 0; x < label.size(); ++x) {
    const Vertex v(static_cast<std::uint32_t>(x));
    if (label[x] == 0)
      out.very_shallow.push_back(v);
    else if (label[x] > 0)
      out.slices[static_cast<std::size_t>(label[x] - 1)].push_back(v);
  }
  for (int i = 1; i <= count; ++i)
    out.size_ratio.push_back(static_cast<double>(out.slices[static_cast<std::size_t>(i - 1)].size()) /
                             std::exp2(s.alpha_prime * i + (1.0 - s.gamma_prime) * s.n));
  return out;
}

}  // namespace rem
