// aging.cpp
// R_N, nu-started trajectory observables, visit counts and hitting laws.
#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "rem/analysis.hpp"
#include "rem/error.hpp"
#include "rem/parallel.hpp"
#include "rem/potential.hpp"
#include "rem/stats.hpp"

namespace rem {

namespace {

// Kernel products beyond this dimension cost minutes per block.
constexpr int kSstBudgetN = 10;

}  // namespace

MixingHorizon plan_mixing_horizon(const Environment& env, std::optional<double> block, std::uint64_t seed,
                                  int gap_iterations, const SolveOptions& opt) {
  MixingHorizon mh;
  if (block) {
    if (!(*block > 0.0)) throw ConfigError("mixing horizon: block must be positive");
    mh.block = *block;
    return mh;
  }
  if (env.n() <= kSstBudgetN) {
    const double lambda = exact_gap(env);
    MixingBlock mb = find_mixing_block(env, 1.0 / (8.0 * lambda));
    mh.surrogate = false;
    mh.lambda = lambda;
    mh.block = mb.block;
    mh.sst.emplace(std::move(mb.kernel), env.nu, mb.block);
    return mh;
  }
  const GapEstimate g = estimate_gap(env, gap_iterations, seed, 1e-6, opt);
  mh.lambda = g.lambda;
  mh.block = spectral_mixing_block(env, g.lambda);
  return mh;
}

HorizonSample sample_local_time_to_mix(const ChainSimulator& sim, const MixingHorizon& mh, Vertex x, Rng& rng,
                                       std::uint64_t jump_budget) {
  HorizonSample hs;
  Vertex last = x;
  double local = 0.0;
  auto visit = [&](Vertex y, double t0, double t1) {
    ++hs.jumps;
    last = y;
    if (y == x) local += t1 - t0;
  };
  auto leg = [&](Vertex from, double length) {
    if (sim.run(from, length, rng, visit, jump_budget) < length)
      throw BudgetError("local time to mixing: jump budget exhausted");
  };
  if (mh.sst) {
    Vertex z = x;
    for (int k = 1;; ++k) {
      if (k > 100000) throw BudgetError("local time to mixing: strong stationary time not reached");
      leg(z, mh.block);
      if (rng.uniform() < mh.sst->acceptance(z, last)) {
        hs.horizon = k * mh.block;
        break;
      }
      z = last;
    }
  } else {
    const double p = 1.0 - std::exp(-1.0);
    int k = 1;
    while (rng.uniform() >= p) ++k;
    hs.horizon = k * mh.block;
    leg(x, hs.horizon);
  }
  hs.local = local;
  // Continue from Y_T for another T to get ell_{2T}(x).
  leg(last, hs.horizon);
  hs.local_doubled = local;
  return hs;
}

double rn_from_terms(const Scales& s, std::span<const TrapTerm> terms, double scale) {
  double sum = 0.0;
  for (const auto& t : terms) sum += t.ell_alpha / t.e_nu_h;
  return std::exp2((s.gamma - s.gamma_prime) * s.n) / (scale * sum);
}

RnEstimate estimate_RN(const Environment& env, const RnConfig& cfg) {
  if (env.deep.empty()) throw ConfigError("estimate_RN: the deep set is empty");
  if (cfg.samples_per_trap < 2) throw ConfigError("estimate_RN: need at least two samples per trap");
  RnEstimate est;
  est.deep_count = env.deep.size();

  std::vector<Vertex> traps = env.deep;
  if (cfg.max_traps > 0 && cfg.max_traps < traps.size()) {
    Rng pick(derive_seed(cfg.seed, {0x7472617073ULL}));
    for (std::size_t i = 0; i < cfg.max_traps; ++i)
      std::swap(traps[i], traps[i + pick.below(traps.size() - i)]);
    traps.resize(cfg.max_traps);
    std::sort(traps.begin(), traps.end(), [](Vertex a, Vertex b) { return a.code < b.code; });
  }
  est.traps_used = traps.size();

  const MixingHorizon mh = plan_mixing_horizon(env, cfg.block, derive_seed(cfg.seed, {1}), cfg.gap_iterations,
                                               cfg.solve);
  est.surrogate = mh.surrogate;
  est.block = mh.block;
  est.lambda = mh.lambda;

  const ChainSimulator sim(env, RateModel::FastY);
  const double alpha = env.scales.alpha;
  est.terms.resize(traps.size());
  parallel_for(traps.size(), cfg.threads, [&](std::size_t k) {
    TrapTerm& term = est.terms[k];
    term.x = traps[k];
    const HittingSolution hs = mean_hitting_exact(env, term.x, cfg.solve);
    term.e_nu_h = hs.e_nu;
    term.solver_iterations = hs.stats.iterations;
    std::vector<double> a(cfg.samples_per_trap), b(cfg.samples_per_trap);
    for (std::size_t i = 0; i < cfg.samples_per_trap; ++i) {
      Rng rng(derive_seed(cfg.seed, {2, term.x.code, i}));
      const HorizonSample s = sample_local_time_to_mix(sim, mh, term.x, rng, cfg.jump_budget);
      a[i] = std::pow(s.local, alpha);
      b[i] = std::pow(s.local_doubled, alpha);
    }
    const auto sa = stats::summarize(a);
    term.ell_alpha = sa.mean;
    term.ell_alpha_se = sa.std_error;
    term.ell_alpha_doubled = stats::summarize(b).mean;
  });

  const double scale = static_cast<double>(est.deep_count) / static_cast<double>(traps.size());
  double sum = 0.0, sum_doubled = 0.0, var = 0.0;
  for (const auto& t : est.terms) {
    sum += t.ell_alpha / t.e_nu_h;
    sum_doubled += t.ell_alpha_doubled / t.e_nu_h;
    var += std::pow(t.ell_alpha_se / t.e_nu_h, 2);
  }
  const Scales& s = env.scales;
  est.log_R_N = (s.gamma - s.gamma_prime) * s.n * std::log(2.0) - std::log(scale * sum);
  est.R_N = std::exp(est.log_R_N);
  est.R_N_doubled = std::exp2((s.gamma - s.gamma_prime) * s.n) / (scale * sum_doubled);
  est.relative_se = std::sqrt(var) / sum;
  return est;
}

void validate_aging_config(const AgingConfig& c) {
  if (c.t_grid.empty() || c.lambda_grid.empty()) throw ConfigError("aging: t and lambda grids must be nonempty");
  double prev = 0.0;
  for (double t : c.t_grid) {
    if (!(t > prev)) throw ConfigError("aging: t grid must be positive and increasing");
    prev = t;
  }
  for (double l : c.lambda_grid)
    if (!(l >= 0.0)) throw ConfigError("aging: lambda grid must be nonnegative");
  if (c.n_traj == 0) throw ConfigError("aging: n_traj must be positive");
  if (c.n_env == 0) throw ConfigError("aging: n_env must be positive");
  if (!(c.horizon_multiple >= 1.0)) throw ConfigError("aging: horizon multiple must be >= 1");
}

TrapIndex::TrapIndex(const Environment& env) : deep_slot(env.size(), -1), slice(slice_labels(env)) {
  for (std::size_t k = 0; k < env.deep.size(); ++k) deep_slot[env.deep[k].code] = static_cast<std::int32_t>(k);
  slice_count = *std::max_element(slice.begin(), slice.end());
}

AgingSample run_aging_trajectory(const ChainSimulator& sim, const TrapIndex& index, double R_N,
                                 std::span<const double> t_grid, Rng& rng, std::uint64_t jump_budget) {
  const Environment& env = sim.environment();
  const double inv_g = 1.0 / env.scales.g();
  const double eps = env.scales.epsilon_n();
  const double alpha = env.scales.alpha;
  const std::size_t k = t_grid.size();
  AgingSample out;
  out.S.assign(k, 0.0);
  out.SD.assign(k, 0.0);
  out.L.assign(k, 0.0);
  out.very_shallow.assign(k, 0.0);

  std::vector<double> ell(env.deep.size(), 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<double> slice_acc(static_cast<std::size_t>(index.slice_count) + 1, 0.0);
  double S = 0.0, SD = 0.0, VS = 0.0;
  std::size_t next = 0;

  auto accrue = [&](Vertex y, double dt) {
    const double w = clock_slope(env, y) * dt;
    S += w;
    const std::int32_t slot = index.deep_slot[y.code];
    if (slot >= 0) {
      SD += w;
      if (ell[static_cast<std::size_t>(slot)] == 0.0) touched.push_back(static_cast<std::uint32_t>(slot));
      ell[static_cast<std::size_t>(slot)] += dt;
    } else {
      const int label = index.slice[y.code];
      slice_acc[static_cast<std::size_t>(label)] += w;
      if (label == 0) VS += w;
    }
  };
  auto snapshot = [&](std::size_t j) {
    out.S[j] = S * inv_g;
    out.SD[j] = SD * inv_g;
    out.very_shallow[j] = VS * inv_g;
    double l = 0.0;
    for (std::uint32_t slot : touched) l += std::pow(ell[slot], alpha);
    out.L[j] = eps * l;
  };

  auto visit = [&](Vertex y, double t0, double t1) {
    ++out.jumps;
    while (next < k && t1 >= t_grid[next] * R_N) {
      const double cut = t_grid[next] * R_N;
      accrue(y, cut - t0);
      t0 = cut;
      snapshot(next++);
    }
    if (t1 > t0) accrue(y, t1 - t0);
  };
  const Vertex start = sim.sample_stationary(rng);
  sim.run(start, t_grid[k - 1] * R_N, rng, visit, jump_budget);
  if (next < k) {
    out.truncated = true;
    while (next < k) snapshot(next++);
  }
  for (double& v : slice_acc) v *= inv_g;
  out.slice_share = std::move(slice_acc);
  std::sort(touched.begin(), touched.end(),
            [&](std::uint32_t a, std::uint32_t b) { return env.deep[a].code < env.deep[b].code; });
  for (std::uint32_t slot : touched) out.deep_local.emplace_back(env.deep[slot], ell[slot]);
  return out;
}

std::vector<AgingSample> run_aging(const Environment& env, double R_N, std::span<const double> t_grid,
                                   std::size_t n, std::uint64_t seed, unsigned threads, std::uint64_t jump_budget) {
  if (!(R_N > 0.0)) throw ConfigError("run_aging: R_N must be positive");
  if (t_grid.empty()) throw ConfigError("run_aging: empty t grid");
  const ChainSimulator sim(env, RateModel::FastY);
  const TrapIndex index(env);
  std::vector<AgingSample> out(n);
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, {i}));
    out[i] = run_aging_trajectory(sim, index, R_N, t_grid, rng, jump_budget);
  });
  for (const auto& s : out)
    if (s.truncated) throw BudgetError("run_aging: jump budget exhausted before the horizon");
  return out;
}

LNReport local_time_functional(std::span<const AgingSample> samples, std::span<const double> t_grid, double R_N) {
  LNReport rep;
  rep.R_N = R_N;
  rep.t.assign(t_grid.begin(), t_grid.end());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    std::vector<double> v;
    v.reserve(samples.size());
    for (const auto& s : samples) {
      if (s.truncated) throw ConfigError("local_time_functional: trajectory shorter than t R_N");
      v.push_back(s.L[j]);
    }
    const auto sm = stats::summarize(v);
    rep.mean.push_back(sm.mean);
    rep.variance.push_back(sm.variance);
    rep.samples.push_back(std::move(v));
  }
  return rep;
}

ShallowReport shallow_contribution(const Environment& env, std::span<const AgingSample> samples,
                                   std::span<const double> t_grid, double R_N) {
  ShallowReport rep;
  rep.t.assign(t_grid.begin(), t_grid.end());
  const Scales& s = env.scales;
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    std::vector<double> rem, vs;
    for (const auto& a : samples) {
      rem.push_back(a.S[j] - a.SD[j]);
      vs.push_back(a.very_shallow[j]);
    }
    rep.median.push_back(stats::median(rem));
    rep.mean.push_back(stats::summarize(rem).mean);
    rep.min.push_back(*std::min_element(rem.begin(), rem.end()));
    rep.very_shallow_mean.push_back(stats::summarize(vs).mean);
    rep.very_shallow_bound.push_back(std::exp(std::log(t_grid[j] * R_N) - s.log_g + s.log_h +
                                              s.n * std::log(2.0) - std::log(env.Z)));
  }
  if (!samples.empty()) {
    rep.slice_mean.assign(samples[0].slice_share.size(), 0.0);
    for (const auto& a : samples)
      for (std::size_t i = 0; i < a.slice_share.size(); ++i)
        rep.slice_mean[i] += a.slice_share[i] / static_cast<double>(samples.size());
  }
  return rep;
}

VisitCounterReport deep_visit_counter(const Environment& env, Vertex x, double horizon, std::size_t n,
                                      std::uint64_t seed, std::uint64_t jump_budget) {
  if (!env.is_deep[x.code]) throw ConfigError("deep_visit_counter: start is not a deep trap");
  VisitCounterReport rep;
  rep.deep_count = env.deep.size();
  const ChainSimulator sim(env, RateModel::FastY);
  std::vector<double> counts(n);
  std::vector<std::uint8_t> seen(env.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> hit;
    Rng rng(derive_seed(seed, {i}));
    sim.run(x, horizon, rng,
            [&](Vertex y, double, double) {
              if (y != x && env.is_deep[y.code] && !seen[y.code]) {
                seen[y.code] = 1;
                hit.push_back(y.code);
              }
            },
            jump_budget);
    counts[i] = static_cast<double>(hit.size());
    rep.max = std::max(rep.max, hit.size());
    for (std::uint32_t y : hit) seen[y] = 0;
  }
  const auto sm = stats::summarize(counts);
  rep.mean = sm.mean;
  rep.se = sm.std_error;
  return rep;
}

ExponentialityReport hitting_exponentiality(const Environment& env, Vertex x, double lambda, int points,
                                            int budget_n) {
  if (env.n() > budget_n)
    throw BudgetError("hitting_exponentiality: N = " + std::to_string(env.n()) + " exceeds the dense budget");
  if (points < 2) throw ConfigError("hitting_exponentiality: need at least two grid points");
  ExponentialityReport rep;
  rep.x = x;
  rep.lambda = lambda;
  const Eigen::MatrixXd full = symmetrized_dense(env);
  const auto size = static_cast<Eigen::Index>(env.size());
  const auto xi = static_cast<Eigen::Index>(x.code);
  // Killed generator off x: drop row and column x.
  Eigen::MatrixXd killed(size - 1, size - 1);
  Eigen::VectorXd root(size - 1);
  for (Eigen::Index i = 0, a = 0; i < size; ++i) {
    if (i == xi) continue;
    root[a] = std::sqrt(env.nu[i]);
    for (Eigen::Index j = 0, b = 0; j < size; ++j) {
      if (j == xi) continue;
      killed(a, b++) = full(i, j);
    }
    ++a;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(killed);
  if (eig.info() != Eigen::Success) throw ViolationError("hitting_exponentiality: eigensolver failed");
  // P_nu[H_x > t] = sum_k e^{-mu_k t} <nu^{1/2}, v_k>^2.
  const Eigen::VectorXd w = (eig.eigenvectors().transpose() * root).cwiseAbs2();
  const Eigen::VectorXd& mu = eig.eigenvalues();
  rep.e_nu_h = mean_hitting_exact(env, x).e_nu;
  rep.bound = 1.0 / (lambda * rep.e_nu_h);
  const double t_max = 5.0 * rep.e_nu_h;
  for (int i = 0; i < points; ++i) {
    const double t = t_max * i / (points - 1);
    const double surv = (w.array() * (-mu.array() * t).exp()).sum();
    rep.t.push_back(t);
    rep.survival.push_back(surv);
    rep.sup_deviation = std::max(rep.sup_deviation, std::abs(surv - std::exp(-t / rep.e_nu_h)));
  }
  rep.holds = rep.sup_deviation <= rep.bound;
  return rep;
}

}  // namespace rem
