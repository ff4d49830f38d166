// Acceptance checks. Usage: acceptance <criterion 1..11> [more ...]
// Each criterion prints its measurements, then one line
// "criterion k: PASS" or "criterion k: FAIL".
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <bit>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "rem/analysis.hpp"
#include "rem/chain.hpp"
#include "rem/environment.hpp"
#include "rem/error.hpp"
#include "rem/potential.hpp"
#include "rem/spectral.hpp"
#include "rem/stats.hpp"

using namespace rem;

namespace {

// Tolerances and sample sizes, pinned.
constexpr double kKTolerance = 1e-8;
constexpr double kBalanceTolerance = 1e-12;
constexpr double kStationarityTolerance = 1e-10;
constexpr int kEnvsPerN = 20;
constexpr std::size_t kSstSamples = 100000;
constexpr double kSstTv = 0.01;
constexpr double kPValue = 0.01;
constexpr double kSigma = 3.0;
constexpr double kExtremalTolerance = 1e-8;
constexpr double kRouteTolerance = 1e-10;
constexpr int kAppendixEnvs = 10;
constexpr int kRandomAdmissible = 100;
constexpr int kRandomSinks = 20;
constexpr int kExpGridPoints = 50;
constexpr std::uint64_t kTimeChangeJumps = 100000;
constexpr int kQuasiN = 16;
constexpr std::size_t kQuasiTrajectories = 100;
constexpr std::size_t kQuasiRedraws = 200;
constexpr std::size_t kQuasiAllowedOutside = 2;
constexpr std::size_t kTrendTrajectories = 1000;
constexpr double kRnBand = 0.15;
constexpr std::size_t kStableSamples = 100000;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RemParams canonical(int n, std::uint64_t seed) {
  RemParams p;
  p.n = n;
  p.alpha = 0.7;
  p.beta = 1.4;
  p.env_seed = seed;
  return p;
}

Environment sampled(int n, std::uint64_t seed) { return sample_environment(canonical(n, seed)); }

bool within_limit(double elapsed, double limit) {
  std::printf("  runtime %.1f s (limit %.0f s)\n", elapsed, limit);
  return elapsed < limit;
}

// ---------------------------------------------------------------------------

bool criterion_1() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (double a : {0.3, 0.5, 0.7, 0.9}) {
    const double exact = std::tgamma(1.0 - a);
    std::vector<double> ks;
    for (double b : {0.8, 1.4}) {
      const KConstantReport r = constant_K(a, b);
      const double err = std::abs(r.K_quadrature - exact);
      std::printf("  alpha %.1f beta %.1f: K = %.15f, Gamma(1-alpha) = %.15f, |diff| = %.2e\n", a, b,
                  r.K_quadrature, exact, err);
      ok = ok && err < kKTolerance;
      ks.push_back(r.K_quadrature);
    }
    const double spread = std::abs(ks[0] - ks[1]);
    std::printf("  alpha %.1f: |K(0.8) - K(1.4)| = %.2e\n", a, spread);
    ok = ok && spread < kKTolerance;
  }
  return within_limit(seconds_since(t0), 1.0) && ok;
}

bool criterion_2() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (int n : {6, 8, 10}) {
    double worst_balance = 0.0, worst_stat = 0.0;
    for (int e = 1; e <= kEnvsPerN; ++e) {
      const Environment env = sampled(n, static_cast<std::uint64_t>(1000 * n + e));
      worst_balance = std::max(worst_balance, detailed_balance_residual(env, RateModel::FastY));
      worst_stat = std::max(worst_stat, check_generator(build_generator(env), env.nu).stationarity);
    }
    std::printf("  N = %d: max detailed-balance residual %.2e, max |nu Q| %.2e\n", n, worst_balance, worst_stat);
    ok = ok && worst_balance < kBalanceTolerance && worst_stat < kStationarityTolerance;
  }
  return within_limit(seconds_since(t0), 60.0) && ok;
}

bool criterion_3() {
  const auto t0 = Clock::now();
  int violations = 0;
  for (int n : {6, 8, 10}) {
    double worst = 0.0;
    for (int e = 1; e <= kEnvsPerN; ++e) {
      const Environment env = sampled(n, static_cast<std::uint64_t>(2000 * n + e));
      const PathSet paths = edge_congestion(env.nu, path_good_flags(env), n);
      const double bound = poincare_bound(env, paths).bound;
      const double gap = exact_gap(env);
      if (bound > gap) ++violations;
      worst = std::max(worst, bound / gap);
    }
    std::printf("  N = %d: max bound / gap %.4e\n", n, worst);
  }
  std::printf("  violations: %d\n", violations);
  return within_limit(seconds_since(t0), 600.0) && violations == 0;
}

// Ten buckets of roughly equal nu mass, by vertex order.
std::vector<int> nu_buckets(const Eigen::VectorXd& nu, int buckets) {
  std::vector<int> b(static_cast<std::size_t>(nu.size()));
  double acc = 0.0;
  for (Eigen::Index y = 0; y < nu.size(); ++y) {
    b[static_cast<std::size_t>(y)] = std::min(buckets - 1, static_cast<int>(acc * buckets));
    acc += nu[y];
  }
  return b;
}

bool criterion_4() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (int n : {6, 8}) {
    const Environment env = sampled(n, 4000 + static_cast<std::uint64_t>(n));
    const double gap = exact_gap(env);
    const MixingBlock mb = find_mixing_block(env, 1.0 / (8.0 * gap));
    const StrongStationarySampler sst(mb.kernel, env.nu, mb.block);
    Vertex start(0);
    for (Eigen::Index y = 0; y < env.nu.size(); ++y)
      if (env.nu[y] < env.nu[start.code]) start = Vertex(static_cast<std::uint32_t>(y));
    std::printf("  N = %d: gap %.4f, m* = %d x %.4f = %.4f, minorization ratio %.3f, start %u\n", n, gap,
                mb.multiple, mb.base, mb.block, sst.minorization(), start.code);

    Rng rng(derive_seed(44, {static_cast<std::uint64_t>(n)}));
    std::vector<double> counts(env.size(), 0.0);
    std::vector<std::size_t> survival(6, 0);
    const int buckets = 10, block_cats = 5;
    const std::vector<int> bucket = nu_buckets(env.nu, buckets);
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(block_cats, buckets);
    for (std::size_t i = 0; i < kSstSamples; ++i) {
      const MixSample s = sst.sample(start, rng);
      counts[s.end_state.code] += 1.0;
      for (int k = 1; k <= 5; ++k)
        if (s.blocks >= k) ++survival[static_cast<std::size_t>(k)];
      table(std::min(s.blocks, block_cats) - 1, bucket[s.end_state.code]) += 1.0;
    }
    const std::vector<double> nu(env.nu.data(), env.nu.data() + env.nu.size());
    const double tv = stats::total_variation(counts, nu);
    // Reference: TV of an exact multinomial(nu) draw of the same size.
    std::vector<double> null_tv;
    std::discrete_distribution<std::size_t> law(nu.begin(), nu.end());
    for (int r = 0; r < 20; ++r) {
      std::vector<double> c(env.size(), 0.0);
      for (std::size_t i = 0; i < kSstSamples; ++i) c[law(rng.engine())] += 1.0;
      null_tv.push_back(stats::total_variation(c, nu));
    }
    std::printf("  N = %d: TV(law of Y_T, nu) = %.5f (threshold %.2f; exact-law sampling TV at this size: "
                "median %.5f, range [%.5f, %.5f])\n",
                n, tv, kSstTv, stats::median(null_tv), *std::min_element(null_tv.begin(), null_tv.end()),
                *std::max_element(null_tv.begin(), null_tv.end()));
    ok = ok && tv < kSstTv;
    for (int k = 1; k <= 5; ++k) {
      const double p = std::exp(-(k - 1.0));
      const double nn = static_cast<double>(kSstSamples);
      const double obs = static_cast<double>(survival[static_cast<std::size_t>(k)]) / nn;
      const double sd = std::sqrt(p * (1.0 - p) / nn);
      const bool in = std::abs(obs - p) <= kSigma * sd + 1e-15;
      std::printf("  N = %d: P[T >= %d m*] = %.5f vs %.5f (3 sigma = %.5f) %s\n", n, k, obs, p, kSigma * sd,
                  in ? "ok" : "outside");
      ok = ok && in;
    }
    const stats::ChiSquareResult chi = stats::chi_square_independence(table);
    std::printf("  N = %d: independence chi-square %.2f on %.0f dof, p = %.4f\n", n, chi.statistic, chi.dof,
                chi.p_value);
    ok = ok && chi.p_value > kPValue;
  }
  return within_limit(seconds_since(t0), 900.0) && ok;
}

bool criterion_5() {
  const auto t0 = Clock::now();
  double worst_extremal = 0.0, worst_route = 0.0, min_slack = INFINITY, min_excess = INFINITY;
  int violations = 0, instances = 0, targets = 0;
  for (int e = 1; e <= kAppendixEnvs; ++e) {
    const Environment env = sampled(10, 5000 + static_cast<std::uint64_t>(e));
    std::vector<Vertex> xs = env.deep;
    if (std::find(xs.begin(), xs.end(), Vertex(0)) == xs.end()) xs.push_back(Vertex(0));
    Rng rng(derive_seed(55, {static_cast<std::uint64_t>(e)}));
    for (Vertex x : xs) {
      ++targets;
      const HittingSolution hs = mean_hitting_exact(env, x);
      const ExtremalReport ex = extremal_check(env, hs, kRandomAdmissible, derive_seed(56, {x.code}));
      worst_extremal = std::max(worst_extremal, ex.residual);
      violations += ex.violations;
      min_excess = std::min(min_excess, ex.min_random_excess);
      for (int k = 0; k < kRandomSinks; ++k) {
        std::vector<std::uint8_t> sink(env.size(), 0);
        const std::size_t size = 1 + rng.below(env.size() / 2);
        for (std::size_t i = 0; i < size; ++i) sink[rng.below(env.size())] = 1;
        sink[x.code] = 0;
        if (std::none_of(sink.begin(), sink.end(), [](std::uint8_t b) { return b != 0; })) sink[x.code ^ 1u] = 1;
        const AppendixBound ab = bound_check_appendix(env, hs, sink);
        worst_route = std::max(worst_route, ab.routes.relative_gap);
        min_slack = std::min(min_slack, ab.slack);
        ++instances;
      }
    }
  }
  std::printf("  %d targets, %d (x, B) instances\n", targets, instances);
  std::printf("  max extremal residual %.2e (tolerance %.0e)\n", worst_extremal, kExtremalTolerance);
  std::printf("  random admissible functions beating the infimum: %d (min excess %.3e)\n", violations, min_excess);
  std::printf("  max conductance route gap %.2e (tolerance %.0e)\n", worst_route, kRouteTolerance);
  std::printf("  min conductance bound slack %.4e\n", min_slack);
  const bool ok = worst_extremal < kExtremalTolerance && violations == 0 && worst_route < kRouteTolerance &&
                  min_slack >= 0.0;
  return within_limit(seconds_since(t0), 600.0) && ok;
}

bool criterion_6() {
  const auto t0 = Clock::now();
  int checked = 0, failed = 0;
  double worst_ratio = 0.0;
  for (int n : {6, 8, 10})
    for (int e = 1; e <= 10; ++e) {
      const Environment env = sampled(n, 6000 + static_cast<std::uint64_t>(100 * n + e));
      if (env.deep.empty()) continue;
      const double gap = exact_gap(env);
      for (Vertex x : env.deep) {
        const ExponentialityReport r = hitting_exponentiality(env, x, gap, kExpGridPoints);
        ++checked;
        if (!(r.sup_deviation <= r.bound)) ++failed;
        worst_ratio = std::max(worst_ratio, r.sup_deviation / r.bound);
      }
    }
  std::printf("  deep traps checked %d, bound exceeded %d, max deviation / bound %.4f\n", checked, failed,
              worst_ratio);
  return within_limit(seconds_since(t0), 600.0) && checked > 0 && failed == 0;
}

bool criterion_7() {
  const auto t0 = Clock::now();
  const Environment env = sampled(8, 7008);
  const int n = env.n();
  // Y until at least 1e5 jumps, then the time change.
  Trajectory y;
  {
    ChainSimulator sim(env, RateModel::FastY);
    Rng rng(77);
    y = sim.simulate(Vertex(0), 1e300, rng, kTimeChangeJumps + 2);
  }
  const Trajectory x = time_change_reconstruct(y, env);
  const std::size_t jumps = x.jump_times.size();
  std::printf("  jumps of reconstructed X: %zu\n", jumps);

  // Per-coordinate totals: expected sum_k p(x_k, i), variance sum_k p (1 - p).
  std::vector<double> obs(static_cast<std::size_t>(n), 0.0), expect(obs), var(obs);
  std::map<std::pair<std::uint32_t, int>, double> cell;
  std::map<std::uint32_t, double> visits;
  std::vector<double> pit;
  for (std::size_t k = 0; k < jumps; ++k) {
    const Vertex from = x.states[k], to = x.states[k + 1];
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += rate(RateModel::MetropolisX, env, from, from.flipped(i));
    for (int i = 0; i < n; ++i) {
      const double p = rate(RateModel::MetropolisX, env, from, from.flipped(i)) / total;
      expect[static_cast<std::size_t>(i)] += p;
      var[static_cast<std::size_t>(i)] += p * (1.0 - p);
    }
    const int bit = std::countr_zero(from.code ^ to.code);
    obs[static_cast<std::size_t>(bit)] += 1.0;
    cell[{from.code, bit}] += 1.0;
    visits[from.code] += 1.0;
    const double hold = x.segment_end(k) - x.segment_start(k);
    pit.push_back(1.0 - std::exp(-hold * total));
  }
  bool ok = jumps >= kTimeChangeJumps;
  for (int i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double z = (obs[u] - expect[u]) / std::sqrt(var[u]);
    std::printf("  coordinate %d: observed %.0f, expected %.1f, z = %+.2f\n", i, obs[u], expect[u], z);
    ok = ok && std::abs(z) <= kSigma;
  }
  // Every visited state and direction at once. Visit counts are fixed by the
  // path, so each state is its own multinomial: cells with expected count
  // below 5 are pooled within the state and each state contributes
  // (cells - 1) degrees of freedom.
  double chi_stat = 0.0, dof = 0.0;
  for (const auto& [v, c] : visits) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += rate(RateModel::MetropolisX, env, Vertex(v), Vertex(v).flipped(i));
    std::vector<std::pair<double, double>> cells;
    double pool_o = 0.0, pool_e = 0.0;
    for (int i = 0; i < n; ++i) {
      auto it = cell.find({v, i});
      const double oi = it == cell.end() ? 0.0 : it->second;
      const double ei = c * rate(RateModel::MetropolisX, env, Vertex(v), Vertex(v).flipped(i)) / total;
      if (ei < 5.0) {
        pool_o += oi;
        pool_e += ei;
      } else {
        cells.emplace_back(oi, ei);
      }
    }
    if (pool_e > 0.0) cells.emplace_back(pool_o, pool_e);
    if (cells.size() < 2) continue;
    for (const auto& [oi, ei] : cells) chi_stat += (oi - ei) * (oi - ei) / ei;
    dof += static_cast<double>(cells.size() - 1);
  }
  const double p_chi = dof > 0.0 ? stats::chi_square_sf(chi_stat, dof) : 1.0;
  std::printf("  per-state direction cells: chi-square %.1f on %.0f dof, p = %.4f\n", chi_stat, dof, p_chi);
  ok = ok && p_chi > kPValue;
  const stats::KsResult ks = stats::ks_one_sample(pit, [](double u) { return std::clamp(u, 0.0, 1.0); });
  std::printf("  holding times vs Exp(sum r): KS D = %.5f, p = %.4f over %zu holds\n", ks.statistic, ks.p_value,
              pit.size());
  ok = ok && ks.p_value > kPValue;
  return within_limit(seconds_since(t0), 300.0) && ok;
}

bool criterion_8() {
  const auto t0 = Clock::now();
  RemParams p = canonical(kQuasiN, 1);
  TwoStepEnvironment two;
  SeparationReport sep;
  for (p.env_seed = 1;; ++p.env_seed) {
    two = sample_two_step(p);
    sep = check_separation(two.env);
    if (sep.separated && !two.env.deep.empty()) break;
    std::printf("  env seed %llu: |D| = %zu, min deep distance %d, skipped\n",
                static_cast<unsigned long long>(p.env_seed), sep.deep_count, sep.min_distance);
  }
  std::printf("  env seed %llu: |D| = %zu, min deep distance %d\n", static_cast<unsigned long long>(p.env_seed),
              sep.deep_count, sep.min_distance);
  RnConfig rc;
  rc.samples_per_trap = 32;
  rc.max_traps = 16;
  rc.seed = 81;
  const RnEstimate rn = estimate_RN(two.env, rc);
  std::printf("  R_N = %.4f (log R_N / N = %.4f, block %.3f, surrogate %d)\n", rn.R_N, rn.log_R_N / kQuasiN,
              rn.block, rn.surrogate ? 1 : 0);
  const QuasiAnnealedReport q =
      quasi_annealed_laplace(two, rn.R_N, 1.0, 1.0, kQuasiTrajectories, kQuasiRedraws, 82, 0);
  std::size_t outside = 0, visited = 0;
  for (const auto& tr : q.trajectories) {
    if (std::abs(tr.z) > kSigma) ++outside;
    if (tr.deep_visited > 0) ++visited;
  }
  std::printf("  trajectories %zu (with deep visits %zu), redraws %zu\n", q.trajectories.size(), visited,
              kQuasiRedraws);
  std::printf("  outside 3 SE: %zu (allowed %zu), max |z| %.3f\n", outside, kQuasiAllowedOutside, q.max_abs_z);
  std::printf("  overall average %.6f +- %.6f, predicted %.6f, stable form exp(-K mean L) %.6f +- %.6f\n",
              q.estimate, q.estimate_se, q.predicted_mean, q.stable_form, q.stable_form_se);
  const bool ok = outside <= kQuasiAllowedOutside && visited > 0;
  return within_limit(seconds_since(t0), 1800.0) && ok;
}

bool criterion_9() {
  const auto t0 = Clock::now();
  std::size_t edges = 0, mismatches = 0;
  int envs = 0;
  for (int n : {8, 10, 12}) {
    int found = 0;
    for (std::uint64_t seed = 1; found < 5 && seed < 1000; ++seed) {
      const TwoStepEnvironment t = sample_two_step(canonical(n, 9000 + seed));
      if (t.env.deep.empty() || !check_separation(t.env).separated) continue;
      ++found;
      ++envs;
      for (std::uint64_t r = 0; r < 5; ++r) {
        const TwoStepEnvironment redraw = resample_deep_energies(t, derive_seed(seed, {r}));
        bool moved = false;
        for (Vertex v : t.env.deep) moved = moved || redraw.env.tau[v.code] != t.env.tau[v.code];
        if (!moved) ++mismatches;
        mismatches += rate_mismatches(t.env, redraw.env);
        edges += t.env.size() * static_cast<std::size_t>(n);
      }
    }
  }
  std::printf("  separated environments %d, directed edges compared %zu, mismatches %zu\n", envs, edges,
              mismatches);
  return within_limit(seconds_since(t0), 60.0) && envs > 0 && mismatches == 0;
}

struct TrendPoint {
  int n = 0;
  double laplace_gap = 0.0;
  double laplace = 0.0, laplace_se = 0.0, theory = 0.0;
  double var_l = 0.0;
  double median_shallow = 0.0;
  double log_rn_over_n = 0.0;
};

TrendPoint trend_point(int n, std::size_t max_traps, std::size_t samples) {
  const auto t0 = Clock::now();
  const Environment env = sampled(n, 1);
  RnConfig rc;
  rc.samples_per_trap = samples;
  rc.max_traps = max_traps;
  rc.seed = 100 + static_cast<std::uint64_t>(n);
  const RnEstimate rn = estimate_RN(env, rc);
  std::printf("  N = %d: |D| = %zu, traps used %zu, R_N = %.4f (doubled horizon %.4f, rel. se %.3f), block %.3f, "
              "surrogate %d, %.0f s\n",
              n, rn.deep_count, rn.traps_used, rn.R_N, rn.R_N_doubled, rn.relative_se, rn.block,
              rn.surrogate ? 1 : 0, seconds_since(t0));
  const std::vector<double> grid{0.25, 0.5, 1.0};
  const std::vector<double> lambdas{1.0};
  const std::vector<AgingSample> runs =
      run_aging(env, rn.R_N, grid, kTrendTrajectories, 200 + static_cast<std::uint64_t>(n), 0);
  const LaplaceReport lr = empirical_laplace(runs, grid, lambdas, env.scales.alpha, rn.R_N, env.scales.g());
  const LaplaceCell* c = lr.find(1.0, 1.0);
  const LNReport ln = local_time_functional(runs, grid, rn.R_N);
  const ShallowReport sh = shallow_contribution(env, runs, grid, rn.R_N);
  TrendPoint tp;
  tp.n = n;
  tp.laplace = c->empirical;
  tp.laplace_se = c->se;
  tp.theory = c->theory;
  tp.laplace_gap = std::abs(c->empirical - c->theory);
  tp.var_l = ln.variance[2];
  tp.median_shallow = sh.median[2];
  tp.log_rn_over_n = rn.log_R_N / n;
  std::printf("  N = %d: Laplace(1,1) %.5f +- %.5f vs %.5f (gap %.5f); mean L(1) %.4f, Var L(1) %.5f; "
              "median shallow %.5f; log R_N / N %.4f; total %.0f s\n",
              n, tp.laplace, tp.laplace_se, tp.theory, tp.laplace_gap, ln.mean[2], tp.var_l, tp.median_shallow,
              tp.log_rn_over_n, seconds_since(t0));
  return tp;
}

bool criterion_10() {
  const auto t0 = Clock::now();
  std::vector<TrendPoint> pts;
  pts.push_back(trend_point(12, 0, 64));
  pts.push_back(trend_point(16, 16, 32));
  pts.push_back(trend_point(20, 16, 32));
  auto nonincreasing = [&](const char* name, double TrendPoint::*f) {
    const bool ok = pts[1].*f <= pts[0].*f && pts[2].*f <= pts[1].*f;
    std::printf("  (%s %.5f, %.5f, %.5f over N = 12, 16, 20: %s\n", name, pts[0].*f, pts[1].*f, pts[2].*f,
                ok ? "non-increasing" : "not monotone");
    return ok;
  };
  const bool a = nonincreasing("a) |Laplace - theory| at (1,1)", &TrendPoint::laplace_gap);
  const bool b = nonincreasing("b) Var L_N(1)", &TrendPoint::var_l);
  const bool c = nonincreasing("c) median shallow remainder", &TrendPoint::median_shallow);
  const double target = 0.7 * 0.7 * 1.4 * 1.4 / 2.0;
  const bool d = std::abs(pts[2].log_rn_over_n - target) <= kRnBand;
  std::printf("  (d) log R_N / N at N = 20: %.4f vs %.4f +- %.2f: %s\n", pts[2].log_rn_over_n, target, kRnBand,
              d ? "inside" : "outside");
  return within_limit(seconds_since(t0), 7200.0) && a && b && c && d;
}

bool criterion_11() {
  const auto t0 = Clock::now();
  const double alpha = 0.7;
  const double k = constant_K_closed(alpha);
  const std::vector<double> grid{1.0};
  const Eigen::MatrixXd v = simulate_stable_subordinator(alpha, k, grid, 1111, kStableSamples);
  bool ok = true;
  for (double lambda : {0.5, 1.0, 2.0}) {
    std::vector<double> e(static_cast<std::size_t>(v.rows()));
    for (Eigen::Index i = 0; i < v.rows(); ++i) e[static_cast<std::size_t>(i)] = std::exp(-lambda * v(i, 0));
    const stats::Summary s = stats::summarize(e);
    const double theory = std::exp(-k * std::pow(lambda, alpha));
    const double z = (s.mean - theory) / s.std_error;
    std::printf("  lambda %.1f: empirical %.6f +- %.6f, theory %.6f, z = %+.2f\n", lambda, s.mean, s.std_error,
                theory, z);
    ok = ok && std::abs(z) <= kSigma;
  }
  return within_limit(seconds_since(t0), 60.0) && ok;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<bool()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                    criterion_5, criterion_6, criterion_7, criterion_8,
                                                    criterion_9, criterion_10, criterion_11};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 11; ++i) which.push_back(i);
  bool all = true;
  for (int c : which) {
    if (c < 1 || c > 11) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    std::printf("criterion %d\n", c);
    std::fflush(stdout);
    bool ok = false;
    try {
      ok = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception& e) {
      std::printf("  error: %s\n", e.what());
    }
    std::printf("criterion %d: %s\n", c, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    all = all && ok;
  }
  return all ? 0 : 1;
}
