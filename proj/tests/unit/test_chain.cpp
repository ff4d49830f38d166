#include <cmath>
#include <map>

#include "doctest.h"
#include "rem/chain.hpp"
#include "rem/error.hpp"
#include "rem/potential.hpp"
#include "rem/stats.hpp"

using rem::RateModel;
using rem::Vertex;

namespace {

rem::Environment planted(int n, const Eigen::VectorXd& tau) {
  rem::RemParams p;
  p.n = n;
  return rem::environment_from_tau(p, tau);
}

rem::Environment sampled(int n, std::uint64_t seed) {
  rem::RemParams p;
  p.n = n;
  p.env_seed = seed;
  return rem::sample_environment(p);
}

}  // namespace

TEST_CASE("rates on planted pairs") {
  const rem::Environment env = planted(1, Eigen::Vector2d(2.0, 0.5));
  CHECK(rem::rate(RateModel::MetropolisX, env, Vertex(0), Vertex(1)) == doctest::Approx(0.25));
  CHECK(rem::rate(RateModel::MetropolisX, env, Vertex(1), Vertex(0)) == doctest::Approx(1.0));
  CHECK(rem::rate(RateModel::FastY, env, Vertex(1), Vertex(0)) == doctest::Approx(1.0));
  CHECK(rem::rate(RateModel::FastY, env, Vertex(0), Vertex(1)) == doctest::Approx(0.5));
  const rem::Environment e2 = planted(2, Eigen::Vector4d(1.0, 1.0, 1.0, 1.0));
  CHECK_THROWS_AS(rem::rate(RateModel::FastY, e2, Vertex(0), Vertex(3)), rem::ConfigError);
}

TEST_CASE("X rate is Y rate over 1 v tau") {
  const rem::Environment env = sampled(16, 2);
  rem::Rng rng(5);
  for (int k = 0; k < 100000; ++k) {
    const Vertex x(static_cast<std::uint32_t>(rng.below(env.size())));
    const Vertex y = x.flipped(static_cast<int>(rng.below(16)));
    const double q = rem::rate(RateModel::FastY, env, x, y);
    REQUIRE(rem::rate(RateModel::MetropolisX, env, x, y) == q / std::max(1.0, env.tau[x.code]));
  }
}

TEST_CASE("detailed balance") {
  const rem::Environment env = sampled(10, 8);
  CHECK(rem::detailed_balance_residual(env, RateModel::FastY) < 1e-12);
  CHECK(rem::detailed_balance_residual(env, RateModel::MetropolisX) < 1e-12);
  // Negative control: a bumped rate on one edge.
  const Vertex bad(17);
  const double residual = rem::detailed_balance_residual(env, env.nu, [&](Vertex x, Vertex y) {
    const double q = rem::rate_unchecked(RateModel::FastY, env, x, y);
    return x == bad && y == bad.flipped(2) ? q * 1.01 : q;
  });
  CHECK(residual > 1e-3);
}

TEST_CASE("zero horizon and single state trajectories") {
  const rem::Environment env = sampled(6, 1);
  const rem::Trajectory t = rem::simulate(env, RateModel::FastY, Vertex(3), 0.0, 9);
  CHECK(t.jump_times.empty());
  CHECK(t.states.size() == 1);
  rem::Trajectory one;
  one.states = {Vertex(5)};
  one.horizon = 2.5;
  const auto lt = rem::local_times(one);
  REQUIRE(lt.size() == 1);
  CHECK(lt[0].first == Vertex(5));
  CHECK(lt[0].second == 2.5);
}

TEST_CASE("holding times and successor law at a fixed vertex") {
  const rem::Environment env = sampled(8, 4);
  const rem::ChainSimulator sim(env, RateModel::FastY);
  const Vertex x(0x5a);
  double total = 0.0;
  std::vector<double> rates(8);
  for (int i = 0; i < 8; ++i) total += rates[i] = rem::rate(RateModel::FastY, env, x, x.flipped(i));
  CHECK(sim.exit_rate(x) == doctest::Approx(total).epsilon(1e-14));
  rem::Rng rng(12);
  const int visits = 10000;
  std::vector<double> holds;
  std::vector<double> counts(8, 0.0);
  for (int k = 0; k < visits; ++k) {
    auto [h, y] = sim.step(x, rng);
    holds.push_back(h);
    counts[static_cast<std::size_t>(std::countr_zero(x.code ^ y.code))] += 1.0;
  }
  const auto s = rem::stats::summarize(holds);
  CHECK(std::abs(s.mean - 1.0 / total) < 3.0 * s.std_error);
  for (int i = 0; i < 8; ++i) {
    const double p = rates[i] / total;
    const double sd = std::sqrt(visits * p * (1.0 - p));
    CHECK(std::abs(counts[i] - visits * p) <= 3.0 * sd + 1e-9);
  }
}

TEST_CASE("local times partition the horizon and average to nu") {
  const rem::Environment env = sampled(6, 6);
  const int runs = 400;
  const double horizon = 200.0;
  std::vector<std::vector<double>> frac(env.size(), std::vector<double>(runs, 0.0));
  for (int r = 0; r < runs; ++r) {
    const rem::Trajectory t = rem::simulate(env, RateModel::FastY, std::nullopt, horizon, 1000 + r);
    double sum = 0.0;
    for (const auto& [v, l] : rem::local_times(t)) {
      sum += l;
      frac[v.code][static_cast<std::size_t>(r)] = l / horizon;
    }
    REQUIRE(std::abs(sum - horizon) <= 1e-9 * horizon);
  }
  int outside = 0;
  for (std::size_t x = 0; x < env.size(); ++x) {
    const auto s = rem::stats::summarize(frac[x]);
    if (std::abs(s.mean - env.nu[static_cast<Eigen::Index>(x)]) > 3.0 * s.std_error) ++outside;
  }
  // 64 vertices at 3 sigma: a handful of exceedances would already be unusual.
  CHECK(outside <= 3);
}

TEST_CASE("clock values") {
  Eigen::VectorXd tau = Eigen::VectorXd::Constant(4, 0.5);
  tau[1] = 4.0;
  const rem::Environment env = planted(2, tau);
  rem::Trajectory stay;
  stay.states = {Vertex(1)};
  stay.horizon = 2.0;
  CHECK(rem::clock(stay, env, false, 2.0) == doctest::Approx(8.0));
  CHECK(rem::clock(stay, env, false, 1.0) == doctest::Approx(4.0));
  CHECK_THROWS_AS(rem::clock(stay, env, false, 3.0), rem::ConfigError);

  const rem::Environment big = sampled(12, 3);
  const rem::Trajectory t = rem::simulate(big, RateModel::FastY, std::nullopt, 500.0, 44);
  double s = 0.0;
  for (const auto& [v, l] : rem::local_times(t)) s += l * rem::clock_slope(big, v);
  CHECK(rem::clock(t, big, false, 500.0) == doctest::Approx(s).epsilon(1e-9));
  bool touched = false;
  for (Vertex v : t.states) touched = touched || big.is_deep[v.code];
  if (!touched) CHECK(rem::clock(t, big, true, 500.0) == 0.0);
  const std::vector<double> grid{100.0, 250.0, 500.0};
  const rem::ClockValues cv = rem::clock_on_grid(t, big, grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(cv.S[k] == doctest::Approx(rem::clock(t, big, false, grid[k])).epsilon(1e-12));
    CHECK(cv.SD[k] == doctest::Approx(rem::clock(t, big, true, grid[k])).epsilon(1e-12));
  }
}

TEST_CASE("clock never in the deep set") {
  Eigen::VectorXd tau = Eigen::VectorXd::Constant(8, 0.5);
  tau[7] = 1e12;
  const rem::Environment env = planted(3, tau);
  REQUIRE(env.deep.size() == 1);
  rem::Trajectory t;
  t.states = {Vertex(0), Vertex(1), Vertex(0)};
  t.jump_times = {0.5, 1.2};
  t.horizon = 3.0;
  CHECK(rem::clock(t, env, true, 3.0) == 0.0);
  CHECK(rem::clock(t, env, false, 3.0) == doctest::Approx(3.0));
}

TEST_CASE("time change reconstruction") {
  Eigen::VectorXd low(32);
  for (int i = 0; i < 32; ++i) low[i] = 0.1 + 0.8 * i / 31.0;
  const rem::Environment flat = planted(5, low);
  const rem::Trajectory y = rem::simulate(flat, RateModel::FastY, Vertex(0), 50.0, 3);
  const rem::Trajectory x = rem::time_change_reconstruct(y, flat);
  CHECK(x.states == y.states);
  CHECK(x.jump_times == y.jump_times);
  CHECK(x.horizon == doctest::Approx(y.horizon));

  const rem::Environment env = sampled(10, 9);
  const rem::Trajectory y2 = rem::simulate(env, RateModel::FastY, std::nullopt, 100.0, 8);
  const rem::Trajectory x2 = rem::time_change_reconstruct(y2, env);
  CHECK(x2.states == y2.states);
  CHECK(x2.horizon == doctest::Approx(rem::clock(y2, env, false, 100.0)).epsilon(1e-12));
}

TEST_CASE("hitting times") {
  const rem::Environment two = planted(1, Eigen::Vector2d(2.0, 0.5));
  const std::vector<std::uint8_t> target{1, 0};
  const rem::ChainSimulator sim(two, RateModel::FastY);
  rem::Rng rng(1);
  const rem::HitResult zero = rem::hit(sim, Vertex(0), target, rng);
  CHECK(zero.time == 0.0);
  CHECK_FALSE(zero.censored);

  std::vector<double> h;
  for (int k = 0; k < 20000; ++k) h.push_back(rem::hit(sim, sim.sample_stationary(rng), target, rng).time);
  const auto s = rem::stats::summarize(h);
  CHECK(std::abs(s.mean - 1.0 / 3.0) < 3.0 * s.std_error);
  CHECK(rem::mean_hitting_exact(two, Vertex(0)).e_nu == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const rem::Environment env = sampled(8, 10);
  const Vertex x(0x33);
  const auto exact = rem::mean_hitting_exact(env, x);
  const rem::ChainSimulator s8(env, RateModel::FastY);
  std::vector<std::uint8_t> tx(env.size(), 0);
  tx[x.code] = 1;
  std::vector<double> hs;
  for (int k = 0; k < 10000; ++k) hs.push_back(rem::hit(s8, s8.sample_stationary(rng), tx, rng).time);
  const auto m = rem::stats::summarize(hs);
  CHECK(std::abs(m.mean - exact.e_nu) < 3.0 * m.std_error);

  const rem::HitResult capped = rem::hit(s8, Vertex(0), tx, rng, 1);
  if (capped.censored) CHECK(capped.jumps == 1);
}
