// chain.cpp
#include "rem/chain.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace rem {

double rate(RateModel m, const Environment& env, Vertex x, Vertex y) {
  if (hamming_distance(x, y) != 1)
    throw ConfigError("rate: vertices are not neighbors (distance " + std::to_string(hamming_distance(x, y)) + ")");
  return rate_unchecked(m, env, x, y);
}

double detailed_balance_residual(const Environment& env, RateModel m) {
  const Eigen::VectorXd& w = m == RateModel::FastY ? env.nu : env.tau;
  return detailed_balance_residual(env, w, [&](Vertex x, Vertex y) { return rate_unchecked(m, env, x, y); });
}

ChainSimulator::ChainSimulator(const Environment& env, RateModel model) : env_(env), model_(model) {
  cdf_.resize(env.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < env.size(); ++x) {
    acc += env.nu[static_cast<Eigen::Index>(x)];
    cdf_[x] = acc;
  }
}

double ChainSimulator::exit_rate(Vertex x) const {
  double total = 0.0;
  for (int i = 0; i < env_.n(); ++i) total += rate_unchecked(model_, env_, x, x.flipped(i));
  return total;
}

Vertex ChainSimulator::sample_stationary(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return Vertex(static_cast<std::uint32_t>(it - cdf_.begin()));
}

std::pair<double, Vertex> ChainSimulator::step(Vertex x, Rng& rng) const {
  const int n = env_.n();
  const double* tau = env_.tau.data();
  const double tx = tau[x.code];
  const double denom = std::min(1.0, tx) * (model_ == RateModel::FastY ? 1.0 : std::max(1.0, tx));
  std::array<double, 32> w;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = std::min(tx, tau[x.code ^ (std::uint32_t{1} << i)]);
    total += w[static_cast<std::size_t>(i)];
  }
  const double hold = -std::log(rng.uniform_open()) * denom / total;
  double u = rng.uniform() * total;
  int k = 0;
  for (; k < n - 1; ++k) {
    u -= w[static_cast<std::size_t>(k)];
    if (u < 0.0) break;
  }
  return {hold, x.flipped(k)};
}

Trajectory ChainSimulator::simulate(Vertex start, double horizon, Rng& rng, std::uint64_t jump_budget) const {
  if (!(horizon >= 0.0)) throw ConfigError("simulate: horizon must be nonnegative");
  Trajectory tr;
  tr.horizon = horizon;
  if (horizon == 0.0) {
    tr.states.push_back(start);
    return tr;
  }
  const double reached = run(
      start, horizon, rng,
      [&](Vertex x, double, double t1) {
        tr.states.push_back(x);
        if (t1 < horizon) tr.jump_times.push_back(t1);
      },
      jump_budget);
  if (reached < horizon) {
    tr.truncated = true;
    tr.horizon = reached;
    if (tr.jump_times.size() == tr.states.size()) tr.jump_times.pop_back();
  }
  return tr;
}

Trajectory simulate(const Environment& env, RateModel model, std::optional<Vertex> start, double horizon,
                    std::uint64_t traj_seed, std::uint64_t jump_budget) {
  ChainSimulator sim(env, model);
  Rng rng(traj_seed);
  const Vertex x0 = start ? *start : sim.sample_stationary(rng);
  return sim.simulate(x0, horizon, rng, jump_budget);
}

std::vector<std::pair<Vertex, double>> local_times(const Trajectory& traj) {
  std::vector<std::pair<Vertex, double>> seg;
  seg.reserve(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    seg.emplace_back(traj.states[i], traj.segment_end(i) - traj.segment_start(i));
  std::stable_sort(seg.begin(), seg.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Vertex, double>> out;
  for (const auto& [v, d] : seg) {
    if (!out.empty() && out.back().first == v)
      out.back().second += d;
    else
      out.emplace_back(v, d);
  }
  return out;
}

double clock(const Trajectory& traj, const Environment& env, bool deep_only, double t) {
  if (t > traj.horizon) throw ConfigError("clock: time beyond the trajectory horizon");
  double s = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double a = traj.segment_start(i);
    if (a >= t) break;
    const Vertex x = traj.states[i];
    if (deep_only && !env.is_deep[x.code]) continue;
    s += (std::min(traj.segment_end(i), t) - a) * clock_slope(env, x);
  }
  return s;
}

ClockValues clock_on_grid(const Trajectory& traj, const Environment& env, std::span<const double> grid) {
  ClockValues out;
  out.S.reserve(grid.size());
  out.SD.reserve(grid.size());
  double s = 0.0, sd = 0.0;
  std::size_t i = 0;
  for (double t : grid) {
    if (t > traj.horizon) throw ConfigError("clock_on_grid: time beyond the trajectory horizon");
    // Complete segments ending before t.
    while (i < traj.states.size() && traj.segment_end(i) <= t) {
      const double w = (traj.segment_end(i) - traj.segment_start(i)) * clock_slope(env, traj.states[i]);
      s += w;
      if (env.is_deep[traj.states[i].code]) sd += w;
      ++i;
    }
    double ps = s, psd = sd;
    if (i < traj.states.size() && traj.segment_start(i) < t) {
      const double w = (t - traj.segment_start(i)) * clock_slope(env, traj.states[i]);
      ps += w;
      if (env.is_deep[traj.states[i].code]) psd += w;
    }
    out.S.push_back(ps);
    out.SD.push_back(psd);
  }
  return out;
}

Trajectory time_change_reconstruct(const Trajectory& y, const Environment& env) {
  Trajectory x;
  x.states = y.states;
  x.truncated = y.truncated;
  x.jump_times.reserve(y.jump_times.size());
  double t = 0.0;
  for (std::size_t i = 0; i < y.states.size(); ++i) {
    t += (y.segment_end(i) - y.segment_start(i)) * clock_slope(env, y.states[i]);
    if (i < y.jump_times.size()) x.jump_times.push_back(t);
  }
  x.horizon = t;
  return x;
}

HitResult hit(const ChainSimulator& sim, Vertex start, std::span<const std::uint8_t> targets, Rng& rng,
              std::uint64_t cap, bool return_time) {
  HitResult r;
  Vertex x = start;
  if (!return_time && targets[x.code]) {
    r.vertex = x;
    return r;
  }
  double t = 0.0;
  for (; r.jumps < cap;) {
    auto [hold, next] = sim.step(x, rng);
    t += hold;
    x = next;
    ++r.jumps;
    if (targets[x.code]) {
      r.time = t;
      r.vertex = x;
      return r;
    }
  }
  r.time = t;
  r.vertex = x;
  r.censored = true;
  return r;
}

}  // namespace rem
