// spectral.cpp
#include "rem/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "rem/chain.hpp"
#include "rem/error.hpp"
#include "rem/potential.hpp"

namespace rem {

namespace {

void require_budget(const Environment& env, int budget_n, const char* what) {
  if (env.n() > budget_n)
    throw BudgetError(std::string(what) + ": N = " + std::to_string(env.n()) + " exceeds the budget N <= " +
                      std::to_string(budget_n));
}

}  // namespace

Generator build_generator(const Environment& env, int budget_n) {
  require_budget(env, budget_n, "build_generator");
  const int n = env.n();
  const auto size = static_cast<Eigen::Index>(env.size());
  Generator q(size, size);
  q.reserve(Eigen::VectorXi::Constant(size, n + 1));
  for (std::uint32_t x = 0; x < env.size(); ++x) {
    double total = 0.0;
    // Row entries in increasing column order, diagonal included.
    std::vector<std::pair<std::uint32_t, double>> row;
    row.reserve(static_cast<std::size_t>(n + 1));
    for (int i = 0; i < n; ++i) {
      const Vertex y = Vertex(x).flipped(i);
      const double r = rate_unchecked(RateModel::FastY, env, Vertex(x), y);
      total += r;
      row.emplace_back(y.code, r);
    }
    row.emplace_back(x, -total);
    std::sort(row.begin(), row.end());
    for (const auto& [y, v] : row) q.insert(x, y) = v;
  }
  q.makeCompressed();
  return q;
}

GeneratorChecks check_generator(const Generator& q, const Eigen::VectorXd& nu) {
  GeneratorChecks c;
  Eigen::VectorXd nuq = Eigen::VectorXd::Zero(q.cols());
  const Eigen::VectorXd sq = nu.cwiseSqrt();
  double smax = 0.0, sdiff = 0.0;
  for (Eigen::Index x = 0; x < q.outerSize(); ++x) {
    double row = 0.0;
    for (Generator::InnerIterator it(q, x); it; ++it) {
      row += it.value();
      nuq[it.col()] += nu[x] * it.value();
      if (it.col() != x) {
        const double sxy = sq[x] * it.value() / sq[it.col()];
        const double syx = sq[it.col()] * q.coeff(it.col(), x) / sq[x];
        smax = std::max(smax, std::abs(sxy));
        sdiff = std::max(sdiff, std::abs(sxy - syx));
      }
    }
    c.max_row_sum = std::max(c.max_row_sum, std::abs(row));
  }
  c.symmetry_residual = smax > 0.0 ? sdiff / smax : 0.0;
  c.stationarity = nuq.cwiseAbs().maxCoeff();
  return c;
}

Eigen::MatrixXd symmetrized_dense(const Environment& env) {
  const int n = env.n();
  const auto size = static_cast<Eigen::Index>(env.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(size, size);
  for (std::uint32_t x = 0; x < env.size(); ++x) {
    double cx = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vertex y = Vertex(x).flipped(i);
      const double c = conductance(env, Vertex(x), y);
      cx += c;
      if (y.code > x) {
        const double v = -c / std::sqrt(env.nu[x] * env.nu[y.code]);
        b(x, y.code) = v;
        b(y.code, x) = v;
      }
    }
    b(x, x) = cx / env.nu[x];
  }
  return b;
}

double exact_gap(const Environment& env, int budget_n) {
  require_budget(env, budget_n, "exact_gap");
  if (env.size() < 2) throw ConfigError("exact_gap: needs at least two states");
  const Eigen::MatrixXd b = symmetrized_dense(env);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ViolationError("exact_gap: eigensolver did not converge");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double norm = b.cwiseAbs().rowwise().sum().maxCoeff();
  const double zero_tol = std::max(1e-9, 64.0 * std::numeric_limits<double>::epsilon() * norm);
  if (std::abs(ev[0]) > zero_tol)
    throw ViolationError("exact_gap: smallest eigenvalue " + std::to_string(ev[0]) + " is not zero");
  return ev[1];
}

GapEstimate estimate_gap(const Environment& env, int iterations, std::uint64_t seed, double tolerance,
                         const SolveOptions& opt) {
  const auto size = static_cast<Eigen::Index>(env.size());
  const Eigen::VectorXd& nu = env.nu;
  auto centre = [&](Eigen::VectorXd v) {
    v.array() -= nu.dot(v);
    return v;
  };
  auto rayleigh = [&](const Eigen::VectorXd& v) {
    return dirichlet_form(v, env) / nu.dot(v.cwiseAbs2());
  };
  Rng rng(seed);
  Eigen::VectorXd v(size);
  std::normal_distribution<double> normal;
  for (Eigen::Index y = 0; y < size; ++y) v[y] = normal(rng.engine());
  v = centre(std::move(v));
  v /= std::sqrt(nu.dot(v.cwiseAbs2()));

  // L is singular with kernel 1; nu * v sums to zero, so the system is consistent.
  std::vector<std::uint8_t> free(env.size(), 1);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(size);
  SolveOptions o = opt;
  o.direct_limit = 0;
  o.tolerance = std::max(o.tolerance, 1e-9);
  GapEstimate est;
  double prev = rayleigh(v);
  est.lambda = prev;
  for (int k = 0; k < iterations; ++k) {
    SolveStats st;
    Eigen::VectorXd rhs = nu.cwiseProduct(v);
    Eigen::VectorXd w;
    try {
      w = solve_dirichlet(env, free, zero, rhs, o, &st);
    } catch (const ViolationError&) {
      // Singular system: the residual floor can sit above the tolerance; the
      // Rayleigh quotient is still an upper bound on the gap.
      o.tolerance *= 10.0;
      w = solve_dirichlet(env, free, zero, rhs, o, &st);
    }
    w = centre(std::move(w));
    w /= std::sqrt(nu.dot(w.cwiseAbs2()));
    v = std::move(w);
    const double r = rayleigh(v);
    est.iterations = k + 1;
    est.change = std::abs(r - prev) / r;
    est.lambda = r;
    prev = r;
    if (est.change < tolerance) break;
  }
  return est;
}

std::vector<std::uint8_t> path_good_flags(const Environment& env) {
  const double threshold = -env.params.beta * env.params.constants.C0 * std::log(static_cast<double>(env.n()));
  std::vector<std::uint8_t> good(env.size());
  for (std::size_t x = 0; x < env.size(); ++x) good[x] = env.log_tau[static_cast<Eigen::Index>(x)] >= threshold;
  return good;
}

PoincareResult poincare_bound(const Environment& env, const PathSet& paths) {
  if (paths.dimension() != env.n() || paths.table().empty())
    throw ConfigError("poincare_bound: congestion table missing or built for another dimension");
  const int n = env.n();
  double worst = 0.0;
  PoincareResult res;
  for (std::uint32_t u = 0; u < env.size(); ++u)
    for (int i = 0; i < n; ++i) {
      if (u >> i & 1u) continue;
      const double cong = paths.congestion(Vertex(u), i);
      if (cong <= 0.0) continue;
      const double ratio = cong / conductance(env, Vertex(u), Vertex(u).flipped(i));
      if (ratio > worst) {
        worst = ratio;
        res.edge_u = Vertex(u);
        res.edge_bit = i;
      }
    }
  res.bound = 1.0 / worst;
  return res;
}

std::size_t count_interior_violations(const Environment& env, std::size_t pairs, std::uint64_t seed) {
  const std::vector<std::uint8_t> good = path_good_flags(env);
  const GoodFlags pred{good};
  const double threshold = -env.params.beta * env.params.constants.C0 * std::log(static_cast<double>(env.n()));
  Rng rng(seed);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Vertex x(static_cast<std::uint32_t>(rng.below(env.size())));
    Vertex y(static_cast<std::uint32_t>(rng.below(env.size())));
    if (x == y) continue;
    const Path p = build_path(x, y, pred, env.n());
    // Interior edges: all but the first and the last.
    for (std::size_t i = 2; i + 1 < p.size(); ++i)
      if (std::min(env.log_tau[p[i - 1].code], env.log_tau[p[i].code]) < threshold) ++bad;
  }
  return bad;
}

Eigen::MatrixXd transition_kernel(const Environment& env, double t, int budget_n) {
  require_budget(env, budget_n, "transition_kernel");
  if (!(t >= 0.0)) throw ConfigError("transition_kernel: negative time");
  const auto size = static_cast<Eigen::Index>(env.size());
  if (t == 0.0) return Eigen::MatrixXd::Identity(size, size);
  const Generator q = build_generator(env, budget_n);
  double lambda = 0.0;
  for (Eigen::Index x = 0; x < size; ++x) lambda = std::max(lambda, -q.coeff(x, x));
  // Jump kernel K = I + Q / Lambda.
  Eigen::MatrixXd k = Eigen::MatrixXd(q) / lambda;
  k.diagonal().array() += 1.0;

  int squarings = 0;
  double a = lambda * t;
  if (a > 1.0) {
    squarings = static_cast<int>(std::ceil(std::log2(a)));
    a = std::ldexp(a, -squarings);
  }
  // Poisson(a) weights, a <= 1.
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(size, size) * std::exp(-a);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(size, size);
  double weight = std::exp(-a), mass = weight;
  for (int j = 1; 1.0 - mass > 1e-17 && weight > 1e-300; ++j) {
    power = power * k;
    weight *= a / j;
    mass += weight;
    p.noalias() += weight * power;
    if (j > 200) break;
  }
  for (int s = 0; s < squarings; ++s) {
    p = p * p;
    p.array().colwise() /= p.rowwise().sum().array();
  }
  return p;
}

double mix_defect(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& nu) {
  return (kernel.rowwise() - nu.transpose()).cwiseAbs().maxCoeff();
}

double max_tv(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& nu) {
  return 0.5 * (kernel.rowwise() - nu.transpose()).cwiseAbs().rowwise().sum().maxCoeff();
}

double minorization_ratio(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& nu) {
  const double a = 1.0 - std::exp(-1.0);
  return (kernel.array().rowwise() / (a * nu.transpose().array())).minCoeff();
}

StrongStationarySampler::StrongStationarySampler(Eigen::MatrixXd kernel, Eigen::VectorXd nu, double block)
    : kernel_(std::move(kernel)), nu_(std::move(nu)), block_(block) {
  ratio_ = minorization_ratio(kernel_, nu_);
  if (ratio_ < 1.0)
    throw ViolationError("strong stationary time: minorization P_m[x][y] >= (1-1/e) nu_y fails (ratio " +
                         std::to_string(ratio_) + ")");
  cdf_ = kernel_;
  for (Eigen::Index j = 1; j < cdf_.cols(); ++j) cdf_.col(j) += cdf_.col(j - 1);
}

MixSample StrongStationarySampler::sample(Vertex start, Rng& rng, int max_blocks) const {
  const double a = 1.0 - std::exp(-1.0);
  Eigen::Index z = start.code;
  const Eigen::Index cols = cdf_.cols();
  for (int k = 1; k <= max_blocks; ++k) {
    const double u = rng.uniform() * cdf_(z, cols - 1);
    Eigen::Index lo = 0, hi = cols - 1;
    while (lo < hi) {
      const Eigen::Index mid = (lo + hi) / 2;
      if (cdf_(z, mid) > u)
        hi = mid;
      else
        lo = mid + 1;
    }
    const Eigen::Index y = lo;
    const double accept = a * nu_[y] / kernel_(z, y);
    if (rng.uniform() < accept) return {k * block_, k, Vertex(static_cast<std::uint32_t>(y))};
    z = y;
  }
  throw BudgetError("strong stationary time: no acceptance within " + std::to_string(max_blocks) + " blocks");
}

MixingBlock find_mixing_block(const Environment& env, double base, int max_multiple, int budget_n) {
  MixingBlock mb;
  mb.base = base;
  const Eigen::MatrixXd pb = transition_kernel(env, base, budget_n);
  Eigen::MatrixXd p = pb;
  for (int k = 1; k <= max_multiple; ++k) {
    if (k > 1) p = p * pb;
    if (minorization_ratio(p, env.nu) >= 1.0) {
      mb.multiple = k;
      mb.block = k * base;
      mb.kernel = std::move(p);
      return mb;
    }
  }
  throw BudgetError("find_mixing_block: minorization fails up to " + std::to_string(max_multiple) +
                    " multiples of the base block");
}

double spectral_mixing_block(const Environment& env, double lambda) {
  const double nu_min = env.nu.minCoeff();
  return 4.0 * (1.0 + 0.5 * std::log(1.0 / nu_min)) / lambda;
}

}  // namespace rem
