// linsolve.cpp
#include "rem/linsolve.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "rem/chain.hpp"
#include "rem/error.hpp"

namespace rem {

Eigen::VectorXd apply_laplacian(const Environment& env, const Eigen::VectorXd& u) {
  const int n = env.n();
  const double* tau = env.tau.data();
  const double invZ = 1.0 / env.Z;
  Eigen::VectorXd out(u.size());
  for (std::uint32_t y = 0; y < env.size(); ++y) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t z = y ^ (std::uint32_t{1} << i);
      acc += std::min(tau[y], tau[z]) * (u[y] - u[z]);
    }
    out[y] = acc * invZ;
  }
  return out;
}

namespace {

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Eigen::VectorXd solve_direct(const Environment& env, std::span<const std::uint8_t> free, const Eigen::VectorXd& rhs,
                             SolveStats& stats) {
  const int n = env.n();
  std::vector<std::int64_t> index(env.size(), -1);
  std::vector<std::uint32_t> vertices;
  for (std::uint32_t y = 0; y < env.size(); ++y)
    if (free[y]) {
      index[y] = static_cast<std::int64_t>(vertices.size());
      vertices.push_back(y);
    }
  const auto m = static_cast<Eigen::Index>(vertices.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(vertices.size() * static_cast<std::size_t>(n + 1));
  Eigen::VectorXd rhs_c(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const std::uint32_t y = vertices[static_cast<std::size_t>(k)];
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t z = y ^ (std::uint32_t{1} << i);
      const double c = conductance(env, Vertex(y), Vertex(z));
      diag += c;
      if (index[z] >= 0) trip.emplace_back(k, index[z], -c);
    }
    trip.emplace_back(k, k, diag);
    rhs_c[k] = rhs[y];
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw ViolationError("solve_dirichlet: LDLT factorization failed");
  Eigen::VectorXd u = ldlt.solve(rhs_c);
  // Two rounds of iterative refinement.
  for (int round = 0; round < 2; ++round) {
    const Eigen::VectorXd r = rhs_c - A * u;
    u += ldlt.solve(r);
  }
  const double bn = rhs_c.norm();
  stats.method = "ldlt";
  stats.iterations = 0;
  stats.relative_residual = bn > 0.0 ? (rhs_c - A * u).norm() / bn : 0.0;
  stats.converged = true;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(env.size()));
  for (Eigen::Index k = 0; k < m; ++k) out[vertices[static_cast<std::size_t>(k)]] = u[k];
  return out;
}

/// Block-Jacobi over clusters of strongly coupled free vertices. Adjacent
/// high-tau vertices form near-closed pairs whose relative mode stalls plain
/// Jacobi; solving each cluster exactly removes it.
class ClusterPreconditioner {
 public:
  ClusterPreconditioner(const Environment& env, std::span<const std::uint8_t> free, const Eigen::VectorXd& diag,
                        double strength, std::size_t cap)
      : inv_diag_(diag.size()) {
    const int n = env.n();
    const std::size_t size = env.size();
    struct Edge {
      double c;
      std::uint32_t u, v;
    };
    std::vector<Edge> strong;
    for (std::uint32_t y = 0; y < size; ++y) {
      if (!free[y]) continue;
      for (int i = 0; i < n; ++i) {
        const std::uint32_t z = y ^ (std::uint32_t{1} << i);
        if (z < y || !free[z]) continue;
        const double c = conductance(env, Vertex(y), Vertex(z));
        if (c >= strength * std::min(diag[y], diag[z])) strong.push_back({c, y, z});
      }
    }
    std::sort(strong.begin(), strong.end(), [](const Edge& a, const Edge& b) {
      return a.c != b.c ? a.c > b.c : (a.u != b.u ? a.u < b.u : a.v < b.v);
    });
    std::vector<std::uint32_t> parent(size);
    std::vector<std::uint32_t> count(size, 1);
    for (std::uint32_t y = 0; y < size; ++y) parent[y] = y;
    auto find = [&](std::uint32_t u) {
      while (parent[u] != u) u = parent[u] = parent[parent[u]];
      return u;
    };
    for (const Edge& e : strong) {
      std::uint32_t a = find(e.u), b = find(e.v);
      if (a == b || count[a] + count[b] > cap) continue;
      if (a > b) std::swap(a, b);
      parent[b] = a;
      count[a] += count[b];
    }
    std::vector<std::int64_t> block_of(size, -1);
    for (std::uint32_t y = 0; y < size; ++y) {
      inv_diag_[y] = free[y] ? 1.0 / diag[y] : 0.0;
      if (!free[y]) continue;
      const std::uint32_t r = find(y);
      if (count[r] < 2) continue;
      if (block_of[r] < 0) {
        block_of[r] = static_cast<std::int64_t>(members_.size());
        members_.emplace_back();
      }
      members_[static_cast<std::size_t>(block_of[r])].push_back(y);
    }
    factors_.reserve(members_.size());
    scratch_.resize(static_cast<Eigen::Index>(cap));
    for (const auto& m : members_) {
      const auto k = static_cast<Eigen::Index>(m.size());
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        a(i, i) = diag[m[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = i + 1; j < k; ++j) {
          const std::uint32_t u = m[static_cast<std::size_t>(i)], v = m[static_cast<std::size_t>(j)];
          if (std::popcount(u ^ v) == 1) a(i, j) = a(j, i) = -conductance(env, Vertex(u), Vertex(v));
        }
      }
      factors_.emplace_back(a);
    }
  }

  std::size_t blocks() const { return members_.size(); }

  Eigen::VectorXd operator()(const Eigen::VectorXd& r) const {
    Eigen::VectorXd z = r.cwiseProduct(inv_diag_);
    Eigen::VectorXd& local = scratch_;
    for (std::size_t b = 0; b < members_.size(); ++b) {
      const auto& m = members_[b];
      const auto k = static_cast<Eigen::Index>(m.size());
      for (Eigen::Index i = 0; i < k; ++i) local[i] = r[m[static_cast<std::size_t>(i)]];
      auto seg = local.head(k);
      factors_[b].matrixL().solveInPlace(seg);
      factors_[b].matrixU().solveInPlace(seg);
      for (Eigen::Index i = 0; i < k; ++i) z[m[static_cast<std::size_t>(i)]] = local[i];
    }
    return z;
  }

 private:
  Eigen::VectorXd inv_diag_;
  std::vector<std::vector<std::uint32_t>> members_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors_;
  mutable Eigen::VectorXd scratch_;
};

}  // namespace

Eigen::VectorXd solve_dirichlet(const Environment& env, std::span<const std::uint8_t> free,
                                const Eigen::VectorXd& boundary, const Eigen::VectorXd& b, const SolveOptions& opt,
                                SolveStats* stats_out) {
  const int n = env.n();
  const auto size = static_cast<Eigen::Index>(env.size());
  if (free.size() != env.size() || boundary.size() != size || b.size() != size)
    throw ConfigError("solve_dirichlet: vector sizes do not match 2^N");

  // Move the known boundary values to the right-hand side.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(size);
  std::size_t free_count = 0;
  for (std::uint32_t y = 0; y < env.size(); ++y) {
    if (!free[y]) continue;
    ++free_count;
    double acc = b[y], d = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t z = y ^ (std::uint32_t{1} << i);
      const double c = conductance(env, Vertex(y), Vertex(z));
      d += c;
      if (!free[z]) acc += c * boundary[z];
    }
    rhs[y] = acc;
    diag[y] = d;
  }

  SolveStats stats;
  Eigen::VectorXd u;
  if (free_count <= opt.direct_limit) {
    u = solve_direct(env, free, rhs, stats);
  } else {
    const double* tau = env.tau.data();
    const double invZ = 1.0 / env.Z;
    Eigen::VectorXd mask(size);
    for (Eigen::Index y = 0; y < size; ++y) mask[y] = free[static_cast<std::size_t>(y)] ? 1.0 : 0.0;
    // Iterates vanish off the free set, so neighbors need no mask test; the
    // fixed rows are zeroed at the end.
    auto apply = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd out(size);
      const double* w = v.data();
      for (std::uint32_t y = 0; y < env.size(); ++y) {
        const double ty = tau[y];
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const std::uint32_t z = y ^ (std::uint32_t{1} << i);
          acc += std::min(ty, tau[z]) * w[z];
        }
        out[y] = (diag[y] * w[y] - acc * invZ) * mask[y];
      }
      return out;
    };
    const ClusterPreconditioner precondition(env, free, diag, opt.cluster_strength, opt.cluster_cap);
    // |L| |v| for the componentwise backward error.
    auto apply_abs = [&](const Eigen::VectorXd& v) {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
      for (std::uint32_t y = 0; y < env.size(); ++y) {
        if (!free[y]) continue;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          const std::uint32_t z = y ^ (std::uint32_t{1} << i);
          if (free[z]) acc += std::min(tau[y], tau[z]) * std::abs(v[z]);
        }
        out[y] = diag[y] * std::abs(v[y]) + acc * invZ;
      }
      return out;
    };
    const double bnorm = std::max(rhs.norm(), 1e-300);
    u = Eigen::VectorXd::Zero(size);
    int total = 0;
    // Restarting from the current iterate replaces the drifting recursive
    // residual by the true one.
    for (int restart = 0; restart <= opt.restarts; ++restart) {
      u = pcg(apply, precondition, rhs, std::move(u), opt.tolerance, opt.max_iterations - total, stats);
      total += stats.iterations;
      const Eigen::VectorXd r = rhs - apply(u);
      stats.relative_residual = r.norm() / bnorm;
      const Eigen::VectorXd scale = apply_abs(u) + rhs.cwiseAbs();
      stats.backward_error = 0.0;
      for (Eigen::Index y = 0; y < size; ++y)
        if (scale[y] > 0.0) stats.backward_error = std::max(stats.backward_error, std::abs(r[y]) / scale[y]);
      if (stats.relative_residual <= opt.tolerance || stats.backward_error <= opt.backward_floor) break;
    }
    stats.iterations = total;
    stats.method = precondition.blocks() > 0 ? "pcg-cluster" : "pcg-jacobi";
    stats.converged = stats.relative_residual <= 10.0 * opt.tolerance || stats.backward_error <= opt.backward_floor;
    if (!stats.converged)
      throw ViolationError("solve_dirichlet: PCG stopped at relative residual " +
                           format_sci(stats.relative_residual) + " (backward error " +
                           format_sci(stats.backward_error) + ") after " + std::to_string(stats.iterations) +
                           " iterations");
  }
  for (std::uint32_t y = 0; y < env.size(); ++y)
    if (!free[y]) u[y] = boundary[y];
  if (stats_out) *stats_out = stats;
  return u;
}

}  // namespace rem
