// linsolve.hpp
// Dirichlet problems for the conductance Laplacian
//   (L u)(y) = sum_{z ~ y} c_yz (u(y) - u(z)),  c_yz = (tau_y ^ tau_z) / Z_N,
// which is diag(nu) times minus the generator of Y and therefore symmetric.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rem/environment.hpp"

namespace rem {

struct SolveOptions {
  /// Relative residual target ||b - L u|| / ||b|| for the iterative route.
  double tolerance = 1e-12;
  int max_iterations = 200000;
  /// Free sets up to this size are factorized directly (sparse LDLT).
  std::size_t direct_limit = 1u << 12;
  /// Edges with c_yz >= cluster_strength * min(diag_y, diag_z) are merged into
  /// preconditioner blocks of at most cluster_cap vertices.
  double cluster_strength = 0.25;
  std::size_t cluster_cap = 64;
  /// PCG restarts from the current iterate when the true residual misses.
  int restarts = 3;
  /// Componentwise backward error max_y |r_y| / (|L| |u| + |b|)_y accepted as
  /// converged: with conductances spanning e^{+-30} the normwise target can
  /// sit below rounding.
  double backward_floor = 1e-13;
};

struct SolveStats {
  std::string method;
  int iterations = 0;
  double relative_residual = 0.0;
  double backward_error = 0.0;
  bool converged = false;
};

/// L applied to a full-length vector.
Eigen::VectorXd apply_laplacian(const Environment& env, const Eigen::VectorXd& u);

/// Solves (L u)(y) = b(y) for every y with free[y] != 0, with u fixed to
/// `boundary` on the remaining vertices. Throws ViolationError when the
/// iterative solver does not reach the tolerance.
Eigen::VectorXd solve_dirichlet(const Environment& env, std::span<const std::uint8_t> free,
                                const Eigen::VectorXd& boundary, const Eigen::VectorXd& b,
                                const SolveOptions& opt = {}, SolveStats* stats = nullptr);

/// Preconditioned conjugate gradients on a symmetric positive (semi)definite
/// operator. Deterministic: fixed operation order, no restarts.
template <class Apply, class Precondition>
Eigen::VectorXd pcg(Apply&& apply, Precondition&& precondition, const Eigen::VectorXd& b, Eigen::VectorXd x,
                    double tolerance, int max_iterations, SolveStats& stats) {
  const double bnorm = b.norm();
  stats.method = "pcg";
  if (bnorm == 0.0) {
    x.setZero();
    stats.converged = true;
    return x;
  }
  Eigen::VectorXd r = b - apply(x);
  Eigen::VectorXd z = precondition(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  int k = 0;
  double rel = r.norm() / bnorm;
  while (rel > tolerance && k < max_iterations) {
    const Eigen::VectorXd ap = apply(p);
    const double step = rz / p.dot(ap);
    x.noalias() += step * p;
    r.noalias() -= step * ap;
    ++k;
    rel = r.norm() / bnorm;
    if (rel <= tolerance) break;
    z = precondition(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  stats.iterations = k;
  stats.relative_residual = rel;
  stats.converged = rel <= tolerance;
  return x;
}

}  // namespace rem
