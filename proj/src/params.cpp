// params.cpp
#include "rem/params.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

#include "rem/error.hpp"

namespace rem {

namespace {

[[noreturn]] void reject(const std::string& what) { throw ConfigError("invalid parameters: " + what); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

double log_trap_scale(double a, double beta, int n) {
  const double nn = static_cast<double>(n);
  return a * beta * beta * nn - std::log(a * beta * std::sqrt(2.0 * std::numbers::pi * nn)) / a;
}

Scales validate_params(const RemParams& p) {
  if (p.n < 1) reject("N must be at least 1 (got " + std::to_string(p.n) + ")");
  if (p.n > p.max_n)
    throw BudgetError("environment of dimension " + std::to_string(p.n) + " exceeds the memory cap N <= " +
                      std::to_string(p.max_n));
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) reject("beta must be positive (got " + fmt(p.beta) + ")");
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) reject("alpha must lie in (0,1) (got " + fmt(p.alpha) + ")");

  Scales s;
  s.n = p.n;
  s.beta = p.beta;
  s.alpha = p.alpha;
  s.beta_c = critical_beta();
  s.gamma = p.alpha * p.alpha * p.beta * p.beta / (s.beta_c * s.beta_c);
  if (!(s.gamma > 0.5 && s.gamma < 1.0))
    reject("gamma = alpha^2 beta^2 / beta_c^2 = " + fmt(s.gamma) + " must lie in (1/2, 1)");
  s.epsilon0 = std::min(1.0 - s.gamma, s.gamma - 0.5) / 2.0;
  s.gamma_prime = p.gamma_prime.value_or(s.gamma - s.epsilon0);
  if (!(s.gamma_prime > 0.5 && s.gamma_prime < s.gamma))
    reject("gamma' = " + fmt(s.gamma_prime) + " must lie in (1/2, gamma) = (0.5, " + fmt(s.gamma) + ")");

  const Constants& c = p.constants;
  if (!(c.kappa > 0.0 && c.kappa < 0.5)) reject("kappa must lie in (0, 1/2) (got " + fmt(c.kappa) + ")");
  if (!(c.C0 > 0.0)) reject("C0 must be positive (got " + fmt(c.C0) + ")");
  if (!(c.delta > 0.0 && c.delta < 1.0 / 6.0)) reject("delta must lie in (0, 1/6) (got " + fmt(c.delta) + ")");
  if (c.K_ball < 1) reject("K_ball must be a positive integer (got " + std::to_string(c.K_ball) + ")");
  const double ab2 = p.alpha * p.beta * p.beta;
  if (!(c.delta_shallow > 0.0) ||
      !((c.delta_shallow - 1.0) * ab2 + p.alpha * p.alpha * p.beta * p.beta / 2.0 < 0.0))
    reject("shallow exponent delta_s = " + fmt(c.delta_shallow) +
           " must be positive with (delta_s - 1) alpha beta^2 + alpha^2 beta^2 / 2 < 0");

  s.alpha_prime = s.beta_c / p.beta * std::sqrt(s.gamma_prime);
  s.log_g = log_trap_scale(p.alpha, p.beta, p.n);
  s.log_g_prime = log_trap_scale(s.alpha_prime, p.beta, p.n);
  s.log_h = c.delta_shallow * ab2 * p.n;
  s.log_m = std::log(8.0 / c.kappa) + (c.K_ball + 3 + p.beta * c.C0) * std::log(static_cast<double>(p.n));
  return s;
}

}  // namespace rem
