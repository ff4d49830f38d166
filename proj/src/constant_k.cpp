// constant_k.cpp
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rem/analysis.hpp"
#include "rem/error.hpp"

namespace rem {

double constant_K_closed(double alpha) { return boost::math::tgamma(1.0 - alpha); }

KConstantReport constant_K(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("constant_K: alpha must lie in (0,1)");
  if (!(beta > 0.0)) throw ConfigError("constant_K: beta must be positive");
  KConstantReport r;
  r.alpha = alpha;
  r.beta = beta;
  // Cut where e^{beta z} = 1e-3 below and e^{beta z} = 60 above.
  const double lo = std::log(1e-3) / beta;
  const double hi = std::log(60.0) / beta;

  // Left tail from 1 - e^{-w} = sum_k (-1)^{k+1} w^k / k!, w = e^{beta z}.
  double w = std::exp(beta * lo), wk = 1.0, fact = 1.0;
  for (int k = 1; k <= 12; ++k) {
    wk *= w;
    fact *= k;
    r.left_tail += (k % 2 ? 1.0 : -1.0) * wk * std::exp(-alpha * beta * lo) / (fact * (k - alpha) * beta);
  }
  // Right tail: int e^{-alpha beta z} dz minus a term below e^{-60}.
  r.right_tail = std::exp(-alpha * beta * hi) / (alpha * beta);

  auto f = [&](double z) { return std::exp(-alpha * beta * z) * -std::expm1(-std::exp(beta * z)); };
  double err = 0.0;
  const double body = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20, 1e-15, &err);
  r.integral_C = r.left_tail + body + r.right_tail;
  r.error_estimate = err * alpha * beta;
  r.K_quadrature = alpha * beta * r.integral_C;
  r.K_closed_form = constant_K_closed(alpha);
  if (!std::isfinite(r.K_quadrature)) throw ViolationError("constant_K: quadrature did not converge");
  return r;
}

}  // namespace rem
