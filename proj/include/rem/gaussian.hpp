// gaussian.hpp
// Standard normal distribution helpers used by environment sampling.
//
// Sampling goes through the quantile function (Wichura's AS 241, PPND16,
// relative accuracy about 1e-16), so draws conditioned on a tail or on the
// body are exact restrictions of the same transform.
#pragma once

namespace rem::gaussian {

double pdf(double x);
inline double log_pdf(double x) { return -0.5 * x * x - 0.91893853320467274178; }
double cdf(double x);
/// Upper tail P[Z > x], accurate far into the tail.
double sf(double x);
/// log P[Z > x], finite for every finite x.
double log_sf(double x);
/// Inverse of cdf on (0, 1).
double quantile(double p);

/// Z conditioned on Z > a, from a uniform u in (0, 1).
double upper_tail_from_uniform(double a, double u);
/// Z conditioned on Z < a, from a uniform u in (0, 1).
double lower_body_from_uniform(double a, double u);

}  // namespace rem::gaussian
