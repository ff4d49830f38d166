// stats.hpp
// Small statistical toolkit for the Monte Carlo checks.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rem::stats {

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
};

/// Mean, unbiased variance and standard error of the mean.
Summary summarize(std::span<const double> xs);

/// Standard error from batch means over contiguous batches (falls back to the
/// plain estimate when fewer than two full batches are available).
double batch_means_se(std::span<const double> xs, std::size_t batches = 20);

double median(std::vector<double> xs);
double quantile(std::vector<double> xs, double q);

/// Asymptotic Kolmogorov survival function P[K > x].
double kolmogorov_sf(double x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample test against a continuous CDF, with the Stephens small-sample
/// correction sqrt(n) + 0.12 + 0.11/sqrt(n).
KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
};

/// Pearson independence test on a contingency table; rows or columns with zero
/// totals are dropped.
ChiSquareResult chi_square_independence(const Eigen::MatrixXd& table);

/// Goodness of fit of observed counts to expected probabilities; cells with
/// expected count below min_expected are pooled.
ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> probs,
                               double min_expected = 5.0);

/// Total variation distance between an empirical histogram and a law.
double total_variation(std::span<const double> counts, std::span<const double> probs);

}  // namespace rem::stats
