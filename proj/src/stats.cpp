// stats.cpp
#include "rem/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace rem::stats {

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  // Welford's update.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  s.mean = mean;
  s.variance = k > 1 ? m2 / static_cast<double>(k - 1) : 0.0;
  s.std_error = std::sqrt(s.variance / static_cast<double>(k));
  return s;
}

double batch_means_se(std::span<const double> xs, std::size_t batches) {
  const std::size_t size = xs.size() / std::max<std::size_t>(batches, 1);
  if (batches < 2 || size == 0) return summarize(xs).std_error;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) means.push_back(summarize(xs.subspan(b * size, size)).mean);
  return summarize(means).std_error;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.27) return 1.0;
  // 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

KsResult ks_from_statistic(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  return {d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d)};
}

}  // namespace

KsResult ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return ks_from_statistic(d, n);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return ks_from_statistic(d, na * nb / (na + nb));
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

ChiSquareResult chi_square_independence(const Eigen::MatrixXd& table) {
  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < table.rows(); ++i)
    if (table.row(i).sum() > 0.0) rows.push_back(i);
  for (Eigen::Index j = 0; j < table.cols(); ++j)
    if (table.col(j).sum() > 0.0) cols.push_back(j);
  ChiSquareResult r;
  if (rows.size() < 2 || cols.size() < 2) {
    r.p_value = 1.0;
    return r;
  }
  const double total = table.sum();
  for (Eigen::Index i : rows)
    for (Eigen::Index j : cols) {
      const double e = table.row(i).sum() * table.col(j).sum() / total;
      const double d = table(i, j) - e;
      r.statistic += d * d / e;
    }
  r.dof = static_cast<double>((rows.size() - 1) * (cols.size() - 1));
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> probs,
                               double min_expected) {
  const double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  ChiSquareResult r;
  double pool_o = 0.0, pool_e = 0.0;
  int cells = 0;
  auto add = [&](double o, double e) {
    r.statistic += (o - e) * (o - e) / e;
    ++cells;
  };
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * total;
    if (e < min_expected) {
      pool_o += observed[i];
      pool_e += e;
      if (pool_e >= min_expected) {
        add(pool_o, pool_e);
        pool_o = pool_e = 0.0;
      }
    } else {
      add(observed[i], e);
    }
  }
  if (pool_e > 0.0) add(pool_o, pool_e);
  r.dof = std::max(0, cells - 1);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

double total_variation(std::span<const double> counts, std::span<const double> probs) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double tv = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) tv += std::abs(counts[i] / total - probs[i]);
  return 0.5 * tv;
}

}  // namespace rem::stats
