// stable.cpp
#include <cmath>
#include <numbers>

#include "rem/analysis.hpp"
#include "rem/error.hpp"

namespace rem {

double sample_one_sided_stable(double alpha, Rng& rng) {
  // Kanter's representation: with U ~ U(0, pi) and W ~ Exp(1),
  // (A(U) / W)^{(1-alpha)/alpha} has Laplace transform exp(-lambda^alpha), where
  // A(u) = sin(alpha u)^{alpha/(1-alpha)} sin((1-alpha) u) / sin(u)^{1/(1-alpha)}.
  const double u = std::numbers::pi * rng.uniform_open();
  const double w = rng.exponential(1.0);
  const double a = std::pow(std::sin(alpha * u), alpha / (1.0 - alpha)) * std::sin((1.0 - alpha) * u) /
                   std::pow(std::sin(u), 1.0 / (1.0 - alpha));
  return std::pow(a / w, (1.0 - alpha) / alpha);
}

Eigen::MatrixXd simulate_stable_subordinator(double alpha, double K, std::span<const double> t_grid,
                                             std::uint64_t seed, std::size_t n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("stable subordinator: alpha must lie in (0,1)");
  if (!(K > 0.0)) throw ConfigError("stable subordinator: K must be positive");
  double prev = 0.0;
  for (double t : t_grid) {
    if (!(t > prev)) throw ConfigError("stable subordinator: t grid must be positive and increasing");
    prev = t;
  }
  const auto cols = static_cast<Eigen::Index>(t_grid.size());
  Eigen::MatrixXd paths(static_cast<Eigen::Index>(n), cols);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {i}));
    double v = 0.0, t0 = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double dt = t_grid[static_cast<std::size_t>(j)] - t0;
      v += std::pow(K * dt, 1.0 / alpha) * sample_one_sided_stable(alpha, rng);
      paths(static_cast<Eigen::Index>(i), j) = v;
      t0 = t_grid[static_cast<std::size_t>(j)];
    }
  }
  return paths;
}

}  // namespace rem
