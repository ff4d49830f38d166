// params.hpp
// Model parameters and the deterministic scales derived from them.
//
// The large scales g_N, g'_N, h_N and m_N overflow doubles quickly, so only
// their natural logarithms are stored.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

namespace rem {

struct Constants {
  double kappa = 0.25;
  double C0 = 6.56;
  double delta = 0.1;
  /// Exponent of the shallow cutoff h_N = exp(delta_shallow * alpha * beta^2 * N).
  double delta_shallow = 0.05;
  int K_ball = 9;
};

struct RemParams {
  int n = 12;
  double beta = 1.4;
  double alpha = 0.7;
  std::optional<double> gamma_prime;
  std::uint64_t env_seed = 1;
  Constants constants;
  /// Environments above this dimension are refused (2^26 doubles = 512 MiB).
  int max_n = 26;
};

struct Scales {
  int n = 0;
  double beta = 0.0;
  double alpha = 0.0;
  double beta_c = 0.0;
  double gamma = 0.0;
  double gamma_prime = 0.0;
  double alpha_prime = 0.0;
  double epsilon0 = 0.0;
  double log_g = 0.0;
  double log_g_prime = 0.0;
  double log_h = 0.0;
  double log_m = 0.0;

  double g() const { return std::exp(log_g); }
  double g_prime() const { return std::exp(log_g_prime); }
  double m() const { return std::exp(log_m); }
  /// Deep-trap energy threshold log(g'_N) / (beta sqrt N).
  double energy_threshold() const { return log_g_prime / (beta * std::sqrt(static_cast<double>(n))); }
  /// 2^{(gamma' - gamma) N}, the prefactor of the local-time functional.
  double epsilon_n() const { return std::exp2((gamma_prime - gamma) * n); }
};

inline double critical_beta() { return std::sqrt(2.0 * std::log(2.0)); }

/// log of e^{a beta^2 N} (a beta sqrt(2 pi N))^{-1/a}; g_N for a = alpha, g'_N for a = alpha'.
double log_trap_scale(double a, double beta, int n);

/// Checks every admissibility condition and derives the scales. Throws
/// ConfigError naming the first violated condition.
Scales validate_params(const RemParams& p);

}  // namespace rem
