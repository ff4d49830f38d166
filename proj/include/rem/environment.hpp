// environment.hpp
// REM landscapes: energies, Gibbs weights, the stationary law of the fast
// chain and the deep-trap set, plus the two-step sampling used for
// quasi-annealed averages.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rem/hypercube.hpp"
#include "rem/params.hpp"

namespace rem {

struct Environment {
  RemParams params;
  Scales scales;
  Eigen::VectorXd energy;
  /// beta sqrt(N) E_x.
  Eigen::VectorXd log_tau;
  /// exp(log_tau), cached once so rates never call exp.
  Eigen::VectorXd tau;
  double Z = 0.0;
  Eigen::VectorXd nu;
  std::vector<Vertex> deep;
  std::vector<std::uint8_t> is_deep;

  int n() const { return scales.n; }
  std::size_t size() const { return static_cast<std::size_t>(energy.size()); }
  double kappa_ratio() const { return Z / static_cast<double>(size()); }
  /// |D_N| 2^{(gamma'-1) N}, the deep-trap density statistic.
  double deep_density_ratio() const;
};

/// Builds every derived field from the energies.
Environment assemble_environment(const RemParams& p, const Scales& s, Eigen::VectorXd energy);
/// Planted environment from Gibbs weights (energies are log(tau)/(beta sqrt N)).
Environment environment_from_tau(const RemParams& p, const Eigen::VectorXd& tau);

/// i.i.d. standard Gaussian energies drawn sequentially from one stream seeded
/// by p.env_seed.
Environment sample_environment(const RemParams& p);

struct TwoStepEnvironment {
  std::vector<std::uint8_t> xi;
  /// Upper-tail energies on {xi = 1}; zero elsewhere.
  Eigen::VectorXd e_bar;
  /// Body energies on {xi = 0}; zero elsewhere.
  Eigen::VectorXd e_under;
  double deep_probability = 0.0;
  Environment env;
};

TwoStepEnvironment sample_two_step(const RemParams& p);
/// Fresh deep energies from an independent stream; xi and e_under are kept.
TwoStepEnvironment resample_deep_energies(const TwoStepEnvironment& e, std::uint64_t seed);

struct SeparationReport {
  std::size_t deep_count = 0;
  double size_ratio = 0.0;
  /// Minimum Hamming distance over deep pairs; max int when fewer than two.
  int min_distance = std::numeric_limits<int>::max();
  bool separated = true;
};

SeparationReport check_separation(const Environment& env);

struct ShallowSlices {
  /// slices[i-1] holds S^i = {h_N < tau < g'_N, tau in [2^{-i} g'_N, 2^{-i+1} g'_N)}.
  std::vector<std::vector<Vertex>> slices;
  std::vector<Vertex> very_shallow;
  /// |S^i| / (2^{alpha' i} 2^{(1-gamma') N}), the size diagnostic.
  std::vector<double> size_ratio;
  int count() const { return static_cast<int>(slices.size()); }
};

ShallowSlices shallow_slices(const Environment& env);
/// 0 for very shallow (tau <= h_N), i >= 1 for slice i, -1 for deep.
std::vector<int> slice_labels(const Environment& env);

/// Binary export: "REMENV1\0", parameters, then 2^N little-endian doubles.
void write_environment(std::ostream& os, const Environment& env);
Environment read_environment(std::istream& is);
void write_environment_csv(std::ostream& os, const Environment& env);

}  // namespace rem
