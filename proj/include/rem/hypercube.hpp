// hypercube.hpp
// Bit-coded geometry of the hypercube {-1,1}^N and the canonical path system
// that routes around low-weight vertices.
//
// Coding: bit i of Vertex::code is spin coordinate i+1; a set bit is spin +1.
#pragma once

#include <bit>
#include <concepts>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace rem {

struct Vertex {
  std::uint32_t code = 0;

  constexpr Vertex() = default;
  constexpr explicit Vertex(std::uint32_t c) : code(c) {}

  /// The vertex differing from this one exactly in coordinate bit `i`.
  constexpr Vertex flipped(int i) const { return Vertex(code ^ (std::uint32_t{1} << i)); }

  friend constexpr bool operator==(Vertex a, Vertex b) = default;
  friend constexpr auto operator<=>(Vertex a, Vertex b) = default;
};

std::ostream& operator<<(std::ostream& os, Vertex v);

using Path = std::vector<Vertex>;

/// Any callable classifying vertices as good.
template <class P>
concept GoodPredicate = std::predicate<const P&, Vertex>;

inline constexpr std::uint64_t vertex_count(int n) { return std::uint64_t{1} << n; }

inline int hamming_distance(Vertex x, Vertex y) { return std::popcount(x.code ^ y.code); }

/// Neighbors in bit order 0..n-1.
std::vector<Vertex> neighbors(Vertex x, int n);

/// All vertices at distance exactly r, in increasing order of the flip mask.
std::vector<Vertex> enumerate_sphere(Vertex x, int r, int n);
/// All vertices at distance at most r, sphere by sphere.
std::vector<Vertex> enumerate_ball(Vertex x, int r, int n);

/// Flips the disagreeing coordinates of x and y in increasing coordinate order.
Path flip_path(Vertex x, Vertex y);

/// Number of edges of a path (its length).
inline std::size_t path_length(const Path& p) { return p.empty() ? 0 : p.size() - 1; }

/// True when consecutive vertices are at distance one.
bool is_nearest_neighbor(const Path& p);
bool is_self_avoiding(const Path& p);

/// Chronological loop erasure: scanning forward, a revisit of an earlier vertex
/// cuts the path back to that first occurrence.
Path loop_erase(const Path& p);

/// Hex dump of a path, one path per line ("0x0 0x1 0x3").
void write_path(std::ostream& os, const Path& p);

struct PhiImage {
  Vertex image;
  bool no_good_neighbor = false;
};

/// Embedding into good vertices: x if good, else its first good neighbor by
/// coordinate, else x itself with the flag set.
template <GoodPredicate P>
PhiImage embed_phi(Vertex x, const P& good, int n) {
  if (good(x)) return {x, false};
  for (int i = 0; i < n; ++i) {
    Vertex y = x.flipped(i);
    if (good(y)) return {y, false};
  }
  return {x, true};
}

namespace detail {
// Disagreeing coordinates of u and v in increasing order.
inline std::vector<int> disagreeing(Vertex u, Vertex v) {
  std::vector<int> out;
  for (std::uint32_t m = u.code ^ v.code; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}
}  // namespace detail

/// Bridge between good vertices at distance 2 or 3: with k<l(<m) the
/// disagreeing coordinates, the path
///   u, u^i, u^{ij}, u^{ijk}, u^{ijkl}(, u^{ijklm}) = v^{ij}, v^j, v
/// for the lexicographically smallest i<j outside {k,l(,m)} whose vertices are
/// all good. Empty when no such pair exists.
template <GoodPredicate P>
std::optional<Path> bridge_path(Vertex u, Vertex v, const P& good, int n) {
  const std::vector<int> diff = detail::disagreeing(u, v);
  if (diff.size() != 2 && diff.size() != 3) return std::nullopt;
  std::uint32_t diff_mask = u.code ^ v.code;
  for (int i = 0; i < n; ++i) {
    if (diff_mask >> i & 1u) continue;
    for (int j = i + 1; j < n; ++j) {
      if (diff_mask >> j & 1u) continue;
      Path p;
      p.reserve(diff.size() + 5);
      Vertex w = u;
      p.push_back(w);
      w = w.flipped(i);
      p.push_back(w);
      w = w.flipped(j);
      p.push_back(w);
      for (int k : diff) {
        w = w.flipped(k);
        p.push_back(w);
      }
      w = w.flipped(i);
      p.push_back(w);
      w = w.flipped(j);
      p.push_back(w);
      bool ok = true;
      for (Vertex z : p)
        if (!good(z)) {
          ok = false;
          break;
        }
      if (ok) return p;
    }
  }
  return std::nullopt;
}

/// Image of the edge {x, y} under the good-vertex embedding.
template <GoodPredicate P>
Path map_edge(Vertex x, Vertex y, const P& good, int n) {
  const PhiImage px = embed_phi(x, good, n);
  const PhiImage py = embed_phi(y, good, n);
  const bool gx = good(px.image), gy = good(py.image);
  if (gx && px.image == py.image) return {px.image};
  if (gx && gy) {
    const int d = hamming_distance(px.image, py.image);
    if (d == 1) return {px.image, py.image};
    if (d == 2 || d == 3) {
      if (auto b = bridge_path(px.image, py.image, good, n)) return *b;
    }
  }
  return {x, y};
}

/// Canonical path from x to y avoiding bad interior vertices when possible.
/// Throws ConfigError when x == y.
template <GoodPredicate P>
Path build_path(Vertex x, Vertex y, const P& good, int n) {
  const Path tilde = flip_path(x, y);
  Path out;
  out.reserve(7 * tilde.size() + 2);
  out.push_back(x);
  for (std::size_t e = 1; e < tilde.size(); ++e) {
    const Path seg = map_edge(tilde[e - 1], tilde[e], good, n);
    for (Vertex v : seg)
      if (v != out.back()) out.push_back(v);
  }
  if (out.back() != y) out.push_back(y);
  return loop_erase(out);
}

/// Convenience predicate backed by a per-vertex flag array.
struct GoodFlags {
  std::span<const std::uint8_t> flags;
  bool operator()(Vertex v) const { return flags[v.code] != 0; }
};

/// Index of the edge {u, u^bit} in a dense 2^n * n table.
inline std::size_t edge_index(Vertex u, int bit, int n) {
  return static_cast<std::size_t>(u.code & ~(std::uint32_t{1} << bit)) * static_cast<std::size_t>(n) +
         static_cast<std::size_t>(bit);
}

/// Per-edge sums of |gamma_xy| nu_x nu_y over the canonical paths through each
/// edge, for all unordered pairs {x, y}.
class PathSet {
 public:
  int dimension() const { return n_; }
  /// Congestion of the edge {u, u^bit}; 0 for edges no path uses.
  double congestion(Vertex u, int bit) const { return congestion_[edge_index(u, bit, n_)]; }
  const std::vector<double>& table() const { return congestion_; }
  /// Sum over all unordered pairs of |gamma_xy| nu_x nu_y.
  double pair_total() const { return pair_total_; }
  std::uint64_t pair_count() const { return pairs_; }
  std::size_t max_path_length() const { return max_length_; }

  template <GoodPredicate P>
  Path path(Vertex x, Vertex y, const P& good) const {
    return build_path(x, y, good, n_);
  }

 private:
  friend PathSet edge_congestion(const Eigen::VectorXd&, std::span<const std::uint8_t>, int,
                                 std::uint64_t, unsigned);
  int n_ = 0;
  std::vector<double> congestion_;
  double pair_total_ = 0.0;
  std::uint64_t pairs_ = 0;
  std::size_t max_length_ = 0;
};

inline constexpr std::uint64_t kDefaultPairBudget = 200'000'000ULL;

/// Streams all 2^{n-1}(2^n-1) unordered pairs through build_path and
/// accumulates congestion with compensated summation. Work is sharded by the
/// first vertex into fixed blocks and merged in block order, so the table is
/// identical for any thread count. Throws BudgetError when the pair count
/// exceeds pair_budget.
PathSet edge_congestion(const Eigen::VectorXd& nu, std::span<const std::uint8_t> good, int n,
                        std::uint64_t pair_budget = kDefaultPairBudget, unsigned threads = 0);

}  // namespace rem
