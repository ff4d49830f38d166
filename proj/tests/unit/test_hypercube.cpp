#include <algorithm>
#include <map>
#include <set>

#include "doctest.h"
#include "rem/hypercube.hpp"

using rem::Vertex;

namespace {

std::vector<std::uint32_t> codes(const std::vector<Vertex>& vs) {
  std::vector<std::uint32_t> out;
  for (Vertex v : vs) out.push_back(v.code);
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t binomial(int n, int k) {
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

TEST_CASE("hamming distance") {
  CHECK(rem::hamming_distance(Vertex(0b1011), Vertex(0b1011)) == 0);
  CHECK(rem::hamming_distance(Vertex(0b0000), Vertex(0b1111)) == 4);
  CHECK(rem::hamming_distance(Vertex(0b0101), Vertex(0b0110)) == 2);
  // XOR popcount oracle, written out bit by bit.
  for (std::uint32_t a = 0; a < 64; ++a)
    for (std::uint32_t b = 0; b < 64; ++b) {
      int d = 0;
      for (int i = 0; i < 6; ++i) d += ((a >> i) & 1u) != ((b >> i) & 1u);
      REQUIRE(rem::hamming_distance(Vertex(a), Vertex(b)) == d);
    }
}

TEST_CASE("neighbors") {
  CHECK(codes(rem::neighbors(Vertex(0b00), 2)) == std::vector<std::uint32_t>{0b01, 0b10});
  CHECK(codes(rem::neighbors(Vertex(0b101), 3)) == std::vector<std::uint32_t>{0b001, 0b100, 0b111});
  for (Vertex y : rem::neighbors(Vertex(0b1101), 7)) CHECK(rem::hamming_distance(Vertex(0b1101), y) == 1);
}

TEST_CASE("spheres and balls") {
  CHECK(codes(rem::enumerate_sphere(Vertex(5), 0, 4)) == std::vector<std::uint32_t>{5});
  CHECK(rem::enumerate_sphere(Vertex(0), 2, 4).size() == 6);
  const auto s = rem::enumerate_sphere(Vertex(0b10110), 3, 5);
  CHECK(s.size() == 10);
  const std::vector<std::uint32_t> sc = codes(s);
  CHECK(std::set<std::uint32_t>(sc.begin(), sc.end()).size() == 10);
  for (Vertex y : s) CHECK(rem::hamming_distance(Vertex(0b10110), y) == 3);
  for (int r = 0; r <= 7; ++r) CHECK(rem::enumerate_sphere(Vertex(3), r, 7).size() == binomial(7, r));
  std::uint64_t ball = 0;
  for (int r = 0; r <= 3; ++r) ball += binomial(8, r);
  CHECK(rem::enumerate_ball(Vertex(9), 3, 8).size() == ball);
}

TEST_CASE("flip path") {
  CHECK(codes(rem::flip_path(Vertex(0b00), Vertex(0b11))) == std::vector<std::uint32_t>{0b00, 0b01, 0b11});
  const rem::Path p = rem::flip_path(Vertex(0b00), Vertex(0b11));
  CHECK(p[1] == Vertex(0b01));
  const rem::Path e = rem::flip_path(Vertex(0b100), Vertex(0b110));
  CHECK(e == rem::Path{Vertex(0b100), Vertex(0b110)});
  const rem::Path q = rem::flip_path(Vertex(0b010), Vertex(0b101));
  CHECK(q == rem::Path{Vertex(0b010), Vertex(0b011), Vertex(0b001), Vertex(0b101)});
  CHECK(rem::is_nearest_neighbor(q));
  CHECK(rem::is_self_avoiding(q));
  CHECK_THROWS(rem::flip_path(Vertex(3), Vertex(3)));
}

TEST_CASE("loop erasure") {
  const rem::Path p{Vertex(0), Vertex(1), Vertex(3), Vertex(1), Vertex(5)};
  CHECK(rem::loop_erase(p) == rem::Path{Vertex(0), Vertex(1), Vertex(5)});
}

TEST_CASE("embedding phi") {
  auto all = [](Vertex) { return true; };
  CHECK(rem::embed_phi(Vertex(6), all, 4).image == Vertex(6));
  // x and x^1 bad, x^2 good: first good neighbor in coordinate order.
  const Vertex x(0);
  auto good = [&](Vertex v) { return v != x && v != x.flipped(0); };
  const rem::PhiImage im = rem::embed_phi(x, good, 4);
  CHECK(im.image == x.flipped(1));
  CHECK_FALSE(im.no_good_neighbor);
  auto none = [](Vertex v) { return rem::hamming_distance(v, Vertex(0)) > 1; };
  const rem::PhiImage f = rem::embed_phi(Vertex(0), none, 4);
  CHECK(f.image == Vertex(0));
  CHECK(f.no_good_neighbor);
}

TEST_CASE("bridge paths") {
  auto all = [](Vertex) { return true; };
  const Vertex u(0);
  const Vertex v2(0b0011);
  const auto b2 = rem::bridge_path(u, v2, all, 6);
  REQUIRE(b2);
  CHECK(rem::path_length(*b2) == 6);
  // Smallest valid pair avoids the disagreeing coordinates 0 and 1.
  CHECK((*b2)[1] == u.flipped(2));
  CHECK((*b2)[2] == u.flipped(2).flipped(3));
  CHECK(b2->back() == v2);
  CHECK(rem::is_nearest_neighbor(*b2));
  const auto b3 = rem::bridge_path(u, Vertex(0b0111), all, 6);
  REQUIRE(b3);
  CHECK(rem::path_length(*b3) == 7);
  CHECK(rem::is_self_avoiding(*b3));
  // Every interior candidate bad.
  auto ends_only = [&](Vertex v) { return v == u || v == v2; };
  CHECK_FALSE(rem::bridge_path(u, v2, ends_only, 6).has_value());
}

TEST_CASE("map_edge cases") {
  auto all = [](Vertex) { return true; };
  CHECK(rem::map_edge(Vertex(0), Vertex(1), all, 4) == rem::Path{Vertex(0), Vertex(1)});
  // x bad with good neighbor y: both map to y.
  auto not0 = [](Vertex v) { return v != Vertex(0); };
  CHECK(rem::map_edge(Vertex(0), Vertex(1), not0, 4) == rem::Path{Vertex(1)});
}

TEST_CASE("build_path") {
  auto all = [](Vertex) { return true; };
  for (std::uint32_t y = 0; y < 32; ++y)
    if (y != 0b01010) CHECK(rem::build_path(Vertex(0b01010), Vertex(y), all, 5) ==
                                               rem::flip_path(Vertex(0b01010), Vertex(y)));
  // x bad: the path starts with the edge to phi(x).
  auto not0 = [](Vertex v) { return v != Vertex(0); };
  const rem::Path p = rem::build_path(Vertex(0), Vertex(0b1110), not0, 4);
  CHECK(p.front() == Vertex(0));
  CHECK(p[1] == Vertex(0b0001));
  CHECK(p.back() == Vertex(0b1110));
  CHECK(rem::is_nearest_neighbor(p));
}

TEST_CASE("path length bound on random good sets") {
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    std::vector<std::uint8_t> flags(256);
    std::uint32_t s = seed * 2654435761u;
    for (auto& f : flags) {
      s = s * 1664525u + 1013904223u;
      f = (s >> 24) % 5 != 0;
    }
    rem::GoodFlags good{flags};
    for (std::uint32_t x = 0; x < 256; x += 7)
      for (std::uint32_t y = 0; y < 256; y += 11) {
        if (x == y) continue;
        const rem::Path p = rem::build_path(Vertex(x), Vertex(y), good, 8);
        const auto d = static_cast<std::size_t>(rem::hamming_distance(Vertex(x), Vertex(y)));
        REQUIRE(p.front() == Vertex(x));
        REQUIRE(p.back() == Vertex(y));
        REQUIRE(rem::is_nearest_neighbor(p));
        REQUIRE(rem::is_self_avoiding(p));
        REQUIRE(rem::path_length(p) <= 7 * d + 2);
      }
  }
}

TEST_CASE("edge congestion, N = 2 by hand") {
  // Uniform nu, all good: six unordered pairs; four at distance one (path of
  // length 1 on their own edge), two at distance two (flip paths of length 2).
  Eigen::VectorXd nu = Eigen::VectorXd::Constant(4, 0.25);
  std::vector<std::uint8_t> good(4, 1);
  const rem::PathSet ps = rem::edge_congestion(nu, good, 2);
  // Flip paths: 00->11 uses {00,01},{01,11}; 01->10 uses {01,00},{00,10}.
  std::map<std::pair<std::uint32_t, int>, double> hand;
  auto add = [&](const rem::Path& p) {
    for (std::size_t k = 1; k < p.size(); ++k) {
      const std::uint32_t d = p[k - 1].code ^ p[k].code;
      const int bit = d == 1 ? 0 : 1;
      hand[{p[k - 1].code & ~d, bit}] += static_cast<double>(rem::path_length(p)) * 0.0625;
    }
  };
  for (std::uint32_t x = 0; x < 4; ++x)
    for (std::uint32_t y = x + 1; y < 4; ++y) add(rem::flip_path(Vertex(x), Vertex(y)));
  for (std::uint32_t u = 0; u < 4; ++u)
    for (int b = 0; b < 2; ++b) {
      const double expect = hand.count({u & ~(1u << b), b}) ? hand[{u & ~(1u << b), b}] : 0.0;
      CHECK(ps.congestion(Vertex(u), b) == doctest::Approx(expect).epsilon(1e-14));
    }
  CHECK(ps.pair_count() == 6);
  // Sum over edges of congestion = sum over pairs of |path|^2 nu_x nu_y.
  double total = 0.0;
  for (double c : ps.table()) total += c;
  CHECK(total == doctest::Approx((4 * 1 + 2 * 4) * 0.0625).epsilon(1e-14));
}

TEST_CASE("edge congestion double counting identity") {
  const int n = 6;
  Eigen::VectorXd nu(64);
  for (int i = 0; i < 64; ++i) nu[i] = 1.0 + (i * 37 % 11);
  nu /= nu.sum();
  std::vector<std::uint8_t> good(64, 1);
  for (int i : {3, 17, 40, 41}) good[i] = 0;
  const rem::PathSet ps = rem::edge_congestion(nu, good, n);
  rem::GoodFlags g{good};
  double expect = 0.0;
  for (std::uint32_t x = 0; x < 64; ++x)
    for (std::uint32_t y = x + 1; y < 64; ++y) {
      const double len = static_cast<double>(rem::path_length(rem::build_path(Vertex(x), Vertex(y), g, n)));
      expect += len * len * nu[x] * nu[y];
    }
  double total = 0.0;
  for (double c : ps.table()) total += c;
  CHECK(total == doctest::Approx(expect).epsilon(1e-12));
  // An edge no path uses: remove it from every path by isolating nothing is
  // impossible on the full cube, so check a one-path instance instead.
  Eigen::VectorXd two = Eigen::VectorXd::Zero(4);
  two[0] = two[1] = 0.5;
  const rem::PathSet single = rem::edge_congestion(two, std::vector<std::uint8_t>(4, 1), 2);
  CHECK(single.congestion(Vertex(0), 1) == 0.0);
  CHECK(single.congestion(Vertex(0), 0) == doctest::Approx(0.25));
}
