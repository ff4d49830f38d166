// hypercube.cpp
#include "rem/hypercube.hpp"

#include <algorithm>
#include <iomanip>
#include <unordered_map>

#include "rem/error.hpp"
#include "rem/parallel.hpp"

namespace rem {

std::ostream& operator<<(std::ostream& os, Vertex v) {
  std::ios_base::fmtflags f = os.flags();
  os << "0x" << std::hex << v.code;
  os.flags(f);
  return os;
}

std::vector<Vertex> neighbors(Vertex x, int n) {
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(x.flipped(i));
  return out;
}

std::vector<Vertex> enumerate_sphere(Vertex x, int r, int n) {
  if (r < 0 || r > n) throw ConfigError("enumerate_sphere: radius " + std::to_string(r) + " outside [0, " +
                                        std::to_string(n) + "]");
  std::vector<Vertex> out;
  if (r == 0) return {x};
  // Gosper's hack over all n-bit masks with r bits set.
  const std::uint64_t limit = std::uint64_t{1} << n;
  std::uint64_t m = (std::uint64_t{1} << r) - 1;
  while (m < limit) {
    out.emplace_back(x.code ^ static_cast<std::uint32_t>(m));
    const std::uint64_t c = m & (~m + 1);
    const std::uint64_t rr = m + c;
    m = (((rr ^ m) >> 2) / c) | rr;
  }
  return out;
}

std::vector<Vertex> enumerate_ball(Vertex x, int r, int n) {
  if (r < 0 || r > n) throw ConfigError("enumerate_ball: radius " + std::to_string(r) + " outside [0, " +
                                        std::to_string(n) + "]");
  std::vector<Vertex> out;
  for (int k = 0; k <= r; ++k) {
    auto s = enumerate_sphere(x, k, n);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

Path flip_path(Vertex x, Vertex y) {
  if (x == y) throw ConfigError("flip_path: degenerate pair (x == y)");
  Path p{x};
  Vertex w = x;
  for (std::uint32_t m = x.code ^ y.code; m != 0; m &= m - 1) {
    w = w.flipped(std::countr_zero(m));
    p.push_back(w);
  }
  return p;
}

bool is_nearest_neighbor(const Path& p) {
  for (std::size_t i = 1; i < p.size(); ++i)
    if (hamming_distance(p[i - 1], p[i]) != 1) return false;
  return true;
}

bool is_self_avoiding(const Path& p) {
  std::vector<std::uint32_t> codes;
  codes.reserve(p.size());
  for (Vertex v : p) codes.push_back(v.code);
  std::sort(codes.begin(), codes.end());
  return std::adjacent_find(codes.begin(), codes.end()) == codes.end();
}

Path loop_erase(const Path& p) {
  Path out;
  out.reserve(p.size());
  std::unordered_map<std::uint32_t, std::size_t> position;
  for (Vertex v : p) {
    auto it = position.find(v.code);
    if (it != position.end()) {
      for (std::size_t k = it->second + 1; k < out.size(); ++k) position.erase(out[k].code);
      out.resize(it->second + 1);
      continue;
    }
    position.emplace(v.code, out.size());
    out.push_back(v);
  }
  return out;
}

void write_path(std::ostream& os, const Path& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) os << ' ';
    os << p[i];
  }
  os << '\n';
}

namespace {

// Neumaier compensated accumulator.
struct KahanCell {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

PathSet edge_congestion(const Eigen::VectorXd& nu, std::span<const std::uint8_t> good, int n,
                        std::uint64_t pair_budget, unsigned threads) {
  const std::uint64_t nv = vertex_count(n);
  if (static_cast<std::uint64_t>(nu.size()) != nv || good.size() != nv)
    throw ConfigError("edge_congestion: nu/good size does not match 2^N");
  const std::uint64_t pairs = nv / 2 * (nv - 1);
  if (pairs > pair_budget)
    throw BudgetError("edge_congestion: " + std::to_string(pairs) + " pairs exceed the budget of " +
                      std::to_string(pair_budget) + "; reduce N");

  const std::size_t table = static_cast<std::size_t>(nv) * static_cast<std::size_t>(n);
  const std::uint64_t block = 64;
  const std::size_t shards = static_cast<std::size_t>((nv + block - 1) / block);
  std::vector<std::vector<KahanCell>> shard_tables(shards);
  std::vector<KahanCell> shard_totals(shards);
  std::vector<std::size_t> shard_max(shards, 0);
  const GoodFlags pred{good};

  parallel_for(shards, threads, [&](std::size_t s) {
    std::vector<KahanCell> local(table);
    KahanCell total;
    std::size_t max_len = 0;
    const std::uint64_t lo = s * block, hi = std::min(nv, lo + block);
    for (std::uint64_t xc = lo; xc < hi; ++xc) {
      const Vertex x(static_cast<std::uint32_t>(xc));
      for (std::uint64_t yc = xc + 1; yc < nv; ++yc) {
        const Vertex y(static_cast<std::uint32_t>(yc));
        const Path p = build_path(x, y, pred, n);
        const std::size_t len = path_length(p);
        max_len = std::max(max_len, len);
        const double w = static_cast<double>(len) * nu[x.code] * nu[y.code];
        total.add(w);
        for (std::size_t k = 1; k < p.size(); ++k) {
          const int bit = std::countr_zero(p[k - 1].code ^ p[k].code);
          local[edge_index(p[k - 1], bit, n)].add(w);
        }
      }
    }
    shard_tables[s] = std::move(local);
    shard_totals[s] = total;
    shard_max[s] = max_len;
  });

  PathSet out;
  out.n_ = n;
  out.pairs_ = pairs;
  std::vector<KahanCell> merged(table);
  KahanCell total;
  for (std::size_t s = 0; s < shards; ++s) {
    for (std::size_t e = 0; e < table; ++e) merged[e].add(shard_tables[s][e].value());
    total.add(shard_totals[s].value());
    out.max_length_ = std::max(out.max_length_, shard_max[s]);
  }
  out.congestion_.resize(table);
  for (std::size_t e = 0; e < table; ++e) out.congestion_[e] = merged[e].value();
  out.pair_total_ = total.value();
  return out;
}

}  // namespace rem
