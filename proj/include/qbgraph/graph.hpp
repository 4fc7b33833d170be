#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qbgraph/errors.hpp"

namespace qbg {

using Edge = std::pair<int, int>;

/// Position of the unordered pair {i, j} (i < j) in colex order:
/// (0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ...
/// The index does not depend on the vertex count, so a graph on n vertices
/// is a prefix of the same bit string on n + 1 vertices.
constexpr int pair_index(int i, int j) noexcept {
  if (i > j) std::swap(i, j);
  return j * (j - 1) / 2 + i;
}

constexpr int pair_count(int n) noexcept { return n * (n - 1) / 2; }

/// Simple undirected unweighted graph on at most 64 labeled vertices.
///
/// Rows are neighbour bit masks; the adjacency is symmetric with an empty
/// diagonal and the edge count is kept in sync by every mutator.
class Graph {
 public:
  static constexpr int kMaxVertices = 64;

  Graph() = default;

  explicit Graph(int n) : n_(n), rows_(static_cast<std::size_t>(std::max(n, 0)), 0) {
    if (n < 1 || n > kMaxVertices)
      throw InputError("graph vertex count must be in [1, 64], got " + std::to_string(n));
  }

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }

  bool has_edge(int i, int j) const {
    check_vertex(i);
    check_vertex(j);
    return (rows_[i] >> j) & 1U;
  }

  /// Inserts {i, j}; returns false if it was already present.
  bool add_edge(int i, int j) {
    check_vertex(i);
    check_vertex(j);
    if (i == j) throw InputError("self-loop at vertex " + std::to_string(i));
    if ((rows_[i] >> j) & 1U) return false;
    rows_[i] |= bit(j);
    rows_[j] |= bit(i);
    ++m_;
    return true;
  }

  bool remove_edge(int i, int j) {
    check_vertex(i);
    check_vertex(j);
    if (!((rows_[i] >> j) & 1U)) return false;
    rows_[i] &= ~bit(j);
    rows_[j] &= ~bit(i);
    --m_;
    return true;
  }

  /// Neighbour mask of vertex i (bit j set iff {i, j} is an edge).
  std::uint64_t row(int i) const {
    check_vertex(i);
    return rows_[i];
  }

  int degree(int i) const { return std::popcount(row(i)); }

  /// Edges with i < j, sorted lexicographically.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(m_));
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if ((rows_[i] >> j) & 1U) out.emplace_back(i, j);
    return out;
  }

  /// Graph whose vertex perm[v] is adjacent to perm[u] iff u ~ v here.
  Graph relabeled(std::span<const int> perm) const {
    if (static_cast<int>(perm.size()) != n_) throw InputError("permutation size mismatch");
    Graph out(n_);
    for (const auto& [i, j] : edges()) out.add_edge(perm[i], perm[j]);
    return out;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.rows_ == b.rows_;
  }

 private:
  static constexpr std::uint64_t bit(int j) { return std::uint64_t{1} << j; }

  void check_vertex(int i) const {
    if (i < 0 || i >= n_)
      throw InputError("vertex " + std::to_string(i) + " out of range for n=" + std::to_string(n_));
  }

  int n_ = 0;
  int m_ = 0;
  std::vector<std::uint64_t> rows_;
};

// ---------------------------------------------------------------------------
// Named constructors

inline Graph from_edges(int n, std::span<const Edge> edges) {
  Graph g(n);
  for (const auto& [i, j] : edges) g.add_edge(i, j);
  return g;
}

inline Graph from_edges(int n, std::initializer_list<Edge> edges) {
  return from_edges(n, std::span<const Edge>(edges.begin(), edges.size()));
}

/// Hub at vertex 0.
inline Graph star(int n) {
  if (n < 2) throw InputError("star requires n >= 2");
  Graph g(n);
  for (int i = 1; i < n; ++i) g.add_edge(0, i);
  return g;
}

inline Graph path(int n) {
  if (n < 2) throw InputError("path requires n >= 2");
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

inline Graph cycle(int n) {
  if (n < 3) throw InputError("cycle requires n >= 3");
  Graph g = path(n);
  g.add_edge(n - 1, 0);
  return g;
}

inline Graph complete(int n) {
  if (n < 2) throw InputError("complete graph requires n >= 2");
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

/// Part U = {0..p-1}, part V = {p..p+q-1}.
inline Graph complete_bipartite(int p, int q) {
  if (p < 1 || q < 1) throw InputError("complete_bipartite requires p, q >= 1");
  Graph g(p + q);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < q; ++j) g.add_edge(i, p + j);
  return g;
}

/// Clique on {0..q-1}; the n-q pendant vertices {q..n-1} all hang off vertex 0.
inline Graph pineapple(int n, int q) {
  if (n < 2 || q < 1 || q > n) throw InputError("pineapple requires n >= 2 and 1 <= q <= n");
  Graph g(n);
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) g.add_edge(i, j);
  for (int v = q; v < n; ++v) g.add_edge(0, v);
  return g;
}

/// Star plus the leaf-leaf edge {1, 2}.
inline Graph perturbed_star(int n) {
  if (n < 3) throw InputError("perturbed_star requires n >= 3");
  Graph g = star(n);
  g.add_edge(1, 2);
  return g;
}

// ---------------------------------------------------------------------------
// Combinatorial observables

inline bool is_connected(const Graph& g) {
  const int n = g.n();
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  std::uint64_t seen = 1, frontier = 1;
  while (frontier) {
    std::uint64_t next = 0;
    for (std::uint64_t f = frontier; f; f &= f - 1) next |= g.row(std::countr_zero(f));
    frontier = next & ~seen;
    seen |= next;
  }
  return seen == all;
}

inline std::vector<int> degrees(const Graph& g) {
  std::vector<int> d(static_cast<std::size_t>(g.n()));
  for (int i = 0; i < g.n(); ++i) d[i] = g.degree(i);
  return d;
}

inline std::vector<int> sorted_degrees(const Graph& g) {
  auto d = degrees(g);
  std::sort(d.begin(), d.end());
  return d;
}

struct DegreeStats {
  double mean = 0.0;     // d-bar = 2M/N
  double rms = 0.0;      // relative RMS fluctuation; NaN for the empty graph
  double norm2 = 0.0;    // ||d||_2
};

inline DegreeStats degree_stats(const Graph& g) {
  const auto d = degrees(g);
  DegreeStats s;
  s.mean = 2.0 * g.m() / g.n();
  double sq = 0.0, var = 0.0;
  for (int di : d) {
    sq += double(di) * di;
    var += (di - s.mean) * (di - s.mean);
  }
  s.norm2 = std::sqrt(sq);
  s.rms = g.m() > 0 ? std::sqrt(var / g.n()) / s.mean : std::nan("");
  return s;
}

/// Relative RMS degree fluctuation; the empty graph has no mean degree to scale by.
inline double degree_rms(const Graph& g) {
  if (g.m() == 0) throw InputError("degree fluctuation undefined for the empty graph");
  return degree_stats(g).rms;
}

namespace detail {

inline int max_independent(const Graph& g, std::uint64_t cand, int taken, int best) {
  if (!cand) return std::max(best, taken);
  if (taken + std::popcount(cand) <= best) return best;
  // Vertices of degree <= 1 inside cand always belong to some maximum set.
  int pick = -1, pick_deg = -1;
  for (std::uint64_t c = cand; c; c &= c - 1) {
    const int v = std::countr_zero(c);
    const int dv = std::popcount(g.row(v) & cand);
    if (dv <= 1) {
      return max_independent(g, cand & ~(g.row(v) | (std::uint64_t{1} << v)), taken + 1, best);
    }
    if (dv > pick_deg) {
      pick = v;
      pick_deg = dv;
    }
  }
  const std::uint64_t vbit = std::uint64_t{1} << pick;
  best = max_independent(g, cand & ~(g.row(pick) | vbit), taken + 1, best);
  return max_independent(g, cand & ~vbit, taken, best);
}

}  // namespace detail

/// Exact independence number by branch and bound on vertex masks.
inline int independence_number(const Graph& g) {
  const int n = g.n();
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  return detail::max_independent(g, all, 0, 0);
}

namespace detail {

inline void count_automorphisms(const Graph& g, const std::vector<int>& deg, std::vector<int>& image,
                                std::uint64_t used, int i, std::uint64_t& count) {
  const int n = g.n();
  if (i == n) {
    ++count;
    return;
  }
  for (int c = 0; c < n; ++c) {
    if ((used >> c) & 1U) continue;
    if (deg[c] != deg[i]) continue;
    bool ok = true;
    for (int j = 0; j < i && ok; ++j) ok = g.has_edge(i, j) == g.has_edge(c, image[j]);
    if (!ok) continue;
    image[i] = c;
    count_automorphisms(g, deg, image, used | (std::uint64_t{1} << c), i + 1, count);
  }
}

}  // namespace detail

inline constexpr int kMaxAutomorphismN = 10;

/// Number of adjacency-preserving vertex permutations (exhaustive backtracking).
inline std::uint64_t automorphism_count(const Graph& g) {
  if (g.n() > kMaxAutomorphismN)
    throw UnsupportedError("automorphism_count supports n <= 10, got " + std::to_string(g.n()));
  const auto deg = degrees(g);
  std::vector<int> image(static_cast<std::size_t>(g.n()), -1);
  std::uint64_t count = 0;
  detail::count_automorphisms(g, deg, image, 0, 0, count);
  return count;
}

// ---------------------------------------------------------------------------
// Serialisation
//
// Edge-list text: first line "n m", then one "i j" line per edge with i < j,
// lexicographically sorted, '\n' terminated.
//
// Hex: the upper triangle in colex pair order (see pair_index), packed
// most-significant-bit first into ceil(n(n-1)/2 / 8) bytes, unused trailing
// bits zero, written as lowercase hex. The vertex count travels separately.

inline std::string to_edge_list(const Graph& g) {
  std::ostringstream os;
  os << g.n() << ' ' << g.m() << '\n';
  for (const auto& [i, j] : g.edges()) os << i << ' ' << j << '\n';
  return os.str();
}

inline Graph parse_edge_list(std::istream& in) {
  int n = 0, m = 0;
  if (!(in >> n >> m)) throw InputError("edge list: missing 'n m' header");
  if (m < 0) throw InputError("edge list: negative edge count");
  Graph g(n);
  for (int k = 0; k < m; ++k) {
    int i = 0, j = 0;
    if (!(in >> i >> j)) throw InputError("edge list: expected " + std::to_string(m) + " edges");
    g.add_edge(i, j);
  }
  if (g.m() != m) throw InputError("edge list: duplicate edges");
  return g;
}

inline Graph parse_edge_list(const std::string& text) {
  std::istringstream is(text);
  return parse_edge_list(is);
}

inline std::vector<std::uint8_t> pack_upper_triangle(const Graph& g) {
  const int bits = pair_count(g.n());
  std::vector<std::uint8_t> out(static_cast<std::size_t>((bits + 7) / 8), 0);
  for (const auto& [i, j] : g.edges()) {
    const int k = pair_index(i, j);
    out[k / 8] |= static_cast<std::uint8_t>(0x80U >> (k % 8));
  }
  return out;
}

inline std::string bytes_to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xF]);
  }
  return s;
}

inline std::string to_hex(const Graph& g) { return bytes_to_hex(pack_upper_triangle(g)); }

inline Graph from_hex(int n, const std::string& hex) {
  Graph g(n);
  const int bits = pair_count(n);
  if (hex.size() != static_cast<std::size_t>((bits + 7) / 8) * 2)
    throw InputError("hex graph: wrong length for n=" + std::to_string(n));
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw InputError(std::string("hex graph: bad digit '") + c + "'");
  };
  for (int k = 0; k < static_cast<int>(hex.size()) * 4; ++k) {
    const int v = nibble(hex[k / 4]);
    if (!((v >> (3 - k % 4)) & 1)) continue;
    if (k >= bits) throw InputError("hex graph: padding bits must be zero");
    // invert colex index: largest j with j(j-1)/2 <= k
    int j = 1;
    while ((j + 1) * j / 2 <= k) ++j;
    g.add_edge(k - j * (j - 1) / 2, j);
  }
  return g;
}

}  // namespace qbg
