#pragma once

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "qbgraph/errors.hpp"
#include "qbgraph/graph.hpp"

namespace qbg {

inline constexpr int kMaxCanonicalN = 10;
inline constexpr int kMaxEnumerateN = 8;

/// Isomorphism-class key: the canonical upper-triangle bit string.
///
/// `code` holds colex pair k at bit 63 - k, so comparing codes as integers
/// compares the bit strings lexicographically. Keys order by (n, code).
struct GraphKey {
  int n = 0;
  std::uint64_t code = 0;

  /// The packed bytes of the canonically relabeled graph (same layout as to_hex).
  std::vector<std::uint8_t> canon() const {
    const int bits = pair_count(n);
    std::vector<std::uint8_t> out(static_cast<std::size_t>((bits + 7) / 8));
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = static_cast<std::uint8_t>(code >> (56 - 8 * b));
    return out;
  }

  std::string hex() const { return bytes_to_hex(canon()); }

  friend auto operator<=>(const GraphKey&, const GraphKey&) = default;
};

namespace detail {

struct CanonSearch {
  const Graph* g = nullptr;
  int n = 0;
  std::vector<int> target_degree;  // degree required at each position
  std::vector<int> deg;
  std::vector<int> at;             // position -> vertex
  std::vector<int> best_at;
  std::uint64_t best = ~std::uint64_t{0};

  void run(int p, std::uint64_t used, std::uint64_t code) {
    if (p == n) {
      if (code < best) {
        best = code;
        best_at = at;
      }
      return;
    }
    for (int v = 0; v < n; ++v) {
      if ((used >> v) & 1U || deg[v] != target_degree[p]) continue;
      std::uint64_t c = code;
      const std::uint64_t nb = g->row(v);
      for (int q = 0; q < p; ++q)
        if ((nb >> at[q]) & 1U) c |= std::uint64_t{1} << (63 - pair_index(q, p));
      const int fixed = pair_count(p + 1);
      if (fixed > 0 && (c >> (64 - fixed)) > (best >> (64 - fixed))) continue;
      at[p] = v;
      run(p + 1, used | (std::uint64_t{1} << v), c);
    }
  }
};

inline CanonSearch canonical_search(const Graph& g) {
  if (g.n() > kMaxCanonicalN)
    throw UnsupportedError("canonical form supports n <= 10, got " + std::to_string(g.n()));
  CanonSearch s;
  s.g = &g;
  s.n = g.n();
  s.deg = degrees(g);
  s.target_degree = s.deg;
  std::sort(s.target_degree.begin(), s.target_degree.end(), std::greater<>());
  s.at.assign(static_cast<std::size_t>(s.n), -1);
  s.run(0, 0, 0);
  return s;
}

inline Graph graph_from_code(int n, std::uint64_t code) {
  Graph g(n);
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i)
      if ((code >> (63 - pair_index(i, j))) & 1U) g.add_edge(i, j);
  return g;
}

}  // namespace detail

/// Canonical key: the lexicographically smallest bit string over every
/// relabeling that lists vertices by non-increasing degree. That candidate
/// set is the same for isomorphic graphs, so keys agree iff graphs are
/// isomorphic.
inline GraphKey canonical_key(const Graph& g) {
  return GraphKey{g.n(), detail::canonical_search(g).best};
}

/// The canonically relabeled representative of g's isomorphism class.
inline Graph canonical_form(const Graph& g) { return detail::graph_from_code(g.n(), canonical_key(g).code); }

inline bool isomorphic(const Graph& a, const Graph& b) {
  return a.n() == b.n() && a.m() == b.m() && canonical_key(a) == canonical_key(b);
}

namespace detail {

// Walks every labeled edge set on n vertices whose degree sequence is
// non-increasing in the vertex label (each class has such a labeling) and
// collects canonical codes. Degrees are packed one nibble per vertex.
inline std::vector<std::uint64_t> enumerate_codes(int n, bool connected_only) {
  if (n < 1 || n > kMaxEnumerateN)
    throw UnsupportedError("enumeration supports 1 <= n <= 8, got " + std::to_string(n));
  if (n == 1) return {0};

  const int low_bits = pair_count(n - 1);  // pairs inside {0..n-2}
  const int last = n - 1;
  std::vector<std::uint64_t> low_deg(std::size_t{1} << low_bits, 0);
  for (std::uint64_t s = 1; s < low_deg.size(); ++s) {
    const int k = std::countr_zero(s);
    int j = 1;
    while ((j + 1) * j / 2 <= k) ++j;
    const int i = k - j * (j - 1) / 2;
    low_deg[s] = low_deg[s & (s - 1)] + (std::uint64_t{1} << (4 * i)) + (std::uint64_t{1} << (4 * j));
  }

  auto non_increasing = [n](std::uint64_t packed) {
    int prev = 0xF;
    for (int v = 0; v < n; ++v) {
      const int d = static_cast<int>((packed >> (4 * v)) & 0xF);
      if (d > prev) return false;
      prev = d;
    }
    return true;
  };

  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t hi = 0; hi < (std::uint64_t{1} << last); ++hi) {
    std::uint64_t hi_deg = static_cast<std::uint64_t>(std::popcount(hi)) << (4 * last);
    for (std::uint64_t h = hi; h; h &= h - 1) hi_deg += std::uint64_t{1} << (4 * std::countr_zero(h));
    for (std::uint64_t lo = 0; lo < low_deg.size(); ++lo) {
      const std::uint64_t packed = low_deg[lo] + hi_deg;
      if (!non_increasing(packed)) continue;
      Graph g(n);
      for (std::uint64_t s = lo; s; s &= s - 1) {
        const int k = std::countr_zero(s);
        int j = 1;
        while ((j + 1) * j / 2 <= k) ++j;
        g.add_edge(k - j * (j - 1) / 2, j);
      }
      for (std::uint64_t h = hi; h; h &= h - 1) g.add_edge(std::countr_zero(h), last);
      if (connected_only && !is_connected(g)) continue;
      seen.insert(canonical_key(g).code);
    }
  }
  std::vector<std::uint64_t> codes(seen.begin(), seen.end());
  std::sort(codes.begin(), codes.end());
  return codes;
}

inline std::vector<Graph> graphs_from_codes(int n, const std::vector<std::uint64_t>& codes) {
  std::vector<Graph> out;
  out.reserve(codes.size());
  for (auto c : codes) out.push_back(graph_from_code(n, c));
  return out;
}

}  // namespace detail

/// One canonical representative per isomorphism class of connected graphs
/// on n vertices, sorted by GraphKey.
inline std::vector<Graph> enumerate_connected(int n) {
  return detail::graphs_from_codes(n, detail::enumerate_codes(n, true));
}

/// Same, including disconnected graphs (and the empty graph).
inline std::vector<Graph> enumerate_all(int n) {
  return detail::graphs_from_codes(n, detail::enumerate_codes(n, false));
}

struct AtlasRecord {
  int index = 0;
  Graph graph;
  int m = 0;
  std::vector<int> degseq;  // ascending
  std::uint64_t aut = 0;
  GraphKey key;
};

/// Atlas-style ordering: (n, m, ascending degree sequence compared
/// lexicographically, automorphism count ascending), ties broken by key.
inline std::vector<AtlasRecord> atlas_sort(const std::vector<Graph>& graphs) {
  std::vector<AtlasRecord> recs;
  recs.reserve(graphs.size());
  for (const auto& g : graphs) {
    if (!recs.empty() && g.n() != recs.front().graph.n())
      throw InputError("atlas_sort: graphs must share the vertex count");
    recs.push_back(AtlasRecord{0, g, g.m(), sorted_degrees(g), automorphism_count(g), canonical_key(g)});
  }
  std::sort(recs.begin(), recs.end(), [](const AtlasRecord& a, const AtlasRecord& b) {
    if (a.m != b.m) return a.m < b.m;
    if (a.degseq != b.degseq) return a.degseq < b.degseq;
    if (a.aut != b.aut) return a.aut < b.aut;
    return a.key < b.key;
  });
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i].index = static_cast<int>(i);
  return recs;
}

}  // namespace qbg
