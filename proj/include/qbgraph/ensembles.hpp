#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "qbgraph/errors.hpp"
#include "qbgraph/graph.hpp"
#include "qbgraph/rng.hpp"
#include "qbgraph/text.hpp"

namespace qbg {

/// G(n, p): every unordered pair independently with probability p.
/// Pairs are visited in lexicographic (i, j) order, one draw each.
inline Graph er(int n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("er: p must lie in [0, 1]");
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p)) g.add_edge(i, j);
  return g;
}

/// Standard Prüfer decoding (0-indexed): repeatedly join the smallest
/// current leaf to the next sequence entry.
inline Graph prufer_decode(int n, std::span<const int> seq) {
  if (n < 2) throw InputError("prufer_decode: n must be >= 2");
  if (static_cast<int>(seq.size()) != n - 2) throw InputError("prufer_decode: sequence must have length n-2");
  std::vector<int> remaining(static_cast<std::size_t>(n), 1);
  for (int s : seq) {
    if (s < 0 || s >= n) throw InputError("prufer_decode: entry out of range");
    ++remaining[s];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> leaves;
  for (int v = 0; v < n; ++v)
    if (remaining[v] == 1) leaves.push(v);
  Graph g(n);
  for (int s : seq) {
    const int leaf = leaves.top();
    leaves.pop();
    g.add_edge(leaf, s);
    if (--remaining[s] == 1) leaves.push(s);
  }
  const int a = leaves.top();
  leaves.pop();
  g.add_edge(a, leaves.top());
  return g;
}

/// Uniform labeled tree via an i.i.d. uniform Prüfer sequence.
inline Graph random_tree(int n, Rng& rng) {
  if (n < 2) throw InputError("random_tree: n must be >= 2");
  std::vector<int> seq(static_cast<std::size_t>(n - 2));
  for (auto& s : seq) s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  return prufer_decode(n, seq);
}

inline constexpr long kBaMaxAttempts = 1'000'000;

/// Preferential attachment seeded by K_{m+1}. Each new vertex picks m
/// distinct targets with probability proportional to the degrees at the
/// start of its step; repeated picks are redrawn.
inline Graph barabasi_albert(int n, int m, Rng& rng) {
  if (m < 1) throw InputError("barabasi_albert: m must be >= 1");
  if (n <= m) throw InputError("barabasi_albert: n must exceed m");
  Graph g(n);
  std::vector<int> endpoints;  // vertex v appears deg(v) times
  for (int i = 0; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) {
      g.add_edge(i, j);
      endpoints.push_back(i);
      endpoints.push_back(j);
    }
  std::vector<int> targets;
  for (int v = m + 1; v < n; ++v) {
    targets.clear();
    long attempts = 0;
    while (static_cast<int>(targets.size()) < m) {
      if (++attempts > kBaMaxAttempts) throw NumericError("barabasi_albert: resampling cap exceeded");
      const int t = endpoints[rng.below(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (int t : targets) {
      g.add_edge(v, t);
      endpoints.push_back(v);
      endpoints.push_back(t);
    }
  }
  return g;
}

inline constexpr double kSbmPIn = 0.05;
inline constexpr double kSbmPOut = 0.9;

/// Two parts U = {0..floor(n/4)-1} and V = the rest; pairs drawn in
/// lexicographic order with p_in inside a part and p_out across.
inline Graph sbm_unbalanced(int n, Rng& rng, double p_in = kSbmPIn, double p_out = kSbmPOut) {
  if (n < 4) throw InputError("sbm_unbalanced: n must be >= 4");
  if (!(p_in >= 0 && p_in <= 1 && p_out >= 0 && p_out <= 1))
    throw InputError("sbm_unbalanced: probabilities must lie in [0, 1]");
  const int u = n / 4;
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli((i < u) == (j < u) ? p_in : p_out)) g.add_edge(i, j);
  return g;
}

enum class Model { ER, TREE, BA, SBM };

inline std::string to_string(Model m) {
  switch (m) {
    case Model::ER: return "er";
    case Model::TREE: return "tree";
    case Model::BA: return "ba";
    case Model::SBM: return "sbm";
  }
  return "?";
}

/// Parameters of one ensemble plus the sample coordinates. `p` is used by
/// ER, `m` by BA, `p_in`/`p_out` by SBM.
struct EnsembleSpec {
  Model model = Model::ER;
  int n = 10;
  double p = 0.1;
  int m = 2;
  double p_in = kSbmPIn;
  double p_out = kSbmPOut;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;

  /// Short label used in output files, e.g. "er(p=0.1)" or "ba(m=2)".
  std::string label() const {
    switch (model) {
      case Model::ER: return "er(p=" + fmt_num(p) + ")";
      case Model::TREE: return "tree";
      case Model::BA: return "ba(m=" + std::to_string(m) + ")";
      case Model::SBM: return "sbm";
    }
    return "?";
  }
};

/// Draws the sample described by ens; the substream depends only on (seed, sample_index).
inline Graph sample(const EnsembleSpec& ens) {
  Rng rng = Rng::substream(ens.seed, ens.sample_index);
  switch (ens.model) {
    case Model::ER: return er(ens.n, ens.p, rng);
    case Model::TREE: return random_tree(ens.n, rng);
    case Model::BA: return barabasi_albert(ens.n, ens.m, rng);
    case Model::SBM: return sbm_unbalanced(ens.n, rng, ens.p_in, ens.p_out);
  }
  throw InputError("unknown ensemble model");
}

/// Parses "er:0.1", "tree", "ba:2", "sbm" or "sbm:0.05:0.9".
inline EnsembleSpec parse_model(const std::string& text) {
  EnsembleSpec s;
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "er") {
      s.model = Model::ER;
      if (rest.empty()) throw InputError("er needs a probability, e.g. er:0.1");
      s.p = std::stod(rest);
      if (!(s.p >= 0 && s.p <= 1)) throw InputError("er probability out of range");
    } else if (head == "tree") {
      s.model = Model::TREE;
    } else if (head == "ba") {
      s.model = Model::BA;
      if (rest.empty()) throw InputError("ba needs m, e.g. ba:2");
      s.m = std::stoi(rest);
      if (s.m < 1) throw InputError("ba m must be >= 1");
    } else if (head == "sbm") {
      s.model = Model::SBM;
      if (!rest.empty()) {
        const auto c2 = rest.find(':');
        if (c2 == std::string::npos) throw InputError("sbm takes sbm or sbm:p_in:p_out");
        s.p_in = std::stod(rest.substr(0, c2));
        s.p_out = std::stod(rest.substr(c2 + 1));
      }
    } else {
      throw InputError("unknown model '" + text + "'");
    }
  } catch (const std::logic_error& e) {
    if (dynamic_cast<const InputError*>(&e)) throw;
    throw InputError("bad model ens '" + text + "'");
  }
  return s;
}

inline std::string model_spec_text(const EnsembleSpec& s) {
  switch (s.model) {
    case Model::ER: return "er:" + fmt_num(s.p);
    case Model::TREE: return "tree";
    case Model::BA: return "ba:" + std::to_string(s.m);
    case Model::SBM:
      if (s.p_in == kSbmPIn && s.p_out == kSbmPOut) return "sbm";
      return "sbm:" + fmt_num(s.p_in) + ":" + fmt_num(s.p_out);
  }
  return "?";
}

}  // namespace qbg
