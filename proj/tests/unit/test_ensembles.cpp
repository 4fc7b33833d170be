#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "qbgraph/ensembles.hpp"

using namespace qbg;

TEST(Rng, SubstreamsAreDistinctAndReproducible) {
  Rng a = Rng::substream(42, 0), b = Rng::substream(42, 0), c = Rng::substream(42, 1), d = Rng::substream(43, 0);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
}

TEST(Rng, Mt19937ReferenceValue) {
  // The 10000th output of a default-seeded mt19937_64 is fixed by the C++ standard.
  Rng r(5489);
  std::uint64_t v = 0;
  for (int i = 0; i < 10000; ++i) v = r.next_u64();
  EXPECT_EQ(v, 9981545732273789042ULL);
}

TEST(Rng, UniformAndBelowRanges) {
  Rng r(1);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = r.below(7);
    ASSERT_LT(k, 7U);
    ++hist[k];
  }
  for (int h : hist) EXPECT_NEAR(h, 10000, 5 * std::sqrt(10000 * 6.0 / 7));
}

TEST(Er, ExtremeProbabilities) {
  Rng r(3);
  EXPECT_EQ(er(9, 0.0, r).m(), 0);
  EXPECT_EQ(er(9, 1.0, r), complete(9));
  EXPECT_THROW(er(5, 1.5, r), InputError);
}

TEST(Er, MeanEdgeCountWithinThreeStandardErrors) {
  const int samples = 500;
  const double pairs = 60 * 59 / 2.0, p = 0.2;
  double sum = 0;
  for (int i = 0; i < samples; ++i) {
    Rng r = Rng::substream(100, i);
    sum += er(60, p, r).m();
  }
  const double se = std::sqrt(pairs * p * (1 - p) / samples);
  EXPECT_NEAR(sum / samples, pairs * p, 3 * se);
}

TEST(Prufer, HandDecodedExample) {
  const std::vector<int> seq{2, 2};
  EXPECT_EQ(prufer_decode(4, seq), from_edges(4, {{0, 2}, {1, 2}, {2, 3}}));
}

TEST(Prufer, SecondHandDecodedExample) {
  // (3, 3, 4) on 5 vertices: 0-3, 1-3, 2-4, then the last two leaves 3-4.
  const std::vector<int> seq{3, 3, 4};
  EXPECT_EQ(prufer_decode(5, seq), from_edges(5, {{0, 3}, {1, 3}, {2, 4}, {3, 4}}));
  EXPECT_THROW(prufer_decode(4, std::vector<int>{2}), InputError);
  EXPECT_THROW(prufer_decode(4, std::vector<int>{2, 4}), InputError);
}

TEST(Prufer, DegreesEqualOccurrencesPlusOne) {
  Rng r(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(r.below(15));
    std::vector<int> seq(n - 2);
    for (auto& s : seq) s = static_cast<int>(r.below(n));
    const Graph t = prufer_decode(n, seq);
    for (int v = 0; v < n; ++v)
      EXPECT_EQ(t.degree(v), 1 + static_cast<int>(std::count(seq.begin(), seq.end(), v)));
  }
}

TEST(RandomTree, TreeProperty) {
  for (int i = 0; i < 200; ++i) {
    Rng r = Rng::substream(5, i);
    const int n = 2 + i % 30;
    const Graph t = random_tree(n, r);
    EXPECT_EQ(t.m(), n - 1);
    EXPECT_TRUE(is_connected(t));
  }
  Rng r(0);
  EXPECT_EQ(random_tree(2, r), complete(2));
  EXPECT_THROW(random_tree(1, r), InputError);
}

TEST(RandomTree, UniformOverThreeLabeledPaths) {
  std::map<int, int> freq;  // keyed by the centre vertex
  const int samples = 3000;
  for (int i = 0; i < samples; ++i) {
    Rng r = Rng::substream(31, i);
    const Graph t = random_tree(3, r);
    for (int v = 0; v < 3; ++v)
      if (t.degree(v) == 2) ++freq[v];
  }
  const double p = 1.0 / 3, sd = std::sqrt(samples * p * (1 - p));
  for (int v = 0; v < 3; ++v) EXPECT_NEAR(freq[v], samples * p, 3 * sd) << v;
}

TEST(BarabasiAlbert, EdgeCountByConstruction) {
  Rng r(4);
  EXPECT_EQ(barabasi_albert(20, 2, r).m(), 3 + 17 * 2);
  for (int m = 1; m <= 4; ++m) {
    const int n = 25;
    EXPECT_EQ(barabasi_albert(n, m, r).m(), m * (m + 1) / 2 + (n - m - 1) * m);
  }
}

TEST(BarabasiAlbert, SeedCliqueOnlyAndErrors) {
  Rng r(4);
  EXPECT_EQ(barabasi_albert(4, 3, r), complete(4));
  EXPECT_THROW(barabasi_albert(3, 3, r), InputError);
  EXPECT_THROW(barabasi_albert(3, 0, r), InputError);
}

TEST(BarabasiAlbert, ConnectedAndNewVerticesAddExactlyM) {
  for (int i = 0; i < 100; ++i) {
    Rng r = Rng::substream(12, i);
    const Graph g = barabasi_albert(30, 2, r);
    EXPECT_TRUE(is_connected(g));
    // each added vertex v has exactly 2 neighbours among 0..v-1
    for (int v = 3; v < 30; ++v) {
      int back = 0;
      for (int u = 0; u < v; ++u) back += g.has_edge(u, v);
      EXPECT_EQ(back, 2);
    }
  }
}

TEST(BarabasiAlbert, HubsAttractMoreEdges) {
  // Preferential attachment: over many samples vertex 0 (in the seed
  // clique) ends with a larger mean degree than the last-added vertices.
  double early = 0, late = 0;
  for (int i = 0; i < 200; ++i) {
    Rng r = Rng::substream(13, i);
    const Graph g = barabasi_albert(40, 2, r);
    early += g.degree(0);
    late += g.degree(39);
  }
  EXPECT_GT(early, 3 * late);
}

TEST(Sbm, PartSizes) {
  Rng r(6);
  const Graph g = sbm_unbalanced(20, r, 0.0, 1.0);
  EXPECT_EQ(g, complete_bipartite(5, 15));
  EXPECT_THROW(sbm_unbalanced(3, r), InputError);
}

TEST(Sbm, MeanCrossEdgesWithinThreeStandardErrors) {
  const int samples = 300;
  const int u = 15, v = 45;
  double sum = 0;
  for (int i = 0; i < samples; ++i) {
    Rng r = Rng::substream(200, i);
    const Graph g = sbm_unbalanced(60, r);
    int cross = 0;
    for (const auto& [a, b] : g.edges()) cross += (a < u) != (b < u);
    sum += cross;
  }
  const double pairs = u * v, p = kSbmPOut;
  EXPECT_NEAR(sum / samples, pairs * p, 3 * std::sqrt(pairs * p * (1 - p) / samples));
}

TEST(EnsembleSpec, DeterministicAndIndexed) {
  for (const std::string text : {"er:0.3", "tree", "ba:2", "sbm"}) {
    EnsembleSpec s = parse_model(text);
    s.n = 16;
    s.seed = 99;
    s.sample_index = 4;
    const Graph a = sample(s), b = sample(s);
    EXPECT_EQ(a, b) << text;
    s.sample_index = 5;
    EXPECT_NE(sample(s), a) << text;
  }
}

TEST(EnsembleSpec, ParseAndLabel) {
  EXPECT_EQ(parse_model("er:0.1").label(), "er(p=0.1)");
  EXPECT_EQ(parse_model("ba:3").m, 3);
  EXPECT_EQ(parse_model("tree").model, Model::TREE);
  const auto s = parse_model("sbm:0.1:0.8");
  EXPECT_DOUBLE_EQ(s.p_in, 0.1);
  EXPECT_DOUBLE_EQ(s.p_out, 0.8);
  EXPECT_EQ(model_spec_text(s), "sbm:0.1:0.8");
  EXPECT_EQ(model_spec_text(parse_model("sbm")), "sbm");
  for (const std::string bad : {"er", "er:x", "er:1.5", "ba:0", "ba", "sbm:0.1", "wheel", ""})
    EXPECT_THROW(parse_model(bad), InputError) << bad;
}

TEST(Ensembles, OutputsAreSimpleGraphs) {
  for (int i = 0; i < 50; ++i)
    for (const std::string text : {"er:0.5", "tree", "ba:3", "sbm"}) {
      EnsembleSpec s = parse_model(text);
      s.n = 12;
      s.seed = 1;
      s.sample_index = i;
      const Graph g = sample(s);
      int count = 0;
      for (int a = 0; a < g.n(); ++a) {
        EXPECT_FALSE(g.has_edge(a, a));
        for (int b = 0; b < g.n(); ++b) {
          if (a == b) continue;
          EXPECT_EQ(g.has_edge(a, b), g.has_edge(b, a));
          count += a < b && g.has_edge(a, b);
        }
      }
      EXPECT_EQ(count, g.m());
    }
}
