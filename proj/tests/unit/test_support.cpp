#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "qbgraph/config.hpp"
#include "qbgraph/parallel.hpp"
#include "qbgraph/stats.hpp"
#include "qbgraph/table.hpp"

using namespace qbg;

TEST(Pearson, HandComputed) {
  // x = 1..4, y = 2,4,5,9: sxy = 11, sxx = 5, syy = 26
  EXPECT_NEAR(pearson({1, 2, 3, 4}, {2, 4, 5, 9}), 11 / std::sqrt(5.0 * 26), 1e-15);
  EXPECT_DOUBLE_EQ(pearson({1, 2, 3}, {3, 2, 1}), -1.0);
  EXPECT_DOUBLE_EQ(pearson({0, 1}, {5, 7}), 1.0);
}

TEST(Pearson, AffineInvariantAndBounded) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(20), y(20), y2(20);
    for (int i = 0; i < 20; ++i) {
      x[i] = nd(gen);
      y[i] = x[i] + nd(gen);
      y2[i] = 3 * y[i] - 7;
    }
    const double r = pearson(x, y);
    EXPECT_GE(r, -1.0);
    EXPECT_LE(r, 1.0);
    EXPECT_NEAR(pearson(x, y2), r, 1e-12);
    EXPECT_NEAR(pearson(y, x), r, 1e-15);
  }
}

TEST(Pearson, Errors) {
  EXPECT_THROW(pearson({1, 2}, {1}), InputError);
  EXPECT_THROW(pearson({1}, {1}), InputError);
  EXPECT_THROW(pearson({1, 1, 1}, {1, 2, 3}), NumericError);
}

TEST(Spearman, RanksWithTies) {
  EXPECT_EQ(ranks({10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {1, 8, 27, 64}), 1.0);
  EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
}

TEST(FitPowerLaw, RecoversExactExponent) {
  std::vector<std::pair<double, double>> pts;
  for (int n = 4; n <= 11; ++n) pts.emplace_back(n, 0.3 * std::pow(n, 1.5));
  const auto f = fit_power_law(pts);
  EXPECT_NEAR(f.eta, 1.5, 1e-12);
  EXPECT_NEAR(f.prefactor, 0.3, 1e-12);
  EXPECT_NEAR(f.rss, 0.0, 1e-20);
  EXPECT_NEAR(f.eta_stderr, 0.0, 1e-10);
  EXPECT_EQ(f.points, 8U);
  EXPECT_EQ(f.n_min, 4);
  EXPECT_EQ(f.n_max, 11);
}

TEST(FitPowerLaw, StandardErrorFormula) {
  // ln y residuals +-d alternate around ln y = 2 ln x
  const std::vector<double> xs{1, 2, 4, 8};
  const double d = 0.1;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < xs.size(); ++i) pts.emplace_back(xs[i], xs[i] * xs[i] * std::exp(i % 2 ? d : -d));
  const auto f = fit_power_law(pts);
  // Direct normal equations on (ln x, ln y) as the oracle.
  double mx = 0, my = 0;
  for (auto [x, y] : pts) {
    mx += std::log(x) / 4;
    my += std::log(y) / 4;
  }
  double sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sxx += std::pow(std::log(x) - mx, 2);
    sxy += (std::log(x) - mx) * (std::log(y) - my);
  }
  const double eta = sxy / sxx, b = my - eta * mx;
  double rss = 0;
  for (auto [x, y] : pts) rss += std::pow(std::log(y) - b - eta * std::log(x), 2);
  EXPECT_NEAR(f.eta, eta, 1e-14);
  EXPECT_NEAR(f.rss, rss, 1e-14);
  EXPECT_NEAR(f.eta_stderr, std::sqrt(rss / 2 / sxx), 1e-14);
}

TEST(FitPowerLaw, Errors) {
  EXPECT_THROW(fit_power_law({{1, 1}}), InputError);
  EXPECT_THROW(fit_power_law({{1, 1}, {2, 0}}), InputError);
  EXPECT_THROW(fit_power_law({{2, 1}, {2, 3}}), NumericError);
  EXPECT_TRUE(std::isnan(fit_power_law({{1, 1}, {2, 3}}).eta_stderr));
}

TEST(Summarize, Values) {
  const auto s = summarize({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(5.0 / 3));
  EXPECT_DOUBLE_EQ(s.max, 4);
  EXPECT_EQ(s.count, 4U);
  EXPECT_EQ(summarize({7}).std, 0.0);
  EXPECT_EQ(summarize({}).count, 0U);
}

TEST(ParallelMap, OrderIndependentOfJobs) {
  const auto f = [](std::size_t i) { return static_cast<double>(i * i) / 7.0; };
  const auto one = parallel_map(1000, 1, f);
  for (int jobs : {2, 3, 8, 64}) EXPECT_EQ(parallel_map(1000, jobs, f), one);
  EXPECT_TRUE(parallel_map(0, 4, f).empty());
}

TEST(ParallelMap, RethrowsAndRunsEveryItemOnce) {
  std::atomic<int> calls{0};
  parallel_map(500, 4, [&](std::size_t) { return ++calls; });
  EXPECT_EQ(calls.load(), 500);
  EXPECT_THROW(parallel_map(100, 4,
                            [](std::size_t i) {
                              if (i == 37) throw NumericError("boom");
                              return 0;
                            }),
               NumericError);
}

TEST(RunConfig, ParseAndGetters) {
  auto cfg = RunConfig::parse(
      "# comment\n"
      "n = 3..5, 7\n"
      "h = 0, 1.5   # trailing\n"
      "model = er:0.1,tree\n"
      "check = true\n"
      "seed = 18446744073709551615\n");
  EXPECT_EQ(cfg.ints_or("n", {}), (std::vector<int>{3, 4, 5, 7}));
  EXPECT_EQ(cfg.doubles_or("h", {}), (std::vector<double>{0, 1.5}));
  EXPECT_EQ(cfg.strings_or("model", {}), (std::vector<std::string>{"er:0.1", "tree"}));
  EXPECT_TRUE(cfg.bool_or("check", false));
  EXPECT_EQ(cfg.u64_or("seed", 0), 18446744073709551615ULL);
  EXPECT_EQ(cfg.double_or("dt", 0.01), 0.01);
  EXPECT_TRUE(cfg.has("dt"));  // defaults are recorded
}

TEST(RunConfig, RoundTripIsLossless) {
  auto cfg = RunConfig::parse("kappa = 0.1,1,5\nomega=0.30000000000000004\nout = runs/a b\n");
  cfg.double_or("t-max", 1.0 / 3);
  cfg.ints_or("n", {4, 5});
  const auto again = RunConfig::parse(cfg.to_text());
  EXPECT_EQ(again, cfg);
  auto copy = again;
  EXPECT_EQ(copy.double_or("t-max", 0), 1.0 / 3);
  EXPECT_EQ(copy.doubles_or("omega", {}), std::vector<double>{0.30000000000000004});
}

TEST(RunConfig, MergeOverrides) {
  auto base = RunConfig::parse("n = 5\nh = 0\n");
  base.merge(RunConfig::parse("h = 1\n"));
  EXPECT_EQ(base.doubles_or("h", {}), std::vector<double>{1});
  EXPECT_EQ(base.ints_or("n", {}), std::vector<int>{5});
}

TEST(RunConfig, RejectsBadInput) {
  for (const std::string bad : {"bogus = 1\n", "n = x\n", "n = 5..3\n", "dt = fast\n", "check = maybe\n",
                                "n\n", "seed = -1\n", "h = 1,,2\n", "model = \n"})
    EXPECT_THROW(RunConfig::parse(bad), InputError) << bad;
  EXPECT_THROW(RunConfig::load("/nonexistent/qbgraph.conf"), InputError);
}

TEST(RunConfig, ChargerModes) {
  EXPECT_EQ(resolve_charger_modes("1", 7), 1);
  EXPECT_EQ(resolve_charger_modes("N", 7), 7);
  EXPECT_EQ(resolve_charger_modes("3", 7), 3);
  EXPECT_THROW(resolve_charger_modes("0", 7), InputError);
  EXPECT_THROW(resolve_charger_modes("many", 7), InputError);
}

TEST(Table, CsvRendering) {
  Table t{"demo", {"id", "value", "label"}, {}};
  t.add({std::int64_t{3}, 0.1 + 0.2, std::string("a,b")});
  t.add({std::int64_t{-1}, std::nan(""), std::string("say \"hi\"")});
  EXPECT_EQ(render(t, "csv"), "id,value,label\n3,0.3,\"a,b\"\n-1,,\"say \"\"hi\"\"\"\n");
  EXPECT_THROW(t.add({std::int64_t{1}}), InputError);
  EXPECT_THROW(render(t, "xml"), InputError);
}

TEST(Table, JsonRendering) {
  Table t{"demo", {"id", "value", "label"}, {}};
  t.add({std::int64_t{3}, 1.0 / 3, std::string("x")});
  t.add({std::int64_t{4}, std::nan(""), std::string("y")});
  const auto j = nlohmann::json::parse(render(t, "json"));
  ASSERT_EQ(j.size(), 2U);
  EXPECT_EQ(j[0]["id"], 3);
  EXPECT_EQ(j[0]["value"].get<double>(), 0.333333333333);
  EXPECT_TRUE(j[1]["value"].is_null());
  EXPECT_EQ(j[1]["label"], "y");
}

TEST(Table, WriteTableCreatesDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "qbgraph_table_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  Table t{"rows", {"a"}, {}};
  t.add({std::int64_t{1}});
  EXPECT_EQ(write_table(dir, t, "csv"), "rows.csv");
  std::ifstream in(dir / "rows.csv");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "a\n1\n");
  std::filesystem::remove_all(dir.parent_path());
}
