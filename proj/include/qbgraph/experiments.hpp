#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "qbgraph/config.hpp"
#include "qbgraph/dynamics.hpp"
#include "qbgraph/ensembles.hpp"
#include "qbgraph/enumerate.hpp"
#include "qbgraph/errors.hpp"
#include "qbgraph/graph.hpp"
#include "qbgraph/parallel.hpp"
#include "qbgraph/spectral.hpp"
#include "qbgraph/stats.hpp"
#include "qbgraph/table.hpp"

namespace qbg {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kBoundTol = 1e-9;

// ---------------------------------------------------------------------------
// Shared building blocks

/// Charging parameters shared by every dynamics-driven experiment.
struct ChargeParams {
  double h = 0.0;
  double kappa = 1.0;
  double omega = 1.0;
  std::string charger_modes = "1";
  double dt = kDefaultDt;
  double t_max = kDefaultTMax;
};

struct PowerPoint {
  double p_init = kNaN;
  double p_max = kNaN;
  double t_at_max = kNaN;
  bool horizon_warning = false;
  std::string error;
};

inline PowerPoint power_point(const Graph& g, const ChargeParams& p) {
  PowerPoint out;
  try {
    const auto model = make_model(g, p.h, p.kappa, p.omega, resolve_charger_modes(p.charger_modes, g.n()));
    const auto tr = charge_trace(model, p.t_max, p.dt, false);
    out.p_init = tr.p_init;
    out.p_max = tr.p_max;
    out.t_at_max = tr.t_at_max;
    out.horizon_warning = tr.horizon_warning;
  } catch (const InputError& e) {
    out.error = e.what();
  } catch (const NumericError& e) {
    out.error = e.what();
  }
  return out;
}

/// Per-graph spectral metric record.
struct MetricRecord {
  double eps_min = kNaN, eps_max = kNaN, eps_plus = kNaN;
  double w_min = kNaN, w_minus = kNaN, ratio = kNaN;
  std::vector<double> r_h;
  double negsec_lhs = kNaN, negsec_rhs = kNaN;
  double degvar_lhs = kNaN, degvar_rhs = kNaN;
  double growth_lhs = kNaN, growth_rhs = kNaN;  // the pair with the largest lhs - rhs
  std::string error;
};

inline MetricRecord metric_record(const Graph& g, const std::vector<double>& hs) {
  MetricRecord r;
  r.r_h.assign(hs.size(), kNaN);
  if (g.m() == 0) {
    r.error = "empty graph";
    return r;
  }
  try {
    const auto sd = decompose(g);
    r.eps_min = sd.eps_min();
    r.eps_max = sd.eps_max();
    r.eps_plus = eps_plus(sd);
    r.w_min = w_min(sd);
    r.w_minus = w_minus(sd).value;
    if (g.n() >= 3) r.ratio = ratio_metric(sd);
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const auto v = r_of_h(sd, hs[i]);
      r.r_h[i] = v.empty ? kNaN : v.value;
    }
    const auto l1 = bound_negative_sector(g, sd);
    r.negsec_lhs = l1.lhs;
    r.negsec_rhs = l1.rhs;
    const auto dv = bound_degree_variance(g, sd);
    r.degvar_lhs = dv.lhs;
    r.degvar_rhs = dv.rhs;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& b : bound_overlap_growth(g, sd))
      if (b.lhs - b.rhs > worst) {
        worst = b.lhs - b.rhs;
        r.growth_lhs = b.lhs;
        r.growth_rhs = b.rhs;
      }
  } catch (const NumericError& e) {
    r.error = e.what();
  }
  return r;
}

inline std::string h_suffix(double h) { return "_h" + fmt_num(h); }

inline std::vector<std::string> metric_columns(const std::vector<double>& hs) {
  std::vector<std::string> cols = {"eps_min", "eps_max", "eps_plus", "w_min", "w_minus", "ratio"};
  for (double h : hs) cols.push_back("r" + h_suffix(h));
  for (const char* c : {"negsec_lhs", "negsec_rhs", "degvar_lhs", "degvar_rhs", "growth_lhs", "growth_rhs"})
    cols.emplace_back(c);
  return cols;
}

inline void append_metric_cells(std::vector<Cell>& row, const MetricRecord& r) {
  for (double x : {r.eps_min, r.eps_max, r.eps_plus, r.w_min, r.w_minus, r.ratio}) row.emplace_back(x);
  for (double x : r.r_h) row.emplace_back(x);
  for (double x : {r.negsec_lhs, r.negsec_rhs, r.degvar_lhs, r.degvar_rhs, r.growth_lhs, r.growth_rhs})
    row.emplace_back(x);
}

inline std::string degseq_text(const std::vector<int>& d) {
  return join(d, " ", [](int x) { return std::to_string(x); });
}

inline std::int64_t as_int(std::size_t x) { return static_cast<std::int64_t>(x); }

// ---------------------------------------------------------------------------
// Exhaustive atlas sweep

struct AtlasRow {
  AtlasRecord rec;
  int alpha = 0;
  bool is_star = false;
  bool is_perturbed_star = false;
  MetricRecord metrics;
  std::vector<PowerPoint> power;  // one per h
};

/// Every connected graph on n vertices in atlas order, with spectral metrics
/// and charging figures at each h.
inline std::vector<AtlasRow> sweep_atlas(int n, const std::vector<double>& hs, ChargeParams base, int jobs) {
  if (n < 3 || n > 7) throw InputError("sweep-atlas supports 3 <= n <= 7");
  if (hs.empty()) throw InputError("sweep-atlas needs at least one h");
  const auto recs = atlas_sort(enumerate_connected(n));
  const auto star_key = canonical_key(star(n));
  const auto pstar_key = canonical_key(perturbed_star(n));
  const std::size_t per_graph = hs.size();

  auto powers = parallel_map(recs.size() * per_graph, jobs, [&](std::size_t i) {
    ChargeParams p = base;
    p.h = hs[i % per_graph];
    return power_point(recs[i / per_graph].graph, p);
  });
  auto metrics = parallel_map(recs.size(), jobs, [&](std::size_t i) { return metric_record(recs[i].graph, hs); });

  std::vector<AtlasRow> rows;
  rows.reserve(recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    AtlasRow r;
    r.rec = recs[i];
    r.alpha = independence_number(recs[i].graph);
    r.is_star = recs[i].key == star_key;
    r.is_perturbed_star = recs[i].key == pstar_key;
    r.metrics = std::move(metrics[i]);
    r.power.assign(powers.begin() + static_cast<std::ptrdiff_t>(i * per_graph),
                   powers.begin() + static_cast<std::ptrdiff_t>((i + 1) * per_graph));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Indices of rows ordered by p_max at h index `hi`, best first.
inline std::vector<std::size_t> rank_by_p_max(const std::vector<AtlasRow>& rows, std::size_t hi) {
  std::vector<std::size_t> idx(rows.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto key = [&](std::size_t i) {
    const double p = rows[i].power[hi].p_max;
    return std::isnan(p) ? -std::numeric_limits<double>::infinity() : p;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return key(a) > key(b); });
  return idx;
}

// ---------------------------------------------------------------------------
// Random-ensemble envelope benchmark

struct BenchSample {
  std::string model;
  int n = 0;
  std::uint64_t index = 0;
  int m = 0;
  bool connected = false;
  double w_minus = 0.0;
  double ratio = 0.0;
  std::string flag;
};

struct BenchCell {
  std::string model;
  int n = 0;
  Summary ratio;
  int exceedances = 0;
  int empty = 0;
};

struct BenchResult {
  std::vector<BenchSample> samples;
  std::vector<BenchCell> cells;
  int exceedances = 0;
  std::map<std::string, bool> monotone;  // mean ratio strictly decreasing in n
};

inline const std::vector<std::string>& default_bench_models() {
  static const std::vector<std::string> m = {"er:0.1", "er:0.2", "tree", "ba:2", "ba:3", "sbm"};
  return m;
}

inline BenchResult bench_ratios(const std::vector<std::string>& models, std::vector<int> sizes, int samples,
                                std::uint64_t seed, int jobs) {
  if (samples < 1) throw InputError("samples must be >= 1");
  std::sort(sizes.begin(), sizes.end());
  for (int n : sizes)
    if (n < 4 || n > 64) throw InputError("bench-ratios supports 4 <= n <= 64");
  std::vector<EnsembleSpec> specs;
  for (const auto& text : models) specs.push_back(parse_model(text));

  struct Item {
    std::size_t ens;
    int n;
    std::uint64_t index;
  };
  std::vector<Item> items;
  for (std::size_t s = 0; s < specs.size(); ++s)
    for (int n : sizes)
      for (int i = 0; i < samples; ++i) items.push_back({s, n, static_cast<std::uint64_t>(i)});

  BenchResult res;
  res.samples = parallel_map(items.size(), jobs, [&](std::size_t k) {
    const Item& it = items[k];
    EnsembleSpec ens = specs[it.ens];
    ens.n = it.n;
    ens.seed = seed;
    ens.sample_index = it.index;
    const Graph g = sample(ens);
    BenchSample b{ens.label(), it.n, it.index, g.m(), is_connected(g), 0.0, 0.0, ""};
    if (g.m() == 0) {
      b.flag = "empty";
      return b;
    }
    const auto sd = decompose(g);
    b.w_minus = w_minus(sd).value;
    b.ratio = ratio_metric(sd);
    if (b.ratio > 1.0) b.flag = "exceeds";
    return b;
  });

  std::size_t k = 0;
  for (const auto& ens : specs) {
    double prev = std::numeric_limits<double>::infinity();
    bool mono = true;
    for (int n : sizes) {
      BenchCell c{ens.label(), n, {}, 0, 0};
      std::vector<double> ratios;
      for (int i = 0; i < samples; ++i, ++k) {
        const auto& s = res.samples[k];
        ratios.push_back(s.ratio);
        c.exceedances += s.ratio > 1.0;
        c.empty += s.m == 0;
      }
      c.ratio = summarize(ratios);
      mono = mono && c.ratio.mean < prev;
      prev = c.ratio.mean;
      res.exceedances += c.exceedances;
      res.cells.push_back(std::move(c));
    }
    res.monotone[ens.label()] = mono;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Star scaling

struct ScalingPoint {
  int n = 0;
  int charger_modes = 1;
  PowerPoint power;
};

struct ScalingResult {
  std::vector<ScalingPoint> points;
  FitResult fit;
};

inline ScalingResult scaling_sweep(const std::vector<int>& ns, const ChargeParams& p, int jobs) {
  if (ns.size() < 3) throw InputError("scaling fit needs at least three sizes");
  ScalingResult res;
  res.points = parallel_map(ns.size(), jobs, [&](std::size_t i) {
    if (ns[i] < 3 || ns[i] > 64) throw InputError("scaling sizes must lie in 3..64");
    return ScalingPoint{ns[i], resolve_charger_modes(p.charger_modes, ns[i]), power_point(star(ns[i]), p)};
  });
  std::vector<std::pair<double, double>> pts;
  for (const auto& s : res.points) {
    if (!s.power.error.empty()) throw NumericError("scaling at n=" + std::to_string(s.n) + ": " + s.power.error);
    pts.emplace_back(s.n, s.power.p_max);
  }
  res.fit = fit_power_law(pts);
  return res;
}

// ---------------------------------------------------------------------------
// P_init versus P_max correlation grid

struct CorrelationCell {
  double h = 0, omega = 0, kappa = 0;
  std::vector<double> p_init, p_max;
  double r_p = kNaN;  // NaN when either vector has zero variance
  bool flagged = false;
  bool star_max_p_max = false;
  bool star_max_p_init = false;
  double star_p_max = kNaN;
  double runner_up_p_max = kNaN;
};

struct CorrelationResult {
  std::vector<Graph> graphs;
  std::size_t star_index = 0;
  std::vector<CorrelationCell> cells;
};

inline CorrelationResult correlate(int n, const std::vector<double>& hs, const std::vector<double>& omegas,
                                   const std::vector<double>& kappas, const ChargeParams& base, int jobs) {
  if (n < 3 || n > 7) throw InputError("correlate supports 3 <= n <= 7");
  CorrelationResult res;
  res.graphs = enumerate_connected(n);
  const auto sk = canonical_key(star(n));
  for (std::size_t i = 0; i < res.graphs.size(); ++i)
    if (canonical_key(res.graphs[i]) == sk) res.star_index = i;

  for (double h : hs)
    for (double w : omegas)
      for (double k : kappas) res.cells.push_back(CorrelationCell{h, w, k, {}, {}, kNaN, false, false, false, kNaN, kNaN});

  const std::size_t g_count = res.graphs.size();
  const auto pts = parallel_map(res.cells.size() * g_count, jobs, [&](std::size_t i) {
    const auto& c = res.cells[i / g_count];
    ChargeParams p = base;
    p.h = c.h;
    p.omega = c.omega;
    p.kappa = c.kappa;
    return power_point(res.graphs[i % g_count], p);
  });

  for (std::size_t ci = 0; ci < res.cells.size(); ++ci) {
    auto& c = res.cells[ci];
    for (std::size_t g = 0; g < g_count; ++g) {
      const auto& pp = pts[ci * g_count + g];
      if (!pp.error.empty()) throw NumericError("correlate: " + pp.error);
      c.p_init.push_back(pp.p_init);
      c.p_max.push_back(pp.p_max);
    }
    try {
      c.r_p = pearson(c.p_init, c.p_max);
    } catch (const NumericError&) {
      c.flagged = true;
    }
    c.star_p_max = c.p_max[res.star_index];
    double best_other = -std::numeric_limits<double>::infinity(), best_other_init = best_other;
    for (std::size_t g = 0; g < g_count; ++g) {
      if (g == res.star_index) continue;
      best_other = std::max(best_other, c.p_max[g]);
      best_other_init = std::max(best_other_init, c.p_init[g]);
    }
    c.runner_up_p_max = best_other;
    c.star_max_p_max = c.star_p_max > best_other;
    c.star_max_p_init = c.p_init[res.star_index] > best_other_init;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Charging traces

struct TraceRun {
  std::string preset;
  std::string label;
  Graph graph;
  ChargeParams params;
  ChargeTrace trace;
};

/// (max - min) / mean of the values.
inline double relative_spread(const std::vector<double>& xs) {
  if (xs.empty()) return kNaN;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double mean = summarize(xs).mean;
  return (*hi - *lo) / mean;
}

inline Graph topology_graph(const std::string& name, int n, std::uint64_t seed) {
  if (name == "star") return star(n);
  if (name == "path") return path(n);
  if (name == "cycle") return cycle(n);
  if (name == "complete") return complete(n);
  if (name == "perturbed-star") return perturbed_star(n);
  if (name.rfind("er:", 0) == 0) {
    EnsembleSpec ens = parse_model(name);
    ens.n = n;
    ens.seed = seed;
    return sample(ens);
  }
  throw InputError("unknown topology '" + name + "'");
}

struct DynamicsPlan {
  std::string preset = "all";
  int n = 7;
  std::string topology = "star";
  std::vector<double> omegas{0.1, 0.5, 1, 2, 5};
  std::vector<double> kappas{0.1, 0.5, 1, 2, 5};
  ChargeParams base;
  std::uint64_t seed = 0;
};

inline std::vector<TraceRun> run_dynamics(const DynamicsPlan& plan, int jobs) {
  static const std::vector<std::string> known = {"all", "topologies", "omega", "kappa", "single"};
  if (std::find(known.begin(), known.end(), plan.preset) == known.end())
    throw InputError("unknown dynamics preset '" + plan.preset + "'");
  const bool all = plan.preset == "all";
  std::vector<TraceRun> runs;
  auto add = [&](const std::string& preset, const std::string& label, Graph g, ChargeParams p) {
    runs.push_back(TraceRun{preset, label, std::move(g), p, {}});
  };
  if (all || plan.preset == "topologies") {
    ChargeParams p = plan.base;
    p.omega = 1;
    p.kappa = 1;
    for (const std::string t : {"star", "complete", "path", "er:0.4"})
      add("topologies", t == "er:0.4" ? "er(p=0.4)" : t, topology_graph(t, plan.n, plan.seed), p);
  }
  if (all || plan.preset == "omega")
    for (double w : plan.omegas) {
      ChargeParams p = plan.base;
      p.omega = w;
      p.kappa = 1;
      add("omega", "star omega=" + fmt_num(w), star(plan.n), p);
    }
  if (all || plan.preset == "kappa")
    for (double k : plan.kappas) {
      ChargeParams p = plan.base;
      p.omega = 1;
      p.kappa = k;
      add("kappa", "star kappa=" + fmt_num(k), star(plan.n), p);
    }
  if (plan.preset == "single") {
    ChargeParams p = plan.base;
    p.omega = plan.omegas.front();
    p.kappa = plan.kappas.front();
    add("single", plan.topology, topology_graph(plan.topology, plan.n, plan.seed), p);
  }
  auto traces = parallel_map(runs.size(), jobs, [&](std::size_t i) {
    const auto& r = runs[i];
    const auto model =
        make_model(r.graph, r.params.h, r.params.kappa, r.params.omega, resolve_charger_modes(r.params.charger_modes, r.graph.n()));
    return charge_trace(model, r.params.t_max, r.params.dt);
  });
  for (std::size_t i = 0; i < runs.size(); ++i) runs[i].trace = std::move(traces[i]);
  return runs;
}

// ---------------------------------------------------------------------------
// Conjecture sweep

struct ConjectureCase {
  int n = 0;
  std::string hex;
  std::vector<int> degseq;
  double w_min = 0.0;
  double excess = 0.0;  // w_min - benchmark
  bool is_star = false;
};

struct ConjectureLevel {
  int n = 0;
  std::size_t graphs = 0;
  double max_excess = -std::numeric_limits<double>::infinity();
  int violations = 0;
};

struct ConjectureResult {
  std::vector<ConjectureLevel> levels;
  std::vector<ConjectureCase> equality_cases;
  std::vector<ConjectureCase> violations;
  std::string spot_model;
  int spot_n = 0;
  int spot_samples = 0;
  double spot_max_excess = -std::numeric_limits<double>::infinity();
  int spot_violations = 0;

  int total_violations() const {
    int v = spot_violations;
    for (const auto& l : levels) v += l.violations;
    return v;
  }
};

/// Checks w_min(G) <= n/2 - sqrt(n - 1) over every non-empty graph on each n,
/// then over random spot samples.
inline ConjectureResult conjecture_sweep(const std::vector<int>& ns, const std::string& spot_model, int spot_n,
                                         int spot_samples, std::uint64_t seed, int jobs) {
  ConjectureResult res;
  for (int n : ns) {
    if (n < 2 || n > 7) throw InputError("conjecture exhaustive sizes must lie in 2..7");
    const auto graphs = enumerate_all(n);
    const double bench = star_benchmark(n);
    const auto sk = canonical_key(star(n));
    const auto cases = parallel_map(graphs.size(), jobs, [&](std::size_t i) {
      ConjectureCase c;
      c.n = n;
      if (graphs[i].m() == 0) return c;
      c.hex = to_hex(graphs[i]);
      c.degseq = sorted_degrees(graphs[i]);
      c.w_min = w_min(decompose(graphs[i]));
      c.excess = c.w_min - bench;
      c.is_star = canonical_key(graphs[i]) == sk;
      return c;
    });
    ConjectureLevel lvl;
    lvl.n = n;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      if (graphs[i].m() == 0) continue;
      const auto& c = cases[i];
      ++lvl.graphs;
      lvl.max_excess = std::max(lvl.max_excess, c.excess);
      if (c.excess > kBoundTol) {
        ++lvl.violations;
        res.violations.push_back(c);
      } else if (std::abs(c.excess) <= kBoundTol) {
        res.equality_cases.push_back(c);
      }
    }
    res.levels.push_back(lvl);
  }
  if (spot_samples > 0) {
    EnsembleSpec ens = parse_model(spot_model);
    ens.n = spot_n;
    ens.seed = seed;
    res.spot_model = ens.label();
    res.spot_n = spot_n;
    res.spot_samples = spot_samples;
    const double bench = star_benchmark(spot_n);
    const auto excess = parallel_map(static_cast<std::size_t>(spot_samples), jobs, [&](std::size_t i) {
      EnsembleSpec s = ens;
      s.sample_index = i;
      const Graph g = sample(s);
      return g.m() == 0 ? -bench : w_min(decompose(g)) - bench;
    });
    for (double e : excess) {
      res.spot_max_excess = std::max(res.spot_max_excess, e);
      res.spot_violations += e > kBoundTol;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Command layer: RunConfig in, tables and a summary out.

struct CommandOutput {
  std::vector<Table> tables;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  bool check_failed = false;
};

inline ChargeParams charge_params(RunConfig& cfg) {
  ChargeParams p;
  p.charger_modes = cfg.string_or("charger-modes", "1");
  p.dt = cfg.double_or("dt", kDefaultDt);
  p.t_max = cfg.double_or("t-max", kDefaultTMax);
  if (!(p.dt > 0) || !(p.t_max > p.dt)) throw InputError("need t-max > dt > 0");
  return p;
}

inline int jobs_of(RunConfig& cfg) {
  const auto j = cfg.int_or("jobs", default_jobs());
  if (j < 1) throw InputError("jobs must be >= 1");
  return static_cast<int>(j);
}

inline nlohmann::ordered_json json_num(double x) {
  return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
}

inline CommandOutput cmd_enumerate(RunConfig& cfg) {
  const auto ns = cfg.ints_or("n", {3, 4, 5, 6, 7});
  const bool all = cfg.bool_or("all", false);
  const auto hs = cfg.doubles_or("h", {0.0});
  const int jobs = jobs_of(cfg);
  Table t{"enumerate", {"n", "index", "key", "hex", "m", "degseq", "aut", "alpha", "connected"}, {}};
  for (const auto& c : metric_columns(hs)) t.columns.push_back(c);
  t.columns.push_back("error");
  CommandOutput out;
  for (int n : ns) {
    const auto recs = atlas_sort(all ? enumerate_all(n) : enumerate_connected(n));
    const auto metrics = parallel_map(recs.size(), jobs, [&](std::size_t i) { return metric_record(recs[i].graph, hs); });
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      std::vector<Cell> row{std::int64_t{n},
                            std::int64_t{r.index},
                            r.key.hex(),
                            to_hex(r.graph),
                            std::int64_t{r.m},
                            degseq_text(r.degseq),
                            static_cast<std::int64_t>(r.aut),
                            std::int64_t{independence_number(r.graph)},
                            std::int64_t{is_connected(r.graph)}};
      append_metric_cells(row, metrics[i]);
      row.emplace_back(metrics[i].error);
      t.add(std::move(row));
    }
    out.summary["counts"][std::to_string(n)] = recs.size();
  }
  out.tables.push_back(std::move(t));
  return out;
}

inline CommandOutput cmd_sweep_atlas(RunConfig& cfg) {
  const auto ns = cfg.ints_or("n", {7});
  const auto hs = cfg.doubles_or("h", {0.0, 1.0});
  ChargeParams base = charge_params(cfg);
  base.kappa = cfg.doubles_or("kappa", {1.0}).front();
  base.omega = cfg.doubles_or("omega", {1.0}).front();
  const int jobs = jobs_of(cfg);

  Table t{"sweep_atlas", {"n", "index", "key", "m", "degseq", "aut", "alpha", "is_star", "is_perturbed_star"}, {}};
  for (const auto& c : metric_columns(hs)) t.columns.push_back(c);
  for (double h : hs)
    for (const char* c : {"p_init", "p_max", "t_at_max", "horizon_warning"}) t.columns.push_back(c + h_suffix(h));
  t.columns.push_back("error");

  CommandOutput out;
  for (int n : ns) {
    const auto rows = sweep_atlas(n, hs, base, jobs);
    for (const auto& r : rows) {
      std::vector<Cell> row{std::int64_t{n},
                            std::int64_t{r.rec.index},
                            r.rec.key.hex(),
                            std::int64_t{r.rec.m},
                            degseq_text(r.rec.degseq),
                            static_cast<std::int64_t>(r.rec.aut),
                            std::int64_t{r.alpha},
                            std::int64_t{r.is_star},
                            std::int64_t{r.is_perturbed_star}};
      append_metric_cells(row, r.metrics);
      std::string err = r.metrics.error;
      for (const auto& p : r.power) {
        row.insert(row.end(), {p.p_init, p.p_max, p.t_at_max, std::int64_t{p.horizon_warning}});
        if (err.empty()) err = p.error;
      }
      row.emplace_back(err);
      t.add(std::move(row));
    }
    auto& s = out.summary["sizes"][std::to_string(n)];
    s["graphs"] = rows.size();
    for (std::size_t hi = 0; hi < hs.size(); ++hi) {
      const auto rank = rank_by_p_max(rows, hi);
      auto& e = s["h" + fmt_num(hs[hi])];
      e["best_index"] = rows[rank[0]].rec.index;
      e["best_is_star"] = rows[rank[0]].is_star;
      e["best_p_max"] = json_num(rows[rank[0]].power[hi].p_max);
      if (rank.size() > 1) {
        e["second_index"] = rows[rank[1]].rec.index;
        e["second_is_perturbed_star"] = rows[rank[1]].is_perturbed_star;
        e["second_p_max"] = json_num(rows[rank[1]].power[hi].p_max);
      }
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

inline CommandOutput cmd_bench_ratios(RunConfig& cfg) {
  const auto models = cfg.strings_or("model", default_bench_models());
  const auto sizes = cfg.ints_or("n", {10, 15, 20, 30, 40, 50, 60});
  const auto samples = static_cast<int>(cfg.int_or("samples", 100));
  const auto seed = cfg.u64_or("seed", 0);
  const bool check = cfg.bool_or("check", false);
  const auto res = bench_ratios(models, sizes, samples, seed, jobs_of(cfg));

  Table t{"bench_ratios", {"model", "n", "sample_index", "m", "connected", "w_minus", "ratio", "flag"}, {}};
  for (const auto& s : res.samples)
    t.add({s.model, std::int64_t{s.n}, static_cast<std::int64_t>(s.index), std::int64_t{s.m},
           std::int64_t{s.connected}, s.w_minus, s.ratio, s.flag});
  Table c{"bench_ratios_summary", {"model", "n", "samples", "mean", "std", "max", "exceedances", "empty"}, {}};
  for (const auto& cell : res.cells)
    c.add({cell.model, std::int64_t{cell.n}, as_int(cell.ratio.count), cell.ratio.mean, cell.ratio.std,
           cell.ratio.max, std::int64_t{cell.exceedances}, std::int64_t{cell.empty}});

  CommandOutput out;
  out.summary["exceedances"] = res.exceedances;
  for (const auto& [m, mono] : res.monotone) out.summary["mean_decreasing_in_n"][m] = mono;
  for (const auto& cell : res.cells) {
    auto& e = out.summary["cells"][cell.model][std::to_string(cell.n)];
    e["mean"] = cell.ratio.mean;
    e["std"] = cell.ratio.std;
    e["max"] = cell.ratio.max;
    e["exceedances"] = cell.exceedances;
  }
  out.check_failed = check && res.exceedances > 0;
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(c));
  return out;
}

inline CommandOutput cmd_scaling(RunConfig& cfg) {
  const auto ns = cfg.ints_or("n", {4, 5, 6, 7, 8, 9, 10, 11});
  ChargeParams p = charge_params(cfg);
  p.h = cfg.doubles_or("h", {0.0}).front();
  p.kappa = cfg.doubles_or("kappa", {1.0}).front();
  p.omega = cfg.doubles_or("omega", {1.0}).front();
  const auto res = scaling_sweep(ns, p, jobs_of(cfg));
  Table t{"scaling", {"n", "charger_modes", "p_init", "p_max", "t_at_max", "horizon_warning"}, {}};
  for (const auto& s : res.points)
    t.add({std::int64_t{s.n}, std::int64_t{s.charger_modes}, s.power.p_init, s.power.p_max, s.power.t_at_max,
           std::int64_t{s.power.horizon_warning}});
  CommandOutput out;
  out.summary["eta"] = res.fit.eta;
  out.summary["eta_stderr"] = json_num(res.fit.eta_stderr);
  out.summary["prefactor"] = res.fit.prefactor;
  out.summary["rss"] = res.fit.rss;
  out.summary["n_min"] = res.fit.n_min;
  out.summary["n_max"] = res.fit.n_max;
  out.summary["points"] = res.fit.points;
  out.tables.push_back(std::move(t));
  return out;
}

inline CommandOutput cmd_correlate(RunConfig& cfg) {
  const int n = cfg.ints_or("n", {7}).front();
  const auto hs = cfg.doubles_or("h", {0.0, 1.0});
  const auto omegas = cfg.doubles_or("omega", {0.1, 1.0, 5.0});
  const auto kappas = cfg.doubles_or("kappa", {0.1, 1.0, 5.0});
  const auto res = correlate(n, hs, omegas, kappas, charge_params(cfg), jobs_of(cfg));

  Table pts{"correlate_points", {"h", "omega", "kappa", "graph", "key", "is_star", "p_init", "p_max"}, {}};
  Table cells{"correlate_cells",
              {"h", "omega", "kappa", "graphs", "r_p", "flagged", "star_max_p_max", "star_max_p_init", "star_p_max",
               "runner_up_p_max"},
              {}};
  std::vector<std::string> keys;
  for (const auto& g : res.graphs) keys.push_back(canonical_key(g).hex());
  for (const auto& c : res.cells) {
    for (std::size_t g = 0; g < res.graphs.size(); ++g)
      pts.add({c.h, c.omega, c.kappa, as_int(g), keys[g], std::int64_t{g == res.star_index}, c.p_init[g], c.p_max[g]});
    cells.add({c.h, c.omega, c.kappa, as_int(res.graphs.size()), c.r_p, std::int64_t{c.flagged},
               std::int64_t{c.star_max_p_max}, std::int64_t{c.star_max_p_init}, c.star_p_max, c.runner_up_p_max});
  }
  CommandOutput out;
  double r_min = std::numeric_limits<double>::infinity();
  int star_max = 0;
  for (const auto& c : res.cells) {
    if (!c.flagged) r_min = std::min(r_min, c.r_p);
    star_max += c.star_max_p_max;
  }
  out.summary["cells"] = res.cells.size();
  out.summary["min_r_p"] = json_num(r_min);
  out.summary["cells_star_max_p_max"] = star_max;
  out.tables.push_back(std::move(pts));
  out.tables.push_back(std::move(cells));
  return out;
}

inline CommandOutput cmd_dynamics(RunConfig& cfg) {
  DynamicsPlan plan;
  plan.preset = cfg.string_or("preset", "all");
  plan.n = cfg.ints_or("n", {7}).front();
  plan.topology = cfg.string_or("topology", "star");
  plan.omegas = cfg.doubles_or("omega", plan.omegas);
  plan.kappas = cfg.doubles_or("kappa", plan.kappas);
  plan.base = charge_params(cfg);
  plan.base.h = cfg.doubles_or("h", {0.0}).front();
  plan.seed = cfg.u64_or("seed", 0);
  const auto runs = run_dynamics(plan, jobs_of(cfg));

  Table traces{"dynamics_traces", {"preset", "label", "t", "W", "P"}, {}};
  Table summary{"dynamics_summary",
                {"preset", "label", "n", "m", "h", "omega", "kappa", "charger_modes", "p_init", "p_max", "t_at_max",
                 "horizon_warning"},
                {}};
  std::map<std::string, std::vector<double>> t_at_max;
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.trace.times.size(); ++i)
      traces.add({r.preset, r.label, r.trace.times[i], r.trace.work[i], r.trace.power[i]});
    summary.add({r.preset, r.label, std::int64_t{r.graph.n()}, std::int64_t{r.graph.m()}, r.params.h, r.params.omega,
                 r.params.kappa, std::int64_t{resolve_charger_modes(r.params.charger_modes, r.graph.n())},
                 r.trace.p_init, r.trace.p_max, r.trace.t_at_max, std::int64_t{r.trace.horizon_warning}});
    t_at_max[r.preset].push_back(r.trace.t_at_max);
  }
  CommandOutput out;
  for (const auto& [preset, ts] : t_at_max) out.summary["t_at_max_relative_spread"][preset] = json_num(relative_spread(ts));
  out.tables.push_back(std::move(traces));
  out.tables.push_back(std::move(summary));
  return out;
}

inline CommandOutput cmd_independence(RunConfig& cfg) {
  const int n = cfg.ints_or("n", {7}).front();
  const auto hs = cfg.doubles_or("h", {0.0, 1.0});
  ChargeParams base = charge_params(cfg);
  base.kappa = cfg.doubles_or("kappa", {1.0}).front();
  base.omega = cfg.doubles_or("omega", {1.0}).front();
  const auto rows = sweep_atlas(n, hs, base, jobs_of(cfg));

  Table t{"independence", {"index", "key", "m", "alpha", "is_star"}, {}};
  for (double h : hs) t.columns.push_back("p_max" + h_suffix(h));
  std::vector<double> alphas;
  for (const auto& r : rows) {
    std::vector<Cell> row{std::int64_t{r.rec.index}, r.rec.key.hex(), std::int64_t{r.rec.m}, std::int64_t{r.alpha},
                          std::int64_t{r.is_star}};
    for (const auto& p : r.power) row.emplace_back(p.p_max);
    t.add(std::move(row));
    alphas.push_back(r.alpha);
  }
  CommandOutput out;
  const int alpha_max = static_cast<int>(*std::max_element(alphas.begin(), alphas.end()));
  for (std::size_t hi = 0; hi < hs.size(); ++hi) {
    std::vector<double> p;
    for (const auto& r : rows) p.push_back(r.power[hi].p_max);
    auto& e = out.summary["h" + fmt_num(hs[hi])];
    e["pearson"] = pearson(alphas, p);
    e["spearman"] = spearman(alphas, p);
    const auto best = rank_by_p_max(rows, hi)[0];
    e["best_is_star"] = rows[best].is_star;
    e["best_alpha"] = rows[best].alpha;
  }
  out.summary["alpha_max"] = alpha_max;
  out.tables.push_back(std::move(t));
  return out;
}

inline CommandOutput cmd_conjecture(RunConfig& cfg) {
  const auto ns = cfg.ints_or("n", {2, 3, 4, 5, 6, 7});
  const auto spot_samples = static_cast<int>(cfg.int_or("spot-samples", 100));
  const auto spot_n = static_cast<int>(cfg.int_or("spot-n", 30));
  const auto spot_model = cfg.string_or("spot-model", "ba:2");
  const auto seed = cfg.u64_or("seed", 0);
  const bool check = cfg.bool_or("check", false);
  const auto res = conjecture_sweep(ns, spot_model, spot_n, spot_samples, seed, jobs_of(cfg));

  Table levels{"conjecture_levels", {"n", "graphs", "max_excess", "violations"}, {}};
  for (const auto& l : res.levels)
    levels.add({std::int64_t{l.n}, as_int(l.graphs), l.max_excess, std::int64_t{l.violations}});
  Table cases{"conjecture_cases", {"kind", "n", "hex", "degseq", "w_min", "excess", "is_star"}, {}};
  for (const auto* list : {&res.equality_cases, &res.violations})
    for (const auto& c : *list)
      cases.add({list == &res.violations ? "violation" : "equality", std::int64_t{c.n}, c.hex, degseq_text(c.degseq),
                 c.w_min, c.excess, std::int64_t{c.is_star}});

  CommandOutput out;
  out.summary["violations"] = res.total_violations();
  out.summary["equality_cases"] = res.equality_cases.size();
  double max_excess = -std::numeric_limits<double>::infinity();
  for (const auto& l : res.levels) max_excess = std::max(max_excess, l.max_excess);
  out.summary["max_excess"] = json_num(max_excess);
  if (res.spot_samples > 0) {
    out.summary["spot"]["model"] = res.spot_model;
    out.summary["spot"]["n"] = res.spot_n;
    out.summary["spot"]["samples"] = res.spot_samples;
    out.summary["spot"]["max_excess"] = json_num(res.spot_max_excess);
    out.summary["spot"]["violations"] = res.spot_violations;
  }
  out.check_failed = check && res.total_violations() > 0;
  out.tables.push_back(std::move(levels));
  out.tables.push_back(std::move(cases));
  return out;
}

using CommandFn = CommandOutput (*)(RunConfig&);

inline const std::vector<std::pair<std::string, CommandFn>>& commands() {
  static const std::vector<std::pair<std::string, CommandFn>> table = {
      {"enumerate", cmd_enumerate},     {"sweep-atlas", cmd_sweep_atlas}, {"bench-ratios", cmd_bench_ratios},
      {"scaling", cmd_scaling},         {"correlate", cmd_correlate},     {"dynamics", cmd_dynamics},
      {"independence", cmd_independence}, {"conjecture", cmd_conjecture},
  };
  return table;
}

/// Metadata sidecar written next to every table.
inline nlohmann::ordered_json run_metadata(const std::string& subcommand, const RunConfig& cfg, const Table& t,
                                           const CommandOutput& out) {
  nlohmann::ordered_json meta;
  meta["schema_version"] = kMetadataSchemaVersion;
  meta["software"] = "qbgraph";
  meta["version"] = kVersion;
  meta["subcommand"] = subcommand;
  meta["table"] = t.name;
  meta["columns"] = t.columns;
  meta["rows"] = t.rows.size();
  meta["refine_tolerance"] = kRefineTol;
  meta["config"] = cfg.values();
  meta["summary"] = out.summary;
  return meta;
}

/// Runs a subcommand and writes its tables plus sidecars into cfg["out"].
/// Returns the command output so callers can decide on the exit status.
inline CommandOutput run_command(const std::string& subcommand, RunConfig& cfg) {
  const auto& cmds = commands();
  const auto it = std::find_if(cmds.begin(), cmds.end(), [&](const auto& c) { return c.first == subcommand; });
  if (it == cmds.end()) throw InputError("unknown subcommand '" + subcommand + "'");
  const std::string dir = cfg.string_or("out", "out");
  const std::string format = cfg.string_or("format", "csv");
  if (format != "csv" && format != "json") throw InputError("format must be csv or json");
  auto out = it->second(cfg);
  for (const auto& t : out.tables) {
    write_table(dir, t, format);
    std::ofstream meta(std::filesystem::path(dir) / (t.name + ".meta.json"), std::ios::binary);
    meta << run_metadata(subcommand, cfg, t, out).dump(2) << "\n";
  }
  return out;
}

}  // namespace qbg
