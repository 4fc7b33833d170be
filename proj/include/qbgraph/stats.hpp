#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "qbgraph/errors.hpp"

namespace qbg {

/// Sample Pearson correlation. Throws on length mismatch, fewer than two
/// points or zero variance in either input.
inline double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: length mismatch");
  if (xs.size() < 2) throw InputError("pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw NumericError("pearson: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Average ranks (1-based), ties share the mean rank.
inline std::vector<double> ranks(const std::vector<double>& xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + j) / 2) + 1;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  return pearson(ranks(xs), ranks(ys));
}

struct FitResult {
  double eta = 0.0;
  double prefactor = 0.0;
  double eta_stderr = std::numeric_limits<double>::quiet_NaN();
  double rss = 0.0;
  double n_min = 0.0;
  double n_max = 0.0;
  std::size_t points = 0;
};

/// Least squares of ln y = ln a + eta ln x. The standard error needs at
/// least three points and is NaN with two.
inline FitResult fit_power_law(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) throw InputError("fit_power_law: need at least two points");
  std::vector<double> lx, ly;
  for (auto [x, y] : pts) {
    if (!(x > 0 && y > 0)) throw InputError("fit_power_law: coordinates must be positive");
    lx.push_back(std::log(x));
    ly.push_back(std::log(y));
  }
  const double n = static_cast<double>(pts.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0) throw NumericError("fit_power_law: all x values coincide");
  FitResult f;
  f.eta = sxy / sxx;
  const double intercept = my - f.eta * mx;
  f.prefactor = std::exp(intercept);
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (intercept + f.eta * lx[i]);
    f.rss += r * r;
  }
  if (pts.size() > 2) f.eta_stderr = std::sqrt(f.rss / (n - 2) / sxx);
  f.points = pts.size();
  f.n_min = std::min_element(pts.begin(), pts.end())->first;
  f.n_max = std::max_element(pts.begin(), pts.end())->first;
  return f;
}

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
  double max = 0.0;
  std::size_t count = 0;
};

inline Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  s.max = *std::max_element(xs.begin(), xs.end());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace qbg
