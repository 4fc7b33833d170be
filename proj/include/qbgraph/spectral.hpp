#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qbgraph/errors.hpp"
#include "qbgraph/graph.hpp"

namespace qbg {

/// Relative degeneracy tolerance: eigenvalues closer than
/// kDegeneracyRelTol * max(1, spectral radius) share a cluster.
inline constexpr double kDegeneracyRelTol = 1e-9;

/// Mode energies below -kZeroEnergy count as occupied / active.
inline constexpr double kZeroEnergy = 1e-12;

/// A run of (numerically) equal eigenvalues [begin, end) in descending order.
/// `overlap` is ||P 1||^2 for the cluster's eigenprojection P, which does not
/// depend on the basis chosen inside the eigenspace.
struct Cluster {
  int begin = 0;
  int end = 0;
  double value = 0.0;
  double overlap = 0.0;

  int size() const noexcept { return end - begin; }
};

struct SpectralData {
  int n = 0;
  int m = 0;
  Eigen::VectorXd eps;      // eigenvalues of A, descending
  Eigen::MatrixXd vecs;     // orthonormal eigenvectors, column k <-> eps[k]
  Eigen::VectorXd weights;  // w_k = (1^T u_k)^2
  std::vector<Cluster> clusters;
  double tol = 0.0;

  /// N/M, the prefactor of the hopping term.
  double scale() const noexcept { return double(n) / m; }
  double eps_max() const { return eps[0]; }
  double eps_min() const { return eps[n - 1]; }
};

inline Eigen::MatrixXd adjacency_matrix(const Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (const auto& [i, j] : g.edges()) a(i, j) = a(j, i) = 1.0;
  return a;
}

namespace detail {

inline std::vector<Cluster> cluster_spectrum(const Eigen::VectorXd& eps, const Eigen::VectorXd& w, double tol) {
  std::vector<Cluster> out;
  const int n = static_cast<int>(eps.size());
  int b = 0;
  while (b < n) {
    int e = b + 1;
    while (e < n && eps[e - 1] - eps[e] <= tol) ++e;
    Cluster c{b, e, eps.segment(b, e - b).mean(), w.segment(b, e - b).sum()};
    out.push_back(c);
    b = e;
  }
  return out;
}

}  // namespace detail

/// Full symmetric eigendecomposition of the adjacency matrix.
inline SpectralData decompose(const Graph& g, double rel_tol = kDegeneracyRelTol) {
  if (g.m() < 1) throw InputError("spectral quantities need at least one edge");
  if (!(rel_tol > 0)) throw InputError("degeneracy tolerance must be positive");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(adjacency_matrix(g));
  if (es.info() != Eigen::Success) throw NumericError("adjacency eigensolver did not converge");

  SpectralData sd;
  sd.n = g.n();
  sd.m = g.m();
  // Eigen returns ascending order
  sd.eps = es.eigenvalues().reverse();
  sd.vecs = es.eigenvectors().rowwise().reverse();
  sd.weights = sd.vecs.colwise().sum().array().square().transpose();
  sd.tol = rel_tol * std::max(1.0, sd.eps.cwiseAbs().maxCoeff());
  sd.clusters = detail::cluster_spectrum(sd.eps, sd.weights, sd.tol);
  return sd;
}

/// Single-particle energies E_k(h) = (N/M) eps_k + h and the active sector.
struct ModeEnergies {
  double h = 0.0;
  std::vector<double> energy;        // per eigen index, cluster-averaged
  std::vector<int> active;           // eigen indices with E_k < -kZeroEnergy
  std::vector<int> active_clusters;  // cluster indices, same criterion
  double e_min = 0.0;                // sum over the active sector (<= 0)
  double e_max = 0.0;                // sum over the rest (>= 0)
  double delta = 0.0;
  double e_bar = 0.0;

  bool empty() const noexcept { return active.empty(); }
  double half_width() const noexcept { return delta / 2; }
};

inline double cluster_energy(const SpectralData& sd, const Cluster& c, double h) {
  return sd.scale() * c.value + h;
}

inline ModeEnergies mode_energies(const SpectralData& sd, double h) {
  if (!(h >= 0)) throw InputError("local field h must be >= 0");
  ModeEnergies me;
  me.h = h;
  me.energy.resize(static_cast<std::size_t>(sd.n));
  for (int c = 0; c < static_cast<int>(sd.clusters.size()); ++c) {
    const auto& cl = sd.clusters[c];
    const double e = cluster_energy(sd, cl, h);
    const bool neg = e < -kZeroEnergy;
    if (neg) me.active_clusters.push_back(c);
    for (int k = cl.begin; k < cl.end; ++k) {
      me.energy[k] = e;
      if (neg) {
        me.active.push_back(k);
        me.e_min += e;
      } else {
        me.e_max += e;
      }
    }
  }
  me.delta = me.e_max - me.e_min;
  me.e_bar = (me.e_max + me.e_min) / 2;
  return me;
}

/// A value computed over the negative sector, with a flag when the sector is empty.
struct SectorValue {
  double value = 0.0;
  bool empty = false;
};

/// R_G(h) = (1/E_min) sum_{k in K_-} w_k E_k(h).
inline SectorValue r_of_h(const SpectralData& sd, double h) {
  const auto me = mode_energies(sd, h);
  if (me.empty()) return {0.0, true};
  double num = 0.0;
  for (int c : me.active_clusters) num += sd.clusters[c].overlap * cluster_energy(sd, sd.clusters[c], h);
  return {num / me.e_min, false};
}

/// Early-time slope dP/dt at t = 0+ written through R: L kappa^2 R_G(h), i.e. normalised by 1/|E_min|.
inline double early_power_r(const SpectralData& sd, double h, int charger_modes, double kappa) {
  return charger_modes * kappa * kappa * r_of_h(sd, h).value;
}

/// Early-time slope with the battery normalisation 1/(Delta/2) in place of
/// 1/|E_min|. Identical to early_power_r at h = 0.
inline double early_power_exact(const SpectralData& sd, double h, int charger_modes, double kappa) {
  const auto me = mode_energies(sd, h);
  if (me.empty()) return 0.0;
  double num = 0.0;
  for (int c : me.active_clusters)
    num += sd.clusters[c].overlap * std::abs(cluster_energy(sd, sd.clusters[c], h));
  return charger_modes * kappa * kappa * num / me.half_width();
}

/// Aggregated overlap of the lowest eigenvalue cluster.
inline double w_min(const SpectralData& sd) { return sd.clusters.back().overlap; }

/// Largest aggregated overlap among active clusters at field h.
inline SectorValue w_minus(const SpectralData& sd, double h = 0.0) {
  const auto me = mode_energies(sd, h);
  if (me.empty()) return {0.0, true};
  double best = 0.0;
  for (int c : me.active_clusters) best = std::max(best, sd.clusters[c].overlap);
  return {best, false};
}

/// Star overlap (sqrt(N-1) - 1)^2 / 2 = N/2 - sqrt(N-1).
inline double star_benchmark(int n) {
  if (n < 2) throw InputError("star_benchmark requires n >= 2");
  const double r = std::sqrt(double(n - 1)) - 1.0;
  return r * r / 2;
}

inline double ratio_metric(const SpectralData& sd) {
  if (sd.n < 3) throw InputError("ratio_metric requires n >= 3 (star benchmark vanishes at n = 2)");
  return w_minus(sd, 0.0).value / star_benchmark(sd.n);
}

// ---------------------------------------------------------------------------
// Inequalities. Each returns both sides; the claim is lhs <= rhs.

struct BoundPair {
  double lhs = 0.0;
  double rhs = 0.0;

  bool holds(double tol) const noexcept { return lhs <= rhs + tol; }
};

/// Sum of eigenvalues outside the h = 0 negative sector.
inline double eps_plus(const SpectralData& sd) {
  const auto me = mode_energies(sd, 0.0);
  return me.e_max / sd.scale();
}

/// sum_{K_-} w_k |eps_k| / eps_+  <=  ||d|| sqrt(N) / (2 sqrt(M)) - sqrt(M).
inline BoundPair bound_negative_sector(const Graph& g, const SpectralData& sd) {
  const auto me = mode_energies(sd, 0.0);
  double neg = 0.0;
  for (int c : me.active_clusters) neg += sd.clusters[c].overlap * std::abs(sd.clusters[c].value);
  const double m = g.m();
  const double dnorm = degree_stats(g).norm2;
  return {neg / eps_plus(sd), dnorm * std::sqrt(double(g.n())) / (2 * std::sqrt(m)) - std::sqrt(m)};
}

/// w_-(h) <= sum_i (d_i - dbar)^2 / dbar^2.
inline BoundPair bound_degree_variance(const Graph& g, const SpectralData& sd, double h = 0.0) {
  if (g.m() == 0) throw InputError("degree-variance bound needs at least one edge");
  const double rms = degree_stats(g).rms;
  return {w_minus(sd, h).value, g.n() * rms * rms};
}

/// For every cluster below the top one:
/// W(eps) <= N (eps_max - 2M/N) / (eps_max - eps).
inline std::vector<BoundPair> bound_overlap_growth(const Graph& g, const SpectralData& sd) {
  std::vector<BoundPair> out;
  const double top = sd.clusters.front().value;
  const double excess = top - 2.0 * g.m() / g.n();
  for (std::size_t c = 1; c < sd.clusters.size(); ++c) {
    const auto& cl = sd.clusters[c];
    out.push_back({cl.overlap, g.n() * excess / (top - cl.value)});
  }
  return out;
}

struct EpsPlusFloor {
  double eps_plus = 0.0;
  double sqrt_m = 0.0;
};

/// eps_+ >= sqrt(M).
inline EpsPlusFloor eps_plus_floor(const Graph& g, const SpectralData& sd) {
  return {eps_plus(sd), std::sqrt(double(g.m()))};
}

struct KpqNegativeMode {
  double eigenvalue = 0.0;
  double overlap = 0.0;
  Eigen::VectorXd vector;  // unit, +1/sqrt(2p) on U and -1/sqrt(2q) on V
};

/// Closed-form negative eigenpair of K_{p,q} in complete_bipartite labeling.
inline KpqNegativeMode kpq_closed_form(int p, int q) {
  if (p < 1 || q < 1) throw InputError("kpq_closed_form requires p, q >= 1");
  KpqNegativeMode out;
  out.eigenvalue = -std::sqrt(double(p) * q);
  const double d = std::sqrt(double(p)) - std::sqrt(double(q));
  out.overlap = d * d / 2;
  out.vector.resize(p + q);
  out.vector.head(p).setConstant(1.0 / std::sqrt(2.0 * p));
  out.vector.tail(q).setConstant(-1.0 / std::sqrt(2.0 * q));
  return out;
}

/// u^T A u split by the sign pattern of u (zero entries count as positive).
struct SignSplit {
  double within_plus = 0.0;   // 2 sum over edges inside S+ of u_i u_j
  double within_minus = 0.0;  // 2 sum over edges inside S- of u_i u_j
  double cross = 0.0;         // 2 sum over cut edges of |u_i||u_j|

  double total() const noexcept { return within_plus + within_minus - cross; }
};

inline SignSplit sign_split(const Eigen::VectorXd& u, const Graph& g) {
  if (u.size() != g.n()) throw InputError("sign_split: vector length must equal n");
  SignSplit s;
  for (const auto& [i, j] : g.edges()) {
    const bool pi = u[i] >= 0, pj = u[j] >= 0;
    if (pi && pj)
      s.within_plus += 2 * u[i] * u[j];
    else if (!pi && !pj)
      s.within_minus += 2 * u[i] * u[j];
    else
      s.cross += 2 * std::abs(u[i]) * std::abs(u[j]);
  }
  return s;
}

/// h-window on which the active set is fixed, where
/// R_G(h) = (A0 + h S0) / (C0 + h K0).
struct LinFracWindow {
  double h_lo = 0.0;
  double h_hi = 0.0;
  double A0 = 0.0;
  double S0 = 0.0;
  double C0 = 0.0;
  double K0 = 0.0;
  int slope_sign = 0;
  std::vector<int> active_clusters;

  double denominator(double h) const noexcept { return C0 + h * K0; }
  double value(double h) const noexcept { return (A0 + h * S0) / denominator(h); }
  double slope(double h) const noexcept {
    const double d = denominator(h);
    return (S0 * C0 - A0 * K0) / (d * d);
  }
  double curvature(double h) const noexcept {
    const double d = denominator(h);
    return -2 * K0 * (S0 * C0 - A0 * K0) / (d * d * d);
  }
};

/// Windows between consecutive knots h = -(N/M) eps_c in [0, h_max), only
/// where the active set is nonempty.
inline std::vector<LinFracWindow> linfrac_profile(const SpectralData& sd, double h_max) {
  if (!(h_max > 0)) throw InputError("linfrac_profile requires h_max > 0");
  const auto me0 = mode_energies(sd, 0.0);
  std::vector<double> knots;
  for (int c : me0.active_clusters) knots.push_back(-sd.scale() * sd.clusters[c].value);
  std::sort(knots.begin(), knots.end());

  std::vector<LinFracWindow> out;
  double lo = 0.0;
  for (double knot : knots) {
    if (lo >= h_max) break;
    if (knot <= lo) continue;
    LinFracWindow w;
    w.h_lo = lo;
    w.h_hi = std::min(knot, h_max);
    for (int c : me0.active_clusters) {
      if (-sd.scale() * sd.clusters[c].value <= lo) continue;
      const auto& cl = sd.clusters[c];
      const double e = sd.scale() * cl.value;
      w.active_clusters.push_back(c);
      w.A0 += cl.overlap * e;
      w.S0 += cl.overlap;
      w.C0 += cl.size() * e;
      w.K0 += cl.size();
    }
    const double num = w.S0 * w.C0 - w.A0 * w.K0;
    const double mag = std::abs(w.S0 * w.C0) + std::abs(w.A0 * w.K0);
    w.slope_sign = std::abs(num) <= 1e-12 * mag ? 0 : (num > 0 ? 1 : -1);
    out.push_back(std::move(w));
    lo = knot;
  }
  return out;
}

/// p_k(h) = E_k / sum_{j in K_-} E_j for each active eigen index, in the
/// order of me.active.
inline std::vector<double> convex_weights(const ModeEnergies& me) {
  if (me.empty()) throw InputError("convex_weights: negative sector is empty");
  std::vector<double> p;
  p.reserve(me.active.size());
  for (int k : me.active) p.push_back(me.energy[k] / me.e_min);
  return p;
}

}  // namespace qbg
