#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

#include "qbgraph/errors.hpp"
#include "qbgraph/graph.hpp"
#include "qbgraph/spectral.hpp"

namespace qbg {

/// Battery graph, local field, charger coupling and charger mode energies.
/// The number of charger modes L is omegas.size().
struct BatteryModel {
  Graph graph;
  double h = 0.0;
  double kappa = 1.0;
  std::vector<double> omegas{1.0};

  int charger_modes() const noexcept { return static_cast<int>(omegas.size()); }

  void validate() const {
    if (graph.m() < 1) throw InputError("battery model needs a graph with at least one edge");
    if (!(h >= 0)) throw InputError("local field h must be >= 0");
    if (omegas.empty()) throw InputError("at least one charger mode is required");
    for (double w : omegas)
      if (!(w > 0)) throw InputError("charger energies must be positive");
    if (!std::isfinite(kappa)) throw InputError("coupling must be finite");
  }
};

/// L identical charger modes of energy omega.
inline BatteryModel make_model(Graph g, double h, double kappa, double omega, int charger_modes = 1) {
  if (charger_modes < 1) throw InputError("charger mode count must be >= 1");
  return BatteryModel{std::move(g), h, kappa, std::vector<double>(static_cast<std::size_t>(charger_modes), omega)};
}

/// One-particle generator on battery sites 0..N-1 followed by charger modes.
///
///   battery block  (h I + (N/M) A) / (Delta/2)
///   charger block  diag(omega_i)
///   coupling       kappa on every battery-charger pair
///
/// The constant -E_bar/(Delta/2) of the normalised battery Hamiltonian is
/// kept in `offset` and only enters absolute battery energies.
struct SingleParticleHamiltonian {
  int n = 0;
  int charger_modes = 0;
  Eigen::MatrixXd matrix;
  SpectralData spectrum;
  ModeEnergies modes;
  double half_width = 0.0;
  double offset = 0.0;

  int dim() const noexcept { return n + charger_modes; }
  Eigen::MatrixXd battery_block() const { return matrix.topLeftCorner(n, n); }
};

inline SingleParticleHamiltonian build_hamiltonian(const BatteryModel& model) {
  model.validate();
  SingleParticleHamiltonian sph;
  sph.n = model.graph.n();
  sph.charger_modes = model.charger_modes();
  sph.spectrum = decompose(model.graph);
  sph.modes = mode_energies(sph.spectrum, model.h);
  sph.half_width = sph.modes.half_width();
  if (!(sph.half_width > 0)) throw NumericError("battery spectrum has zero width; cannot normalise");
  sph.offset = -sph.modes.e_bar / sph.half_width;

  const int n = sph.n, l = sph.charger_modes;
  sph.matrix = Eigen::MatrixXd::Zero(n + l, n + l);
  sph.matrix.topLeftCorner(n, n) =
      (model.h * Eigen::MatrixXd::Identity(n, n) + sph.spectrum.scale() * adjacency_matrix(model.graph)) /
      sph.half_width;
  for (int i = 0; i < l; ++i) sph.matrix(n + i, n + i) = model.omegas[i];
  sph.matrix.topRightCorner(n, l).setConstant(model.kappa);
  sph.matrix.bottomLeftCorner(l, n).setConstant(model.kappa);
  return sph;
}

/// One-particle correlation matrix of a Gaussian state. The index convention
/// is the one for which C(t) = U C(0) U^dagger with U = exp(-i h t); battery
/// sites first, then charger modes.
struct CorrelationState {
  Eigen::MatrixXcd c;
  double t = 0.0;
};

/// Battery ground state (strictly negative modes filled, zero modes empty)
/// times the charger vacuum.
inline CorrelationState initial_state(const SingleParticleHamiltonian& sph) {
  CorrelationState s;
  s.c = Eigen::MatrixXcd::Zero(sph.dim(), sph.dim());
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(sph.n, sph.n);
  for (int k : sph.modes.active) proj += sph.spectrum.vecs.col(k) * sph.spectrum.vecs.col(k).transpose();
  s.c.topLeftCorner(sph.n, sph.n) = proj.cast<std::complex<double>>();
  return s;
}

/// Diagonalises the generator once; evolution to any time is then exact to
/// eigensolver precision.
class Propagator {
 public:
  explicit Propagator(const SingleParticleHamiltonian& sph) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sph.matrix);
    if (es.info() != Eigen::Success) throw NumericError("single-particle eigensolver did not converge");
    lambda_ = es.eigenvalues();
    vecs_ = es.eigenvectors();
  }

  const Eigen::VectorXd& eigenvalues() const noexcept { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return vecs_; }

  Eigen::MatrixXcd unitary(double t) const {
    const Eigen::VectorXcd phase = (std::complex<double>(0, -t) * lambda_.cast<std::complex<double>>()).array().exp();
    return vecs_.cast<std::complex<double>>() * phase.asDiagonal() * vecs_.transpose().cast<std::complex<double>>();
  }

  /// Evolves by dt (negative dt runs backwards).
  CorrelationState evolve(const CorrelationState& s, double dt) const {
    const Eigen::MatrixXcd u = unitary(dt);
    return CorrelationState{u * s.c * u.adjoint(), s.t + dt};
  }

 private:
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd vecs_;
};

inline CorrelationState evolve(const CorrelationState& s, const SingleParticleHamiltonian& sph, double dt) {
  return Propagator(sph).evolve(s, dt);
}

/// Tr[H_B rho_B] in normalised units, offset included.
inline double battery_energy(const CorrelationState& s, const SingleParticleHamiltonian& sph) {
  const Eigen::MatrixXcd hb = sph.battery_block().cast<std::complex<double>>();
  return (hb.cwiseProduct(s.c.topLeftCorner(sph.n, sph.n).transpose())).sum().real() + sph.offset;
}

/// Tr[h C], conserved by the evolution.
inline double total_energy(const CorrelationState& s, const SingleParticleHamiltonian& sph) {
  return (sph.matrix.cast<std::complex<double>>().cwiseProduct(s.c.transpose())).sum().real();
}

/// Work W(t) = E_B(t) - E_B(0) from the initial state, in the eigenbasis of
/// the generator: W(t) = -4 sum_{a<b} M_ab sin^2((l_a - l_b) t / 2) with
/// M = (V^T H_B V) .* (V^T C0 V). Both factors are real symmetric.
class WorkEvaluator {
 public:
  explicit WorkEvaluator(const SingleParticleHamiltonian& sph) : prop_(sph) {
    const auto& v = prop_.eigenvectors();
    Eigen::MatrixXd hb = Eigen::MatrixXd::Zero(sph.dim(), sph.dim());
    hb.topLeftCorner(sph.n, sph.n) = sph.battery_block();
    const Eigen::MatrixXd c0 = initial_state(sph).c.real();
    m_ = (v.transpose() * hb * v).cwiseProduct(v.transpose() * c0 * v);
    e0_ = m_.sum();
  }

  const Propagator& propagator() const noexcept { return prop_; }

  /// Accurate at small t (no cancellation).
  double work(double t) const {
    const auto& lam = prop_.eigenvalues();
    const int d = static_cast<int>(lam.size());
    double w = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        const double s = std::sin((lam[a] - lam[b]) * t / 2);
        w += m_(a, b) * s * s;
      }
    return -4 * w;
  }

  /// Fast form for long grids: E(t) = c^T M c + s^T M s with c_a = cos(l_a t).
  double work_fast(double t) const {
    const auto& lam = prop_.eigenvalues();
    const Eigen::VectorXd arg = lam * t;
    const Eigen::VectorXd c = arg.array().cos();
    const Eigen::VectorXd s = arg.array().sin();
    return c.dot(m_ * c) + s.dot(m_ * s) - e0_;
  }

 private:
  Propagator prop_;
  Eigen::MatrixXd m_;
  double e0_ = 0.0;
};

struct ChargeTrace {
  std::vector<double> times;  // i * dt, i = 0..steps
  std::vector<double> work;
  std::vector<double> power;  // W/t, 0 at t = 0
  double p_init = 0.0;
  double p_max = 0.0;
  double t_at_max = 0.0;
  bool horizon_warning = false;  // argmax within 1% of t_max
};

inline constexpr double kDefaultDt = 0.01;
inline constexpr double kDefaultTMax = 50.0;
inline constexpr double kRefineTol = 1e-6;

namespace detail {

// Golden-section search for the maximum of f on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace detail

/// P(t) on the grid t = dt, 2 dt, ..., t_max, then golden-section refinement
/// of the grid maximum inside its neighbouring grid points.
inline ChargeTrace charge_trace(const BatteryModel& model, double t_max = kDefaultTMax, double dt = kDefaultDt,
                                bool keep_samples = true) {
  if (!(dt > 0) || !(t_max > dt)) throw InputError("charge_trace requires t_max > dt > 0");
  const auto sph = build_hamiltonian(model);
  const WorkEvaluator we(sph);
  const long steps = static_cast<long>(std::floor(t_max / dt + 1e-9));

  ChargeTrace tr;
  if (keep_samples) {
    tr.times.reserve(steps + 1);
    tr.work.reserve(steps + 1);
    tr.power.reserve(steps + 1);
    tr.times.push_back(0.0);
    tr.work.push_back(0.0);
    tr.power.push_back(0.0);
  }
  tr.p_init = we.work(dt) / dt;
  long best_i = 1;
  double best_p = tr.p_init;
  for (long i = 1; i <= steps; ++i) {
    const double t = i * dt;
    const double w = i == 1 ? tr.p_init * dt : we.work_fast(t);
    const double p = w / t;
    if (p > best_p) {
      best_p = p;
      best_i = i;
    }
    if (keep_samples) {
      tr.times.push_back(t);
      tr.work.push_back(w);
      tr.power.push_back(p);
    }
  }

  const double lo = best_i > 1 ? (best_i - 1) * dt : dt / 2;
  const double hi = std::min(static_cast<double>(best_i + 1) * dt, t_max);
  const auto [t_ref, p_ref] = detail::golden_max([&](double t) { return we.work(t) / t; }, lo, hi, kRefineTol);
  const double p_grid = we.work(best_i * dt) / (best_i * dt);
  if (p_ref > p_grid) {
    tr.p_max = p_ref;
    tr.t_at_max = t_ref;
  } else {
    tr.p_max = p_grid;
    tr.t_at_max = best_i * dt;
  }
  tr.horizon_warning = tr.t_at_max >= 0.99 * t_max;
  return tr;
}

/// W(dt)/dt.
inline double p_init(const BatteryModel& model, double dt = kDefaultDt) {
  if (!(dt > 0)) throw InputError("p_init requires dt > 0");
  const WorkEvaluator we(build_hamiltonian(model));
  return we.work(dt) / dt;
}

}  // namespace qbg
