#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qbgraph/dynamics.hpp"
#include "qbgraph/enumerate.hpp"

using namespace qbg;

namespace {

Graph random_connected(std::mt19937_64& gen, int lo, int hi) {
  for (;;) {
    const int n = lo + static_cast<int>(gen() % (hi - lo + 1));
    Graph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (gen() % 2) g.add_edge(i, j);
    if (is_connected(g)) return g;
  }
}

BatteryModel random_model(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BatteryModel m;
  m.graph = random_connected(gen, 3, 7);
  m.h = gen() % 2 ? 0.0 : 1.5 * u(gen);
  m.kappa = 0.1 + 2 * u(gen);
  m.omegas.assign(1 + gen() % 3, 0.0);
  for (double& w : m.omegas) w = 0.1 + 4 * u(gen);
  return m;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(BuildHamiltonian, SingleEdge) {
  const auto sph = build_hamiltonian(make_model(complete(2), 0.0, 1.0, 1.0));
  Eigen::Matrix3d expect;
  expect << 0, 1, 1, 1, 0, 1, 1, 1, 1;
  EXPECT_LT((sph.matrix - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_DOUBLE_EQ(sph.half_width, 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sph.battery_block());
  EXPECT_NEAR(es.eigenvalues()[0], -1.0, 1e-15);
  EXPECT_NEAR(es.eigenvalues()[1], 1.0, 1e-15);
}

TEST(BuildHamiltonian, ZeroCouplingIsBlockDiagonal) {
  const auto sph = build_hamiltonian(make_model(star(5), 0.3, 0.0, 2.0, 3));
  EXPECT_EQ(sph.dim(), 8);
  EXPECT_EQ(sph.matrix.topRightCorner(5, 3).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sph.matrix.bottomLeftCorner(3, 5).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sph.matrix(6, 6), 2.0);
}

TEST(BuildHamiltonian, NormalisedBatterySpectrum) {
  const auto sph = build_hamiltonian(make_model(star(7), 0.0, 1.0, 1.0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sph.battery_block());
  EXPECT_NEAR(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0, 1e-14);
  std::mt19937_64 gen(3);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_model(gen);
    const auto s = build_hamiltonian(m);
    EXPECT_LT((s.matrix - s.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s.battery_block()).eigenvalues();
    for (int k = 0; k < ev.size(); ++k) {
      EXPECT_GE(ev[k] + s.offset, -1 - 1e-12);
      EXPECT_LE(ev[k] + s.offset, 1 + 1e-12);
    }
  }
}

TEST(BuildHamiltonian, Errors) {
  EXPECT_THROW(build_hamiltonian(make_model(Graph(3), 0.0, 1.0, 1.0)), InputError);
  EXPECT_THROW(build_hamiltonian(make_model(star(3), -1.0, 1.0, 1.0)), InputError);
  EXPECT_THROW(build_hamiltonian(make_model(star(3), 0.0, 1.0, 0.0)), InputError);
  EXPECT_THROW(make_model(star(3), 0.0, 1.0, 1.0, 0), InputError);
}

TEST(InitialState, TriangleFillsTwoModes) {
  const auto sph = build_hamiltonian(make_model(complete(3), 0.0, 1.0, 1.0));
  const auto s = initial_state(sph);
  EXPECT_NEAR(s.c.trace().real(), 2.0, 1e-12);
  EXPECT_LT(max_abs(s.c * s.c - s.c), 1e-12);
  EXPECT_NEAR(battery_energy(s, sph), -1.0, 1e-12);
}

TEST(InitialState, LargeFieldIsEmpty) {
  const auto sph = build_hamiltonian(make_model(star(5), 50.0, 1.0, 1.0));
  const auto s = initial_state(sph);
  EXPECT_EQ(max_abs(s.c), 0.0);
  EXPECT_NEAR(battery_energy(s, sph), -1.0, 1e-12);
}

TEST(BatteryEnergy, GroundAndMirror) {
  for (const Graph& g : {star(6), path(5), pineapple(6, 3), complete_bipartite(2, 4)}) {
    for (double h : {0.0, 0.4}) {
      const auto sph = build_hamiltonian(make_model(g, h, 1.0, 1.0));
      EXPECT_NEAR(battery_energy(initial_state(sph), sph), -1.0, 1e-12);
      // fill every non-negative mode instead
      CorrelationState top;
      top.c = Eigen::MatrixXcd::Zero(sph.dim(), sph.dim());
      for (int k = 0; k < g.n(); ++k)
        if (sph.modes.energy[k] > kZeroEnergy)
          top.c.topLeftCorner(g.n(), g.n()) +=
              (sph.spectrum.vecs.col(k) * sph.spectrum.vecs.col(k).transpose()).cast<std::complex<double>>();
      EXPECT_NEAR(battery_energy(top, sph), 1.0, 1e-12);
    }
  }
}

TEST(Evolve, ZeroTimeIsIdentity) {
  const auto sph = build_hamiltonian(make_model(path(5), 0.0, 1.0, 1.0));
  const auto s = initial_state(sph);
  EXPECT_LT(max_abs(evolve(s, sph, 0.0).c - s.c), 1e-14);
}

TEST(Evolve, ZeroCouplingFreezesBattery) {
  const auto sph = build_hamiltonian(make_model(pineapple(6, 4), 0.2, 0.0, 1.0));
  const auto s0 = initial_state(sph);
  const Propagator prop(sph);
  for (double t : {0.5, 3.0, 50.0}) EXPECT_LT(max_abs(prop.evolve(s0, t).c - s0.c), 1e-10) << t;
}

TEST(Evolve, InvariantsOnRandomModels) {
  std::mt19937_64 gen(41);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_model(gen);
    const auto sph = build_hamiltonian(m);
    const Propagator prop(sph);
    const auto s0 = initial_state(sph);
    const double n0 = static_cast<double>(sph.modes.active.size());
    const double e0 = total_energy(s0, sph);
    for (double t : {0.0, 1.0, 10.0, 50.0}) {
      const auto s = prop.evolve(s0, t);
      EXPECT_LT(max_abs(s.c - s.c.adjoint()), 1e-12);
      EXPECT_LT(max_abs(s.c * s.c - s.c), 1e-9);
      EXPECT_NEAR(s.c.trace().real(), n0, 1e-9);
      EXPECT_NEAR(total_energy(s, sph), e0, 1e-8);
      const double eb = battery_energy(s, sph);
      EXPECT_GE(eb, -1 - 1e-9);
      EXPECT_LE(eb, 1 + 1e-9);
      EXPECT_LT(max_abs(prop.evolve(s, -t).c - s0.c), 1e-9);
    }
  }
}

TEST(Evolve, MatchesFockSpaceSimulation) {
  std::mt19937_64 gen(43);
  for (int i = 0; i < 6; ++i) {
    BatteryModel m;
    m.graph = random_connected(gen, 3, 6);
    m.h = i % 2 ? 0.5 : 0.0;
    m.kappa = 0.7;
    m.omegas = i < 3 ? std::vector<double>{1.0} : std::vector<double>{0.5, 2.0};
    const auto sph = build_hamiltonian(m);
    const int d = sph.dim();

    const oracle::FockSystem fock(d);
    const Eigen::MatrixXd h_many = fock.quadratic(sph.matrix);
    Eigen::MatrixXd hb = Eigen::MatrixXd::Zero(d, d);
    hb.topLeftCorner(sph.n, sph.n) = sph.battery_block();
    const Eigen::MatrixXd hb_many = fock.quadratic(hb);
    Eigen::MatrixXd orbitals = Eigen::MatrixXd::Zero(d, static_cast<Eigen::Index>(sph.modes.active.size()));
    for (std::size_t k = 0; k < sph.modes.active.size(); ++k)
      orbitals.col(k).head(sph.n) = sph.spectrum.vecs.col(sph.modes.active[k]);
    const Eigen::VectorXcd psi0 = fock.slater(orbitals);

    const Propagator prop(sph);
    const WorkEvaluator we(sph);
    const double eb0 = oracle::expectation(hb_many, psi0).real();
    for (double t : {0.0, 0.3, 2.0, 7.5}) {
      const Eigen::VectorXcd psi = oracle::evolve(h_many, psi0, t);
      const auto s = prop.evolve(initial_state(sph), t);
      // library C_ab corresponds to <c_b^dagger c_a>
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) ASSERT_LT(std::abs(s.c(a, b) - fock.correlator(psi, b, a)), 1e-9);
      const double eb = oracle::expectation(hb_many, psi).real();
      EXPECT_NEAR(battery_energy(s, sph), eb + sph.offset, 1e-9);
      EXPECT_NEAR(we.work(t), eb - eb0, 1e-9);
    }
  }
}

TEST(Work, FormsAgreeWithStatePropagation) {
  std::mt19937_64 gen(47);
  for (int i = 0; i < 10; ++i) {
    const auto m = random_model(gen);
    const auto sph = build_hamiltonian(m);
    const WorkEvaluator we(sph);
    const auto s0 = initial_state(sph);
    const double e0 = battery_energy(s0, sph);
    for (double t : {0.01, 0.7, 13.0, 49.9}) {
      const double direct = battery_energy(we.propagator().evolve(s0, t), sph) - e0;
      EXPECT_NEAR(we.work(t), direct, 1e-10);
      EXPECT_NEAR(we.work_fast(t), direct, 1e-10);
    }
    EXPECT_EQ(we.work(0.0), 0.0);
  }
}

TEST(ChargeTrace, GridAndBounds) {
  std::mt19937_64 gen(53);
  for (int i = 0; i < 20; ++i) {
    const auto m = random_model(gen);
    const auto tr = charge_trace(m, 20.0, 0.05);
    ASSERT_EQ(tr.times.size(), 401U);
    EXPECT_EQ(tr.work.front(), 0.0);
    double grid_max = 0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      EXPECT_NEAR(tr.times[k], 0.05 * k, 1e-12);
      EXPECT_GE(tr.work[k], -1e-9);
      EXPECT_LE(tr.work[k], 2 + 1e-9);
      EXPECT_TRUE(std::isfinite(tr.power[k]));
      grid_max = std::max(grid_max, tr.power[k]);
    }
    EXPECT_GE(tr.p_max, grid_max - 1e-15);
    EXPECT_GT(tr.t_at_max, 0.0);
    EXPECT_LE(tr.t_at_max, 20.0);
    EXPECT_NEAR(tr.p_init, tr.power[1], 1e-15);
    EXPECT_EQ(tr.horizon_warning, tr.t_at_max >= 0.99 * 20.0);
  }
}

TEST(ChargeTrace, RefinementFindsLocalMaximum) {
  const auto m = make_model(star(5), 0.0, 1.0, 1.0);
  const auto tr = charge_trace(m, 50.0, 0.1, false);
  EXPECT_TRUE(tr.times.empty());
  const WorkEvaluator we(build_hamiltonian(m));
  const auto p = [&](double t) { return we.work(t) / t; };
  EXPECT_NEAR(tr.p_max, p(tr.t_at_max), 1e-14);
  EXPECT_GE(tr.p_max, p(tr.t_at_max - 1e-4));
  EXPECT_GE(tr.p_max, p(tr.t_at_max + 1e-4));
  // a finer grid cannot find anything higher
  const auto fine = charge_trace(m, 50.0, 0.001, false);
  EXPECT_NEAR(fine.p_max, tr.p_max, 1e-9);
}

TEST(ChargeTrace, ZeroCouplingGivesNoWork) {
  const auto tr = charge_trace(make_model(star(6), 0.0, 0.0, 1.0), 10.0, 0.01);
  for (double w : tr.work) EXPECT_NEAR(w, 0.0, 1e-12);
  EXPECT_NEAR(tr.p_max, 0.0, 1e-12);
}

TEST(ChargeTrace, HorizonWarning) {
  // Short horizon: power is still rising when the window closes.
  const auto tr = charge_trace(make_model(star(7), 0.0, 1.0, 1.0), 0.2, 0.01);
  EXPECT_TRUE(tr.horizon_warning);
  EXPECT_FALSE(charge_trace(make_model(star(7), 0.0, 1.0, 1.0)).horizon_warning);
}

TEST(ChargeTrace, Errors) {
  const auto m = make_model(star(4), 0.0, 1.0, 1.0);
  EXPECT_THROW(charge_trace(m, 1.0, 0.0), InputError);
  EXPECT_THROW(charge_trace(m, 0.01, 0.01), InputError);
  EXPECT_THROW(p_init(m, -0.1), InputError);
}

TEST(EarlyTime, PowerFollowsLinearLaw) {
  for (const Graph& g : {star(7), path(5), pineapple(6, 3), perturbed_star(7)})
    for (int l : {1, 3}) {
      const auto m = make_model(g, 0.0, 0.8, 1.0, l);
      const WorkEvaluator we(build_hamiltonian(m));
      const double slope = l * 0.64 * r_of_h(decompose(g), 0.0).value;
      for (double t : {1e-4, 5e-4, 1e-3}) EXPECT_LE(std::abs(we.work(t) / t - t * slope), 1e-4 * t * l * 0.64);
    }
}

TEST(EarlyTime, FiniteDifferenceSlopeAtZeroField) {
  for (int n = 2; n <= 5; ++n)
    for (const auto& g : enumerate_connected(n)) {
      const auto m = make_model(g, 0.0, 1.0, 1.0);
      const WorkEvaluator we(build_hamiltonian(m));
      const double eps = 1e-5;
      const double fd = (we.work(2 * eps) / (2 * eps) - we.work(eps) / eps) / eps;
      const double expect = early_power_exact(decompose(g), 0.0, 1, 1.0);
      EXPECT_LE(std::abs(fd - expect), 1e-3 * std::abs(expect) + 1e-9) << to_edge_list(g);
    }
}

TEST(PInit, Examples) {
  EXPECT_LT(std::abs(p_init(make_model(complete(7), 0.0, 1.0, 1.0))), 1e-4);
  const auto m = make_model(star(7), 0.0, 1.0, 1.0);
  const double slope = 3.5 - std::sqrt(6.0);
  EXPECT_NEAR(p_init(m, 1e-4) / 1e-4, slope, 1e-3 * slope);
  EXPECT_NEAR(p_init(m, 1e-3) / 1e-3, slope, 1e-3 * slope);
}

TEST(PMax, StarSevenCalibration) {
  const auto tr = charge_trace(make_model(star(7), 0.0, 1.0, 1.0));
  EXPECT_NEAR(tr.p_max, 0.81, 0.2 * 0.81);
  const auto ps = charge_trace(make_model(perturbed_star(7), 0.0, 1.0, 1.0));
  EXPECT_LT(ps.p_max, tr.p_max);
}
