#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gpebo/gpebo.hpp"
#include "gpebo/simulation.hpp"
#include "gpebo/truth.hpp"
#include "oracles.hpp"

using namespace gpebo;

namespace {

FilterBank random_bank(std::mt19937_64& rng, const Dimensions& d) {
  FilterBank fb;
  fb.Phi_theta = oracle::random_matrix(rng, d.n_theta, d.n_theta);
  fb.Phi_B = oracle::random_matrix(rng, d.n_B, d.n_B);
  fb.z = oracle::random_vector(rng, d.n);
  fb.Omega = oracle::random_matrix(rng, d.n, d.n_theta);
  fb.P = oracle::random_matrix(rng, d.n, d.n_B);
  fb.L = oracle::random_vector(rng, d.n_w);
  fb.Q = oracle::random_matrix(rng, d.n_w, d.m());
  return fb;
}

// Truth ⊕ filters integrated on their own (no estimator) with step h.
std::pair<TruthState, FilterBank> open_loop(const Scenario& sc, double t_final, double h) {
  const LreDesign design = LreDesign::from(sc);
  ClosedLoop loop(sc);  // used only for its pack/unpack layout; estimator part stays frozen
  const RightHandSide rhs = [&](double t, std::span<const double> s) {
    const TruthState tr = loop.unpack_truth(s);
    const FilterBank fb = loop.unpack_filters(s);
    const TruthState dt = truth_rhs(sc, t, tr);
    const FilterBank df = filters_rhs(sc, design, t, fb, measure(tr, 0.0), sc.input.at(t));
    std::vector<double> out(s.size(), 0.0);
    const Vector packed = concat({dt.x, dt.x_theta, dt.x_B, dt.w, df.Phi_theta.data(), df.Phi_B.data(),
                                  df.z, df.Omega.data(), df.P.data(), df.L, df.Q.data()});
    std::copy(packed.begin(), packed.end(), out.begin());
    return out;
  };
  CompositeState end = integrate(rhs, loop.initial_state(), IntegrationConfig{h, t_final, 1000000},
                                 [](std::size_t, const CompositeState&) {});
  return {loop.unpack_truth(end.values()), loop.unpack_filters(end.values())};
}

}  // namespace

TEST(FilterBank, InitialConditions) {
  const Dimensions d = make_example_scenario().dims;
  const FilterBank fb = FilterBank::initial(d);
  EXPECT_EQ(fb.Phi_theta, Matrix::identity(2));
  EXPECT_EQ(fb.Phi_B, Matrix::identity(2));
  EXPECT_EQ(fb.Q, Matrix(2, 4));
  EXPECT_EQ(fb.L, (Vector{0.0, 0.0}));
}

TEST(FiltersRhs, ZeroBankGivesZeroDerivative) {
  const Scenario sc = make_example_scenario();
  const FilterBank zero = FilterBank::zeros(sc.dims);
  const FilterBank d = filters_rhs(sc, LreDesign::from(sc), 0.4, zero, 0.0, 0.0);
  EXPECT_EQ(d, zero);
}

TEST(FiltersRhs, PrincipalMatrixSolutionWithoutExcitation) {
  Scenario sc = make_example_scenario();
  sc.initial = {{0, 0}, {0, 0}, {0, 0}, {0, 0}};
  sc.input = {};
  for (double t : {1.0, 50.0}) {
    const auto [truth, fb] = open_loop(sc, t, 1e-3);
    EXPECT_NEAR(fb.Phi_theta(0, 0), std::exp(-0.001 * t), 1e-12);
    EXPECT_NEAR(fb.Phi_theta(1, 1), std::exp(-0.002 * t), 1e-12);
    EXPECT_EQ(fb.Phi_theta(0, 1), 0.0);
    EXPECT_EQ(fb.z, (Vector{0.0, 0.0}));
  }
}

TEST(FiltersRhs, MatchesHandCodedExampleDynamics) {
  const Scenario sc = make_example_scenario();
  const LreDesign design = LreDesign::from(sc);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const FilterBank fb = random_bank(rng, sc.dims);
    const double t = 0.37 * trial;
    const double y = 0.3 - 0.1 * trial;
    const double u = 10.0 + std::sin(0.5 * t);
    const FilterBank d = filters_rhs(sc, design, t, fb, y, u);

    // n = n_w = 2, K = (7.5, 25), f = (−1, −2), h_θ = h_B = I.
    const double zeta = y - fb.z[0];
    const double phi[4] = {fb.Omega(0, 0), fb.Omega(0, 1), fb.P(0, 0), fb.P(0, 1)};
    EXPECT_NEAR(d.z[0], -7.5 * fb.z[0] + fb.z[1] + 7.5 * y, 1e-12);
    EXPECT_NEAR(d.z[1], -25.0 * fb.z[0] + 25.0 * y, 1e-12);
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(d.Omega(0, j), -7.5 * fb.Omega(0, j) + fb.Omega(1, j) + fb.Phi_theta(0, j) * y, 1e-12);
      EXPECT_NEAR(d.Omega(1, j), -25.0 * fb.Omega(0, j) + fb.Phi_theta(1, j) * y, 1e-12);
      EXPECT_NEAR(d.P(0, j), -7.5 * fb.P(0, j) + fb.P(1, j) + fb.Phi_B(0, j) * u, 1e-12);
      EXPECT_NEAR(d.P(1, j), -25.0 * fb.P(0, j) + fb.Phi_B(1, j) * u, 1e-12);
    }
    EXPECT_NEAR(d.Phi_theta(0, 0), -0.001 * fb.Phi_theta(0, 0), 1e-15);
    EXPECT_NEAR(d.Phi_theta(1, 0), -0.002 * fb.Phi_theta(1, 0), 1e-15);
    const double a21 = -1.0 + 0.1 * std::sin(t);
    EXPECT_NEAR(d.Phi_B(0, 1), fb.Phi_B(1, 1), 1e-15);
    EXPECT_NEAR(d.Phi_B(1, 0), a21 * fb.Phi_B(0, 0), 1e-15);
    EXPECT_NEAR(d.L[0], fb.L[1], 1e-15);
    EXPECT_NEAR(d.L[1], -fb.L[0] - 2.0 * fb.L[1] + zeta, 1e-12);
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(d.Q(0, j), fb.Q(1, j), 1e-15);
      EXPECT_NEAR(d.Q(1, j), -fb.Q(0, j) - 2.0 * fb.Q(1, j) + phi[j], 1e-12);
    }
  }
}

TEST(Measurables, Examples) {
  const Dimensions d = make_example_scenario().dims;
  FilterBank fb = FilterBank::zeros(d);
  Measurables m = measurables(fb, 3.0);
  EXPECT_EQ(m.zeta, 3.0);
  EXPECT_EQ(m.phi, Vector(4, 0.0));
  fb.z = {1.0, 0.0};
  EXPECT_EQ(measurables(fb, 1.0).zeta, 0.0);
}

TEST(Measurables, ClosedLoopAgreesWithSeparateIntegration) {
  const Scenario sc = make_example_scenario();
  SimulationOptions opt;
  opt.t_final = 1.0;
  const gpebo::Run run = simulate(sc, opt);
  const Sample& last = run.samples.back();
  ASSERT_NEAR(last.t, 1.0, 1e-12);
  const auto [truth, fb] = open_loop(sc, 1.0, 5e-4);
  const double zeta_recorded = measurables(last.filters, last.y).zeta;
  const double zeta_reintegrated = measurables(fb, measure(truth, 0.0)).zeta;
  EXPECT_NEAR(zeta_recorded, zeta_reintegrated, 1e-9);
}

TEST(RegressorSample, ZeroBank) {
  const Scenario sc = make_example_scenario();
  const FilterBank fb = FilterBank::zeros(sc.dims);
  const RegressorSample r = regressor_sample(sc, fb, measurables(fb, 0.0));
  EXPECT_EQ(r.Y, 0.0);
  EXPECT_EQ(r.Omega_L, Vector(5, 0.0));
  EXPECT_EQ(r.Omega_N, Vector(4, 0.0));
}

TEST(RegressorSample, ExampleNonlinearRegressorIsMinusFirstRowOfQ) {
  const Scenario sc = make_example_scenario();
  std::mt19937_64 rng(22);
  const FilterBank fb = random_bank(rng, sc.dims);
  const RegressorSample r = regressor_sample(sc, fb, measurables(fb, 0.5));
  ASSERT_EQ(r.Omega_N.size(), 4u);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(r.Omega_N[j], -fb.Q(0, j));
}

TEST(RegressorSample, HandComputedOutput) {
  const Scenario sc = make_example_scenario();
  FilterBank fb = FilterBank::zeros(sc.dims);
  fb.L = {1.0, 2.0};
  const RegressorSample r = regressor_sample(sc, fb, Measurables{5.0, Vector(4, 0.0)});
  EXPECT_EQ(r.Y, 0.0);
  // Ω_L tail is C_ΓᵀL = L₁.
  EXPECT_EQ(r.Omega_L[4], 1.0);
}

TEST(RegressorSample, FlatteningIsRowMajorOverEtaIndex) {
  Scenario sc = make_example_scenario();
  sc.dims.n_Gamma = 2;
  sc.C_Gamma = Matrix{{1.0, 0.5}, {0.0, 2.0}};
  std::mt19937_64 rng(23);
  const FilterBank fb = random_bank(rng, sc.dims);
  const RegressorSample r = regressor_sample(sc, fb, measurables(fb, 0.0));
  ASSERT_EQ(r.Omega_N.size(), 8u);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double ref = -(sc.C_Gamma(0, k) * fb.Q(0, j) + sc.C_Gamma(1, k) * fb.Q(1, j));
      EXPECT_NEAR(r.Omega_N[k * 4 + j], ref, 1e-15);
    }
  }
}

TEST(GMap, ExampleValue) {
  EXPECT_EQ(g_map(make_example_scenario().true_theta()),
            (Vector{-2.0, -1.0, 0.7, 0.2, -1.0, 2.0, 1.0, -0.7, -0.2}));
}

TEST(GMap, ZeroParameter) {
  const ThetaVector z{{0, 0}, {0, 0}, {0}};
  EXPECT_EQ(g_map(z), Vector(9, 0.0));
  const Matrix j = g_jacobian(z);
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(j(r, c), (r == c && r < 5) ? 1.0 : 0.0);
}

TEST(GMap, JacobianMatchesCentralDifferences) {
  std::mt19937_64 rng(24);
  for (std::size_t ng : {1u, 2u}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Vector flat = oracle::random_vector(rng, 4 + ng, -3.0, 3.0);
      const Dimensions d{2, 2, 2, 2, ng};
      const Matrix j = g_jacobian(ThetaVector::from_flat(flat, 2, 2, ng));
      const double h = 1e-6;
      for (std::size_t c = 0; c < flat.size(); ++c) {
        Vector up = flat, dn = flat;
        up[c] += h;
        dn[c] -= h;
        const Vector gu = g_map(up, d);
        const Vector gd = g_map(dn, d);
        for (std::size_t r = 0; r < gu.size(); ++r) {
          EXPECT_NEAR(j(r, c), (gu[r] - gd[r]) / (2 * h), 1e-6);
        }
      }
    }
  }
}

TEST(SelectionMatrix, Shapes) {
  const Matrix q = selection_matrix(5, 9);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 9; ++c) EXPECT_EQ(q(r, c), (r == c) ? 1.0 : 0.0);
  EXPECT_EQ(selection_matrix(3, 3), Matrix::identity(3));
  EXPECT_THROW(selection_matrix(4, 3), DimensionError);
}

TEST(SelectionMatrix, RecoversTheta) {
  std::mt19937_64 rng(25);
  const Dimensions d{2, 2, 2, 2, 1};
  const Matrix q = selection_matrix(5, 9);
  for (int k = 0; k < 20; ++k) {
    const Vector th = oracle::random_vector(rng, 5);
    EXPECT_EQ(q * g_map(th, d), th);
  }
}

TEST(MonotonicityMargin, SymmetricPartIsTwiceIdentity) {
  std::mt19937_64 rng(26);
  const Matrix q = selection_matrix(5, 9);
  for (int k = 0; k < 100; ++k) {
    const Matrix j = g_jacobian(ThetaVector::from_flat(oracle::random_vector(rng, 5, -10, 10), 2, 2, 1));
    const Matrix qj = q * j;
    const Matrix sym = qj + qj.transpose();
    EXPECT_LE(oracle::max_abs_diff(sym, Matrix::identity(5) * 2.0), 1e-12);
  }
}

TEST(RegressionResidual, ZeroForConsistentSample) {
  const ThetaVector th = make_example_scenario().true_theta();
  RegressorSample s;
  s.Omega_L = {0.1, 0.2, 0.3, 0.4, 0.5};
  s.Omega_N = {1.0, -1.0, 2.0, 0.5};
  const Vector g = g_map(th);
  s.Y = dot(s.row(), g);
  EXPECT_NEAR(regression_residual(s, th), 0.0, 1e-14);
  s.Y += 0.25;
  EXPECT_NEAR(regression_residual(s, th), 0.25, 1e-14);
}
