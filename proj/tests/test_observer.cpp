#include <gtest/gtest.h>

#include <random>

#include "gpebo/observer.hpp"
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

FilterBank combine(double a, const FilterBank& x, const FilterBank& y) {
  FilterBank out = y;
  out.Phi_theta = x.Phi_theta * a + y.Phi_theta;
  out.Phi_B = x.Phi_B * a + y.Phi_B;
  out.z = add(scale(x.z, a), y.z);
  out.Omega = x.Omega * a + y.Omega;
  out.P = x.P * a + y.P;
  out.L = add(scale(x.L, a), y.L);
  out.Q = x.Q * a + y.Q;
  return out;
}

}  // namespace

TEST(OkMatrix, ExampleGain) {
  EXPECT_EQ(ok_matrix(Vector{7.5, 25.0}), (Matrix{{1.0, 0.0}, {-7.5, 1.0}}));
}

TEST(OkMatrix, ZeroGainIsIdentity) {
  EXPECT_EQ(ok_matrix(Vector{0.0, 0.0, 0.0}), Matrix::identity(3));
}

TEST(OkMatrix, UnitLowerInverseProperty) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const Matrix ok = ok_matrix(oracle::random_vector(rng, n, -5.0, 5.0));
    const Matrix inv = unit_lower_inverse(ok);
    EXPECT_LE(oracle::max_abs_diff(oracle::matmul(ok, inv), Matrix::identity(n)),
              1e-12 * std::max(1.0, ok.max_abs() * inv.max_abs()));
  }
}

TEST(MGamma, VanishesWhenEstimateEqualsFilterPolynomial) {
  const Vector f{-1.0, -2.0};
  EXPECT_EQ(m_gamma_matrix(f, f, 2), Matrix(2, 2));
}

TEST(MGamma, ExampleRows) {
  EXPECT_EQ(m_gamma_matrix(Vector{-1.0, 0.0}, Vector{-1.0, -2.0}, 2),
            (Matrix{{0.0, 2.0}, {-2.0, 0.0}}));
}

TEST(MGamma, RowsFollowCompanionPowers) {
  std::mt19937_64 rng(42);
  const Vector g = oracle::random_vector(rng, 3);
  const Vector f = oracle::random_vector(rng, 3);
  const Matrix m = m_gamma_matrix(g, f, 4);
  const Matrix a{{0, 1, 0}, {0, 0, 1}, {g[0], g[1], g[2]}};
  Matrix row(1, 3);
  for (std::size_t j = 0; j < 3; ++j) row(0, j) = g[j] - f[j];
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(m(i, j), row(0, j), 1e-12);
    row = oracle::matmul(row, a);
  }
}

TEST(Reconstruct, ZeroFiltersGiveZeroState) {
  const Scenario sc = make_example_scenario();
  const Vector x = reconstruct_state(sc, FilterBank::zeros(sc.dims), sc.true_theta());
  EXPECT_EQ(x, (Vector{0.0, 0.0}));
}

TEST(Reconstruct, HandAssembledExample) {
  const Scenario sc = make_example_scenario();
  std::mt19937_64 rng(43);
  const ThetaVector th = sc.true_theta();
  for (int trial = 0; trial < 20; ++trial) {
    const FilterBank fb = random_bank(rng, sc.dims);
    const Vector x = reconstruct_state(sc, fb, th);
    // O_K⁻¹ = [[1,0],[7.5,1]], M_Γ = [[0,2],[−2,0]] for Γ = (−1, 0), f = (−1, −2).
    const double x0[4] = {-2.0, -1.0, 0.7, 0.2};
    double psi[2];
    for (int i = 0; i < 2; ++i) {
      psi[i] = fb.L[i];
      for (int j = 0; j < 4; ++j) psi[i] -= fb.Q(i, j) * x0[j];
    }
    const double m0 = 2.0 * psi[1], m1 = -2.0 * psi[0];
    const double c0 = m0, c1 = 7.5 * m0 + m1;
    for (int i = 0; i < 2; ++i) {
      const double ref = fb.z[i] + (i == 0 ? c0 : c1) + fb.Omega(i, 0) * x0[0] +
                         fb.Omega(i, 1) * x0[1] + fb.P(i, 0) * x0[2] + fb.P(i, 1) * x0[3];
      EXPECT_NEAR(x[i], ref, 1e-12);
    }
  }
}

TEST(Reconstruct, LinearInFilterStates) {
  const Scenario sc = make_example_scenario();
  const StateReconstructor rec(sc);
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    const FilterBank a = random_bank(rng, sc.dims);
    const FilterBank b = random_bank(rng, sc.dims);
    const ThetaVector th = ThetaVector::from_flat(oracle::random_vector(rng, 5, -3, 3), 2, 2, 1);
    const double s = -1.7 + 0.1 * trial;
    const Vector lhs = rec.reconstruct(combine(s, a, b), th);
    const Vector xa = rec.reconstruct(a, th);
    const Vector xb = rec.reconstruct(b, th);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(lhs[i], s * xa[i] + xb[i], 1e-10);
  }
}

TEST(Reconstruct, FoldedFormMatchesWhenParameterFiltersVanish) {
  const Scenario sc = make_example_scenario();
  const StateReconstructor rec(sc);
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    FilterBank fb = random_bank(rng, sc.dims);
    fb.Omega = Matrix(2, 2);
    fb.P = Matrix(2, 2);
    const ThetaVector th = ThetaVector::from_flat(oracle::random_vector(rng, 5), 2, 2, 1);
    const Vector a = rec.reconstruct(fb, th);
    const Vector b = rec.reconstruct_folded(fb, th);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Reconstruct, FoldedFormNeedsSquareExosystem) {
  Scenario sc = make_example_scenario();
  sc.dims.n_w = 3;
  sc.gains.f = {-1.0, -3.0, -3.0};
  sc.C_Gamma = Matrix{{1.0}, {0.0}, {0.0}};
  const StateReconstructor rec(sc);
  FilterBank fb = FilterBank::zeros(sc.dims);
  EXPECT_THROW(rec.reconstruct_folded(fb, sc.true_theta()), DimensionError);
}

TEST(RecoverTv, PrincipalSolutionsTimesInitialConditions) {
  const Scenario sc = make_example_scenario();
  FilterBank fb = FilterBank::initial(sc.dims);
  fb.Phi_theta = Matrix{{0.5, 0.0}, {0.0, 0.25}};
  const auto tv = recover_tv_params(sc, fb, sc.true_theta());
  EXPECT_EQ(tv.theta_tv, (Vector{-1.0, -0.25}));
  EXPECT_EQ(tv.B, (Vector{0.7, 0.2}));
}

TEST(RecoverRho, ReadsDeclaredEntries) {
  const Scenario sc = make_example_scenario();
  const RhoReport rep = recover_rho(sc, Vector{-0.8});
  EXPECT_EQ(rep.Gamma_hat, (Vector{-0.8, 0.0}));
  ASSERT_TRUE(rep.rho_hat.has_value());
  EXPECT_EQ(*rep.rho_hat, (Vector{-0.8}));
  EXPECT_TRUE(rep.notice.empty());
}

TEST(RecoverRho, NoReadoutGivesNotice) {
  Scenario sc = make_example_scenario();
  sc.rho_readout.clear();
  const RhoReport rep = recover_rho(sc, Vector{-0.8});
  EXPECT_FALSE(rep.rho_hat.has_value());
  EXPECT_FALSE(rep.notice.empty());
  EXPECT_EQ(rep.Gamma_hat, (Vector{-0.8, 0.0}));
}

TEST(Observe, BundlesAllOutputs) {
  const Scenario sc = make_example_scenario();
  const StateReconstructor rec(sc);
  const FilterBank fb = FilterBank::initial(sc.dims);
  const ObserverOutput out = observe(rec, sc, fb, sc.true_theta());
  EXPECT_EQ(out.x_hat, reconstruct_state(sc, fb, sc.true_theta()));
  EXPECT_EQ(out.theta_tv_hat, (Vector{-2.0, -1.0}));
  EXPECT_EQ(out.eta_hat, (Vector{-1.0}));
  ASSERT_TRUE(out.rho_hat.has_value());
}
