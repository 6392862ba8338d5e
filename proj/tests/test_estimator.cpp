#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gpebo/estimator.hpp"
#include "gpebo/simulation.hpp"
#include "oracles.hpp"

using namespace gpebo;

namespace {

Matrix random_spd(std::mt19937_64& rng, std::size_t n) {
  const Matrix a = oracle::random_matrix(rng, n, n);
  Matrix s = oracle::matmul(a, a.transpose());
  for (std::size_t i = 0; i < n; ++i) s(i, i) += 0.5;
  return s;
}

Matrix laplace_inverse(const Matrix& m) {
  Matrix inv = oracle::laplace_adjugate(m);
  inv *= 1.0 / oracle::laplace_det(m);
  return inv;
}

const Dimensions kExampleDims{2, 2, 2, 2, 1};

}  // namespace

TEST(EstimatorState, Initial) {
  const EstimatorState st = EstimatorState::initial(Vector{1.0, 2.0}, Vector{3.0}, 4.0);
  EXPECT_EQ(st.theta_g, (Vector{1.0, 2.0}));
  EXPECT_EQ(st.theta, (Vector{3.0}));
  EXPECT_EQ(st.F, (Matrix{{0.25, 0.0}, {0.0, 0.25}}));
}

TEST(DremTransform, GainAtInitialValueGivesZero) {
  const double f0 = 2.0;
  const Matrix f = Matrix::identity(3) * (1.0 / f0);
  const DremSample s = drem_transform(f, Vector{1.0, -2.0, 3.0}, Vector{0.5, 0.5, 0.5}, f0);
  EXPECT_NEAR(s.Delta, 0.0, 1e-15);
  for (double v : s.Y) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(DremTransform, ZeroGainGivesSearchVector) {
  const DremSample s = drem_transform(Matrix(2, 2), Vector{1.5, -0.5}, Vector{7.0, 8.0}, 1.0);
  EXPECT_EQ(s.Delta, 1.0);
  EXPECT_EQ(s.Y, (Vector{1.5, -0.5}));
}

TEST(DremTransform, DiagonalExample) {
  const double f0 = 4.0;
  const Matrix f{{0.5 / f0, 0.0}, {0.0, 0.25 / f0}};
  const DremSample s = drem_transform(f, Vector{1.0, 1.0}, Vector{0.0, 0.0}, f0);
  EXPECT_NEAR(s.Delta, 0.375, 1e-15);
  EXPECT_NEAR(s.Y[0], 0.75, 1e-15);
  EXPECT_NEAR(s.Y[1], 0.5, 1e-15);
}

TEST(DremTransform, MatchesCofactorOracle) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 1 + trial % 6;
    const double f0 = 0.5 + 0.1 * (trial % 5);
    const Matrix f = oracle::random_matrix(rng, p, p);
    const Vector tg = oracle::random_vector(rng, p);
    const Vector tg0 = oracle::random_vector(rng, p);
    const DremSample s = drem_transform(f, tg, tg0, f0);

    const Matrix m = Matrix::identity(p) - f * f0;
    const Matrix adj = oracle::laplace_adjugate(m);
    EXPECT_NEAR(s.Delta, oracle::laplace_det(m), 1e-10);
    const Vector ftg0 = f * tg0;
    Vector rhs(p);
    for (std::size_t i = 0; i < p; ++i) rhs[i] = tg[i] - f0 * ftg0[i];
    const Vector ref = adj * rhs;
    for (std::size_t i = 0; i < p; ++i) EXPECT_NEAR(s.Y[i], ref[i], 1e-9);
  }
}

TEST(EstimatorRhs, ZeroRegressorFreezesLeastSquares) {
  const Scenario sc = make_example_scenario();
  const Vector tg0 = sc.theta_g0_or_default();
  EstimatorState st = EstimatorState::initial(tg0, sc.theta0_or_default(), sc.gains.f0);
  RegressorSample zero;
  zero.Omega_L = Vector(5, 0.0);
  zero.Omega_N = Vector(4, 0.0);
  const EstimatorGains g{sc.gains.alpha, sc.gains.gamma, sc.gains.f0};
  const EstimatorState d = estimator_rhs(st, zero, g, tg0, selection_matrix(5, 9), kExampleDims);
  EXPECT_EQ(d.theta_g, Vector(9, 0.0));
  EXPECT_EQ(d.F, Matrix(9, 9));
  // At the initial gain Δ = 0, so the mixed update is idle too.
  for (double v : d.theta) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(EstimatorRhs, ScalarGainDerivative) {
  const Dimensions d{1, 1, 0, 1, 0};
  EstimatorState st{{0.0}, Matrix{{1.0}}, {0.0}};
  RegressorSample s;
  s.Omega_L = {1.0};
  const EstimatorState ds = estimator_rhs(st, s, EstimatorGains{1.0, 1.0, 0.5}, Vector{0.0},
                                          selection_matrix(1, 1), d);
  EXPECT_EQ(ds.F(0, 0), -1.0);
}

TEST(EstimatorRhs, InverseGainGrowsByRegressorGram) {
  // d/dt F⁻¹ = −F⁻¹ Ḟ F⁻¹ = α ΩᵀΩ
  std::mt19937_64 rng(32);
  const Matrix q_sel = selection_matrix(5, 9);
  for (int trial = 0; trial < 4; ++trial) {
    const double alpha = 0.1 + 7.0 * trial;
    const Matrix f = random_spd(rng, 9) * 0.05;
    RegressorSample s;
    s.Omega_L = oracle::random_vector(rng, 5);
    s.Omega_N = oracle::random_vector(rng, 4);
    s.Y = 0.3;
    const EstimatorState st{oracle::random_vector(rng, 9), f, oracle::random_vector(rng, 5)};
    const EstimatorState d =
        estimator_rhs(st, s, EstimatorGains{alpha, 1.0, 1.0}, Vector(9, 0.0), q_sel, kExampleDims);
    const Matrix finv = laplace_inverse(f);
    const Matrix lhs = oracle::matmul(oracle::matmul(finv, d.F), finv) * -1.0;
    const Vector row = s.row();
    Matrix gram(9, 9);
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j) gram(i, j) = alpha * row[i] * row[j];
    EXPECT_LE(oracle::max_abs_diff(lhs, gram), 1e-7 * std::max(1.0, gram.max_abs()));
    EXPECT_EQ(d.F, d.F.transpose());
  }
}

TEST(EstimatorRhs, MatchesHandAssembledUpdate) {
  std::mt19937_64 rng(33);
  const Matrix q_sel = selection_matrix(5, 9);
  for (int trial = 0; trial < 6; ++trial) {
    const double f0 = 0.7, alpha = 3.0, gamma = 2.0;
    const Matrix f = random_spd(rng, 9) * 0.02;
    const Vector tg = oracle::random_vector(rng, 9);
    const Vector tg0 = oracle::random_vector(rng, 9);
    const Vector th = oracle::random_vector(rng, 5);
    RegressorSample s;
    s.Omega_L = oracle::random_vector(rng, 5);
    s.Omega_N = oracle::random_vector(rng, 4);
    s.Y = 1.2;
    const EstimatorState d =
        estimator_rhs(EstimatorState{tg, f, th}, s, EstimatorGains{alpha, gamma, f0}, tg0, q_sel,
                      kExampleDims);

    const Vector row = s.row();
    double pred = 0.0;
    for (std::size_t i = 0; i < 9; ++i) pred += row[i] * tg[i];
    const Vector fo = f * row;
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(d.theta_g[i], alpha * fo[i] * (s.Y - pred), 1e-12);

    const Matrix m = Matrix::identity(9) - f * f0;
    const double delta = oracle::laplace_det(m);
    const Vector ftg0 = f * tg0;
    Vector inner(9);
    for (std::size_t i = 0; i < 9; ++i) inner[i] = tg[i] - f0 * ftg0[i];
    const Vector mixed_y = oracle::laplace_adjugate(m) * inner;
    // G(θ̂) with η̂ = θ̂₅ multiplying (θ̂₁..θ̂₄).
    const Vector g{th[0], th[1], th[2], th[3], th[4],
                   th[4] * th[0], th[4] * th[1], th[4] * th[2], th[4] * th[3]};
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_NEAR(d.theta[k], gamma * delta * (mixed_y[k] - delta * g[k]), 1e-8);
    }
  }
}

TEST(EstimatorRhs, RejectsDimensionMismatch) {
  RegressorSample s;
  s.Omega_L = Vector(5, 0.0);
  s.Omega_N = Vector(4, 0.0);
  const EstimatorState st{Vector(3, 0.0), Matrix::identity(3), Vector(5, 0.0)};
  EXPECT_THROW(estimator_rhs(st, s, EstimatorGains{1, 1, 1}, Vector(3, 0.0), selection_matrix(5, 9),
                             kExampleDims),
               DimensionError);
}

TEST(ExtendedLre, ExactAtTrueParameterWithoutData) {
  // With F = I/f₀ the extended residual is G(θ)·0 − (θ_g0 − θ_g0) = 0.
  const ThetaVector th = make_example_scenario().true_theta();
  const double f0 = 1.0;
  const Vector tg0(9, 0.3);
  const auto r = extended_lre_residual(Matrix::identity(9), tg0, tg0, f0, th);
  for (double v : r.extended) EXPECT_NEAR(v, 0.0, 1e-15);
  for (double v : r.mixed) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(EstimatorRun, GainInvariantsOnShortRun) {
  SimulationOptions opt;
  opt.t_final = 5.0;
  opt.record_stride = 50;
  const gpebo::Run run = simulate(make_example_scenario(), opt);
  double prev_trace = std::numeric_limits<double>::infinity();
  for (const Sample& s : run.samples) {
    const Matrix& f = s.estimator.F;
    EXPECT_LE(oracle::max_abs_diff(f, f.transpose()), 1e-12);
    EXPECT_TRUE(is_positive_definite(f)) << "t = " << s.t;
    EXPECT_LE(f.trace(), prev_trace + 1e-12);
    prev_trace = f.trace();
    EXPECT_GE(s.Delta, -1e-9);
    EXPECT_LE(s.Delta, 1.0 + 1e-9);
  }
  EXPECT_NEAR(run.samples.front().Delta, 0.0, 1e-15);
}

TEST(ExcitationReport, NoExcitation) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> delta(4, 0.0);
  const std::vector<Vector> rows(4, Vector(3, 0.0));
  const ExcitationReport rep = excitation_report(t, delta, rows, 2.0);
  EXPECT_EQ(rep.gram, Matrix(3, 3));
  EXPECT_NEAR(rep.gram_min_eigenvalue, 0.0, 1e-12);
  for (const auto& [thr, when] : rep.first_crossing) EXPECT_FALSE(when.has_value()) << thr;
  EXPECT_EQ(rep.delta_max_after_tc, 0.0);
}

TEST(ExcitationReport, TrapezoidGramOfConstantRegressor) {
  const std::vector<double> t{0.0, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> delta{0.0, 1e-7, 1e-5, 1e-3, 0.5};
  const std::vector<Vector> rows(5, Vector{1.0, 2.0});
  const ExcitationReport rep = excitation_report(t, delta, rows, 1.0);
  EXPECT_NEAR(rep.gram(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(rep.gram(0, 1), 2.0, 1e-15);
  EXPECT_NEAR(rep.gram(1, 1), 4.0, 1e-15);
  EXPECT_NEAR(rep.gram_min_eigenvalue, 0.0, 1e-9);
  EXPECT_EQ(rep.first_crossing[0].second, 0.5);
  EXPECT_EQ(rep.first_crossing[1].second, 1.0);
  EXPECT_EQ(rep.first_crossing[2].second, 1.5);
  EXPECT_EQ(rep.delta_min_after_tc, 1e-3);
  EXPECT_THROW(excitation_report(t, delta, std::vector<Vector>(2, Vector{1.0}), 1.0), DimensionError);
}
