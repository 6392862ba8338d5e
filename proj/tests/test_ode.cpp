#include <gtest/gtest.h>

#include <cmath>

#include "gpebo/ode.hpp"
#include "oracles.hpp"

using namespace gpebo;

namespace {

std::shared_ptr<const StateLayout> scalar_layout(std::size_t n = 1) {
  return std::make_shared<const StateLayout>(
      std::vector<std::pair<std::string, std::size_t>>{{"x", n}});
}

const RightHandSide decay = [](double, std::span<const double> s) {
  return std::vector<double>{-s[0]};
};

double endpoint_error(double h) {
  IntegrationConfig cfg{h, 1.0, 1000000};
  const auto end = integrate(decay, CompositeState(scalar_layout(), {1.0}, 0.0), cfg,
                             [](std::size_t, const CompositeState&) {});
  return std::abs(end.values()[0] - std::exp(-1.0));
}

}  // namespace

TEST(StateLayout, SegmentsAndLookup) {
  StateLayout layout({{"a", 2}, {"b", 3}});
  EXPECT_EQ(layout.size(), 5u);
  EXPECT_EQ(layout.segment("b").offset, 2u);
  EXPECT_THROW(layout.segment("c"), StructureError);
}

TEST(Rk4Step, ZeroRhsAdvancesTimeOnly) {
  const RightHandSide zero = [](double, std::span<const double> s) {
    return std::vector<double>(s.size(), 0.0);
  };
  const auto next = rk4_step(zero, CompositeState(scalar_layout(2), {1.0, -2.0}, 0.5), 0.25);
  EXPECT_EQ(next.values()[0], 1.0);
  EXPECT_EQ(next.values()[1], -2.0);
  EXPECT_DOUBLE_EQ(next.time(), 0.75);
}

TEST(Rk4Step, ScalarDecayMatchesExponential) {
  const auto next = rk4_step(decay, CompositeState(scalar_layout(), {1.0}, 0.0), 0.1);
  EXPECT_NEAR(next.values()[0], std::exp(-0.1), 1e-7);
}

TEST(Rk4Step, CompanionSystemMatchesSeriesExponential) {
  const Matrix a_k{{-7.5, 1.0}, {-25.0, 0.0}};
  const RightHandSide rhs = [&](double, std::span<const double> s) {
    return std::vector<double>{a_k(0, 0) * s[0] + a_k(0, 1) * s[1],
                               a_k(1, 0) * s[0] + a_k(1, 1) * s[1]};
  };
  const auto next = rk4_step(rhs, CompositeState(scalar_layout(2), {1.0, 0.0}, 0.0), 0.01);
  const Matrix e = oracle::expm(a_k, 0.01);
  EXPECT_NEAR(next.values()[0], e(0, 0), 1e-8);
  EXPECT_NEAR(next.values()[1], e(1, 0), 1e-8);
}

TEST(Rk4Step, LayoutMismatchIsStructuralError) {
  const RightHandSide bad = [](double, std::span<const double>) { return std::vector<double>{1, 2}; };
  EXPECT_THROW(rk4_step(bad, CompositeState(scalar_layout(), {1.0}, 0.0), 0.1), StructureError);
}

TEST(Rk4Step, NonFiniteDerivativeIsBlowUp) {
  const RightHandSide bad = [](double, std::span<const double>) {
    return std::vector<double>{std::nan("")};
  };
  try {
    rk4_step(bad, CompositeState(scalar_layout(), {1.0}, 2.0), 0.1);
    FAIL() << "expected BlowUpError";
  } catch (const BlowUpError& e) {
    EXPECT_DOUBLE_EQ(e.time(), 2.0);
  }
}

TEST(Integrate, ZeroHorizonRecordsOnce) {
  int calls = 0;
  const auto end = integrate(decay, CompositeState(scalar_layout(), {3.0}, 0.0),
                             IntegrationConfig{1e-3, 0.0, 10},
                             [&](std::size_t, const CompositeState&) { ++calls; });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(end.values()[0], 3.0);
}

TEST(Integrate, UnitIntervalMatchesExponential) {
  EXPECT_LE(endpoint_error(1e-3), 1e-10);
}

TEST(Integrate, FourthOrderConvergence) {
  const double ratio = endpoint_error(1e-2) / endpoint_error(5e-3);
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

TEST(Integrate, RecordsStrideAndFinal) {
  std::vector<double> times;
  integrate(decay, CompositeState(scalar_layout(), {1.0}, 0.0), IntegrationConfig{0.1, 1.05, 3},
            [&](std::size_t, const CompositeState& s) { times.push_back(s.time()); });
  ASSERT_GE(times.size(), 2u);
  EXPECT_EQ(times.front(), 0.0);
  EXPECT_NEAR(times.back(), 1.05, 1e-12);
  EXPECT_NEAR(times[1], 0.3, 1e-12);
}

TEST(Integrate, DeterministicAcrossRuns) {
  const RightHandSide osc = [](double t, std::span<const double> s) {
    return std::vector<double>{s[1], -s[0] + std::sin(t)};
  };
  std::vector<double> a, b;
  integrate(osc, CompositeState(scalar_layout(2), {1.0, 0.0}, 0.0), IntegrationConfig{1e-3, 5.0, 7},
            [&](std::size_t, const CompositeState& s) { a.insert(a.end(), s.values().begin(), s.values().end()); });
  integrate(osc, CompositeState(scalar_layout(2), {1.0, 0.0}, 0.0), IntegrationConfig{1e-3, 5.0, 7},
            [&](std::size_t, const CompositeState& s) { b.insert(b.end(), s.values().begin(), s.values().end()); });
  EXPECT_EQ(a, b);
}

TEST(Integrate, LinearityInInitialState) {
  const RightHandSide lin = [](double t, std::span<const double> s) {
    return std::vector<double>{-0.5 * s[0] + std::cos(t) * s[1], -s[0] - 0.1 * s[1]};
  };
  const double alpha = -3.7;
  std::vector<double> a, b;
  integrate(lin, CompositeState(scalar_layout(2), {1.0, 2.0}, 0.0), IntegrationConfig{1e-2, 3.0, 5},
            [&](std::size_t, const CompositeState& s) { a.insert(a.end(), s.values().begin(), s.values().end()); });
  integrate(lin, CompositeState(scalar_layout(2), {alpha, 2.0 * alpha}, 0.0),
            IntegrationConfig{1e-2, 3.0, 5},
            [&](std::size_t, const CompositeState& s) { b.insert(b.end(), s.values().begin(), s.values().end()); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b[i], alpha * a[i], 1e-10 * std::max(1.0, std::abs(alpha * a[i])));
  }
}

TEST(Integrate, BlowUpCarriesTime) {
  const RightHandSide grow = [](double, std::span<const double> s) {
    return std::vector<double>{s[0] * s[0]};
  };
  try {
    integrate(grow, CompositeState(scalar_layout(), {1.0}, 0.0), IntegrationConfig{1e-3, 2.0, 1},
              [](std::size_t, const CompositeState&) {});
    FAIL() << "expected BlowUpError";
  } catch (const BlowUpError& e) {
    // ẋ = x² from 1 escapes at t = 1.
    EXPECT_GT(e.time(), 0.9);
    EXPECT_LT(e.time(), 1.01);
  }
}

TEST(IntegrationConfig, RejectsInvalid) {
  EXPECT_THROW((IntegrationConfig{0.0, 1.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((IntegrationConfig{1e-3, -1.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((IntegrationConfig{1e-3, 1.0, 0}.validate()), std::invalid_argument);
  EXPECT_EQ((IntegrationConfig{1e-3, 100.0, 1}.step_count()), 100000u);
}
