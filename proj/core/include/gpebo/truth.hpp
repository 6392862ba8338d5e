#pragma once

#include <cstdint>
#include <random>

#include "gpebo/scenario.hpp"

namespace gpebo {

/// Upper-shift matrix A (identity on the superdiagonal).
Matrix shift_matrix(std::size_t n);

/// Plant, parameter subsystems and exosystem right-hand side:
///   ẋ = A x + θ(t) x₁ + B(t) u(t) + e_n δ(t),  θ = h_θ x_θ, B = h_B x_B, δ = h_δᵀ w
///   ẋ_θ = A_θ(t) x_θ,  ẋ_B = A_B(t) x_B,  ẇ = S w
TruthState truth_rhs(const Scenario& sc, double t, const TruthState& s);

/// Time-varying parameters seen by the plant.
Vector theta_tv(const Scenario& sc, const TruthState& s);
Vector b_tv(const Scenario& sc, const TruthState& s);
double disturbance(const Scenario& sc, const TruthState& s);

/// Bounded measurement noise: amplitude·ν with ν uniform on [−1, 1] from a
/// seeded generator. Same seed, same sequence.
class MeasurementNoise {
 public:
  MeasurementNoise(double amplitude, std::uint64_t seed);

  double next();
  double amplitude() const noexcept { return amplitude_; }

 private:
  double amplitude_;
  std::mt19937_64 engine_;
};

/// y = x₁ + noise_sample, where noise_sample comes from MeasurementNoise.
double measure(const TruthState& s, double noise_sample);

}  // namespace gpebo
