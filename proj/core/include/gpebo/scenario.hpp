#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpebo/linalg.hpp"
#include "gpebo/theta.hpp"

namespace gpebo {

/// A scenario field failed validation. `field()` is the scenario-file key.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// offset + amplitude·sin(omega·t + phase)
struct SinusoidEntry {
  double offset = 0.0;
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  double at(double t) const;
  bool operator==(const SinusoidEntry&) const = default;
};

/// Matrix whose entries are each a constant plus one sinusoid.
class TimeVaryingMatrix {
 public:
  TimeVaryingMatrix() = default;
  TimeVaryingMatrix(std::size_t rows, std::size_t cols);
  static TimeVaryingMatrix constant(const Matrix& m);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  SinusoidEntry& entry(std::size_t i, std::size_t j) { return entries_.at(i * cols_ + j); }
  const SinusoidEntry& entry(std::size_t i, std::size_t j) const { return entries_.at(i * cols_ + j); }

  Matrix at(double t) const;
  /// True when no entry has a nonzero amplitude.
  bool is_constant() const;

  bool operator==(const TimeVaryingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<SinusoidEntry> entries_;
};

struct SineTerm {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  bool operator==(const SineTerm&) const = default;
};

/// u(t) = constant + Σ amplitude·sin(omega·t + phase)
struct InputSignal {
  double constant = 0.0;
  std::vector<SineTerm> terms;

  double at(double t) const;
  bool operator==(const InputSignal&) const = default;
};

struct Dimensions {
  std::size_t n = 0;
  std::size_t n_theta = 0;
  std::size_t n_B = 0;
  std::size_t n_w = 0;
  std::size_t n_Gamma = 0;

  /// Length of the constant parameter vector θ.
  std::size_t q() const noexcept { return n_theta + n_B + n_Gamma; }
  /// Length of (x_θ0 ; x_B0).
  std::size_t m() const noexcept { return n_theta + n_B; }
  /// Length of G(θ) = (θ ; 𝒦(θ)).
  std::size_t p() const noexcept { return q() + n_Gamma * m(); }

  bool operator==(const Dimensions&) const = default;
};

struct TruthState {
  Vector x;
  Vector x_theta;
  Vector x_B;
  Vector w;

  bool operator==(const TruthState&) const = default;
};

struct Gains {
  Vector K;
  Vector f;
  double f0 = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;

  bool operator==(const Gains&) const = default;
};

struct NoiseConfig {
  double amplitude = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const NoiseConfig&) const = default;
};

struct SimulationSettings {
  double t_final = 100.0;
  double dt = 1e-3;
  std::size_t record_stride = 100;

  bool operator==(const SimulationSettings&) const = default;
};

/// Thresholds for the "exponentially decaying" checks.
struct VerifySettings {
  double window_start = 5.0;
  double window_end = 50.0;
  double terminal_floor = 1e-6;

  bool operator==(const VerifySettings&) const = default;
};

struct Scenario {
  std::string name;
  Dimensions dims;

  TimeVaryingMatrix A_theta;
  TimeVaryingMatrix A_B;
  Matrix h_theta;
  Matrix h_B;

  Matrix S;
  Vector h_delta;
  Matrix C_Gamma;
  Vector eta;
  /// 1-based indices of η that make up ρ. Empty when no read-out is declared.
  std::vector<std::size_t> rho_readout;

  TruthState initial;
  InputSignal input;
  Gains gains;
  NoiseConfig noise;

  std::optional<Vector> theta_g0;
  std::optional<Vector> theta0;

  SimulationSettings sim;
  VerifySettings verify;

  ThetaVector true_theta() const;
  Vector theta_g0_or_default() const;
  Vector theta0_or_default() const;

  bool operator==(const Scenario&) const = default;
};

/// Built-in example: second-order plant, slowly decaying θ(t), Mathieu-type
/// B(t), harmonic exosystem with ρ = −1.
Scenario make_example_scenario();

/// Same plant with f₀ = 0.1, α = 1 (slow-converging tuning).
Scenario make_slow_gains_scenario();

/// Checks dimensions, Hurwitz tuning, the Γ parameterization and spectral
/// separation. Throws ScenarioError naming the offending field; returns
/// non-fatal warnings.
std::vector<std::string> validate(const Scenario& sc);

}  // namespace gpebo
