#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gpebo/gpebo.hpp"

namespace gpebo {

struct EstimatorGains {
  double alpha = 0.0;
  double gamma = 0.0;
  double f0 = 0.0;
};

/// LS search vector θ̂_g (p), LS gain F (p×p) and the mixed estimate θ̂ (q).
struct EstimatorState {
  Vector theta_g;
  Matrix F;
  Vector theta;

  /// θ̂_g = θ_g0, F = I/f₀, θ̂ = θ₀.
  static EstimatorState initial(std::span<const double> theta_g0, std::span<const double> theta0,
                                double f0);

  bool operator==(const EstimatorState&) const = default;
};

/// Scalar mixing data: Δ = det(I − f₀F), 𝒴 = adj(I − f₀F)(θ̂_g − f₀F θ_g0).
struct DremSample {
  double Delta = 0.0;
  Vector Y;
};

DremSample drem_transform(const Matrix& F, std::span<const double> theta_g,
                          std::span<const double> theta_g0, double f0);

/// LS+DREM interlaced update:
///   θ̂̇_g = α F Ωᵀ(Y − Ω θ̂_g),  Ḟ = −α F ΩᵀΩ F,  θ̂̇ = γ Q_sel Δ(𝒴 − Δ G(θ̂))
EstimatorState estimator_rhs(const EstimatorState& st, const RegressorSample& sample,
                             const EstimatorGains& gains, std::span<const double> theta_g0,
                             const Matrix& q_sel, const Dimensions& dims);

struct ExtendedLreResidual {
  /// (I − f₀F)G(θ) − (θ̂_g − f₀F θ_g0)
  Vector extended;
  /// 𝒴 − Δ·G(θ) = adj(I − f₀F)·extended
  Vector mixed;
};

ExtendedLreResidual extended_lre_residual(const Matrix& F, std::span<const double> theta_g,
                                          std::span<const double> theta_g0, double f0,
                                          const ThetaVector& theta_true);

struct ExcitationReport {
  double t0 = 0.0;
  double t_c = 0.0;
  Matrix gram;                        // ∫ ΩᵀΩ over [t0, t0 + t_c]
  double gram_min_eigenvalue = 0.0;   // bisection/Cholesky bound
  double gram_gershgorin_bound = 0.0;
  /// First recorded time Δ exceeds 1e−8, 1e−6, 1e−4 (nullopt if never).
  std::vector<std::pair<double, std::optional<double>>> first_crossing;
  double delta_min_after_tc = 0.0;
  double delta_max_after_tc = 0.0;
  double delta_at_start = 0.0;
};

/// Interval-excitation diagnostics from trajectories recorded on a common
/// grid. `regressor_rows[i]` is the p-vector Ω at `times[i]`.
ExcitationReport excitation_report(std::span<const double> times, std::span<const double> delta,
                                   const std::vector<Vector>& regressor_rows, double t_c);

}  // namespace gpebo
