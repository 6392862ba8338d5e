#pragma once

#include <optional>
#include <string>

#include "gpebo/gpebo.hpp"

namespace gpebo {

/// Rows e₁ᵀA_Kⁱ, i = 0..n−1. Unit lower triangular for every K.
Matrix ok_matrix(std::span<const double> k);

/// Inverse of a unit lower-triangular matrix by forward substitution.
Matrix unit_lower_inverse(const Matrix& l);

/// Rows (Γ̂ − f)ᵀ A_Γ̂ⁱ, i = 0..n−1, with A_Γ̂ = companion_last_row(Γ̂).
Matrix m_gamma_matrix(std::span<const double> gamma_hat, std::span<const double> f, std::size_t n);

struct ObserverOutput {
  Vector x_hat;
  Vector theta_tv_hat;
  Vector B_hat;
  Vector Gamma_hat;
  Vector eta_hat;
  std::optional<Vector> rho_hat;
};

/// Certainty-equivalent state map. Caches O_K⁻¹ because K is constant.
class StateReconstructor {
 public:
  explicit StateReconstructor(const Scenario& sc);

  /// x̂ = z + O_K⁻¹ M_Γ̂ (L − Q x̂₀) + Ω x̂_θ0 + P x̂_B0, with Γ̂ = C_Γ η̂.
  Vector reconstruct(const FilterBank& fb, const ThetaVector& theta_hat) const;

  /// x̂ = z + O_K⁻¹ M_Γ̂ {L − [Q − (Ω P)] x̂₀}. Only defined for n_w = n.
  Vector reconstruct_folded(const FilterBank& fb, const ThetaVector& theta_hat) const;

  const Matrix& ok_inverse() const noexcept { return ok_inverse_; }

 private:
  Dimensions dims_;
  Matrix c_gamma_;
  Vector f_;
  Matrix ok_inverse_;
};

Vector reconstruct_state(const Scenario& sc, const FilterBank& fb, const ThetaVector& theta_hat);

struct TimeVaryingEstimates {
  Vector theta_tv;
  Vector B;
};

/// θ̂(t) = h_θ Φ_θ(t) x̂_θ0, B̂(t) = h_B Φ_B(t) x̂_B0.
TimeVaryingEstimates recover_tv_params(const Scenario& sc, const FilterBank& fb,
                                       const ThetaVector& theta_hat);

struct RhoReport {
  Vector Gamma_hat;
  std::optional<Vector> rho_hat;
  std::string notice;
};

/// Γ̂ = C_Γ η̂ always; ρ̂ from the scenario's declared read-out of η̂.
RhoReport recover_rho(const Scenario& sc, std::span<const double> eta_hat);

ObserverOutput observe(const StateReconstructor& rec, const Scenario& sc, const FilterBank& fb,
                       const ThetaVector& theta_hat);

}  // namespace gpebo
