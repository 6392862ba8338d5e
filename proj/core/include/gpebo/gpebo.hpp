#pragma once

#include "gpebo/scenario.hpp"
#include "gpebo/theta.hpp"

namespace gpebo {

/// Realizable filter states of the regression generator.
struct FilterBank {
  Matrix Phi_theta;  // n_θ×n_θ principal matrix solution
  Matrix Phi_B;      // n_B×n_B
  Vector z;          // n
  Matrix Omega;      // n×n_θ
  Matrix P;          // n×n_B
  Vector L;          // n_w
  Matrix Q;          // n_w×(n_θ+n_B)

  /// Φ = I, everything else zero.
  static FilterBank initial(const Dimensions& d);
  static FilterBank zeros(const Dimensions& d);

  bool operator==(const FilterBank&) const = default;
};

/// Measurable regression data at one instant:
///   Y = Ω_Lᵀθ + Ω_Nᵀ𝒦(θ) + ε(t)
struct RegressorSample {
  double t = 0.0;
  double Y = 0.0;
  Vector Omega_L;  // q
  Vector Omega_N;  // n_Γ·(n_θ+n_B), row-major over (k, j)

  /// The 1×p row (Ω_L ; Ω_N)ᵀ.
  Vector row() const { return concat({Omega_L, Omega_N}); }
};

struct Measurables {
  double zeta = 0.0;
  Vector phi;  // n_θ+n_B
};

/// Constant design matrices derived from the tuning gains.
struct LreDesign {
  Matrix A_K;
  Matrix A_f;

  static LreDesign from(const Scenario& sc);
};

/// ζ = y − z₁ and φ = (Ωᵀe₁ ; Pᵀe₁).
Measurables measurables(const FilterBank& fb, double y);

/// Filter dynamics driven by the measured output y and input u.
FilterBank filters_rhs(const Scenario& sc, const LreDesign& design, double t, const FilterBank& fb,
                       double y, double u);

/// Y = ζ + Lᵀf, Ω_L = (Qᵀf + φ ; C_ΓᵀL), Ω_N = vec(−C_ΓᵀQ).
RegressorSample regressor_sample(const Scenario& sc, const FilterBank& fb, const Measurables& m,
                                 double t = 0.0);

/// G(θ) = (θ ; 𝒦(θ)) with 𝒦_(k,j) = η_k · (x_θ0 ; x_B0)_j.
Vector g_map(const ThetaVector& theta);
Vector g_map(std::span<const double> theta_flat, const Dimensions& d);

/// Analytic p×q Jacobian of g_map.
Matrix g_jacobian(const ThetaVector& theta);

/// [I_q | 0_{q×(p−q)}]
Matrix selection_matrix(std::size_t q, std::size_t p);

/// ε(t) = Y − Ω_Lᵀθ − Ω_Nᵀ𝒦(θ): residual of the regression at a given θ.
double regression_residual(const RegressorSample& sample, const ThetaVector& theta);

}  // namespace gpebo
