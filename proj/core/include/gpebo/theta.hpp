#pragma once

#include <cstddef>
#include <span>

#include "gpebo/linalg.hpp"

namespace gpebo {

/// Constant unknowns of the regression: the initial conditions of the
/// parameter-generating subsystems and the exosystem coordinates η
/// (Γ = C_Γ η).
struct ThetaVector {
  Vector x_theta0;
  Vector x_B0;
  Vector eta;

  std::size_t size() const noexcept { return x_theta0.size() + x_B0.size() + eta.size(); }
  /// (x_θ0 ; x_B0), the vector multiplied by Q in the bilinear term.
  Vector initial_conditions() const { return concat({x_theta0, x_B0}); }
  Vector flat() const { return concat({x_theta0, x_B0, eta}); }

  static ThetaVector from_flat(std::span<const double> v, std::size_t n_theta, std::size_t n_B,
                               std::size_t n_Gamma);

  bool operator==(const ThetaVector&) const = default;
};

inline ThetaVector ThetaVector::from_flat(std::span<const double> v, std::size_t n_theta,
                                          std::size_t n_B, std::size_t n_Gamma) {
  if (v.size() != n_theta + n_B + n_Gamma) {
    throw DimensionError("ThetaVector: flat vector of length " + std::to_string(v.size()) +
                         ", expected " + std::to_string(n_theta + n_B + n_Gamma));
  }
  ThetaVector th;
  th.x_theta0.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n_theta));
  th.x_B0.assign(v.begin() + static_cast<std::ptrdiff_t>(n_theta),
                 v.begin() + static_cast<std::ptrdiff_t>(n_theta + n_B));
  th.eta.assign(v.begin() + static_cast<std::ptrdiff_t>(n_theta + n_B), v.end());
  return th;
}

}  // namespace gpebo
