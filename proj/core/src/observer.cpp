#include "gpebo/observer.hpp"

namespace gpebo {

Matrix ok_matrix(std::span<const double> k) {
  const std::size_t n = k.size();
  const Matrix a_k = companion_first_col(k, n);
  Matrix ok(n, n);
  Vector row = unit_vector(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      ok(i, j) = row[j];
    }
    row = vec_mat(row, a_k);
  }
  return ok;
}

Matrix unit_lower_inverse(const Matrix& l) {
  if (!l.is_square()) {
    throw DimensionError("unit_lower_inverse: matrix must be square");
  }
  const std::size_t n = l.rows();
  Matrix inv(n, n);
  // Solve L x = e_c column by column.
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        s -= l(i, j) * inv(j, c);
      }
      inv(i, c) = s;
    }
  }
  return inv;
}

Matrix m_gamma_matrix(std::span<const double> gamma_hat, std::span<const double> f, std::size_t n) {
  const std::size_t nw = gamma_hat.size();
  if (f.size() != nw) {
    throw DimensionError("m_gamma_matrix: Γ̂ and f lengths differ");
  }
  const Matrix a_gamma = companion_last_row(gamma_hat, nw);
  Matrix m(n, nw);
  Vector row = sub(gamma_hat, f);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < nw; ++j) {
      m(i, j) = row[j];
    }
    row = vec_mat(row, a_gamma);
  }
  return m;
}

StateReconstructor::StateReconstructor(const Scenario& sc)
    : dims_(sc.dims),
      c_gamma_(sc.C_Gamma),
      f_(sc.gains.f),
      ok_inverse_(unit_lower_inverse(ok_matrix(sc.gains.K))) {}

Vector StateReconstructor::reconstruct(const FilterBank& fb, const ThetaVector& theta_hat) const {
  const Vector gamma_hat = c_gamma_ * theta_hat.eta;
  const Matrix m_gamma = m_gamma_matrix(gamma_hat, f_, dims_.n);
  const Vector psi = sub(fb.L, fb.Q * theta_hat.initial_conditions());
  Vector x = add(fb.z, ok_inverse_ * (m_gamma * psi));
  x = add(x, fb.Omega * theta_hat.x_theta0);
  x = add(x, fb.P * theta_hat.x_B0);
  return x;
}

Vector StateReconstructor::reconstruct_folded(const FilterBank& fb,
                                              const ThetaVector& theta_hat) const {
  if (dims_.n_w != dims_.n) {
    throw DimensionError("reconstruct_folded: requires n_w == n");
  }
  const std::size_t n = dims_.n;
  Matrix folded = fb.Q;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dims_.n_theta; ++j) {
      folded(i, j) -= fb.Omega(i, j);
    }
    for (std::size_t j = 0; j < dims_.n_B; ++j) {
      folded(i, dims_.n_theta + j) -= fb.P(i, j);
    }
  }
  const Vector gamma_hat = c_gamma_ * theta_hat.eta;
  const Matrix m_gamma = m_gamma_matrix(gamma_hat, f_, n);
  const Vector inner = sub(fb.L, folded * theta_hat.initial_conditions());
  return add(fb.z, ok_inverse_ * (m_gamma * inner));
}

Vector reconstruct_state(const Scenario& sc, const FilterBank& fb, const ThetaVector& theta_hat) {
  return StateReconstructor(sc).reconstruct(fb, theta_hat);
}

TimeVaryingEstimates recover_tv_params(const Scenario& sc, const FilterBank& fb,
                                       const ThetaVector& theta_hat) {
  return {sc.h_theta * (fb.Phi_theta * theta_hat.x_theta0), sc.h_B * (fb.Phi_B * theta_hat.x_B0)};
}

RhoReport recover_rho(const Scenario& sc, std::span<const double> eta_hat) {
  RhoReport rep;
  rep.Gamma_hat = sc.C_Gamma * eta_hat;
  if (sc.rho_readout.empty()) {
    rep.notice = "no rho read-out declared; reporting Gamma_hat only";
    return rep;
  }
  Vector rho;
  for (std::size_t idx : sc.rho_readout) {
    rho.push_back(eta_hat[idx - 1]);
  }
  rep.rho_hat = std::move(rho);
  return rep;
}

ObserverOutput observe(const StateReconstructor& rec, const Scenario& sc, const FilterBank& fb,
                       const ThetaVector& theta_hat) {
  ObserverOutput out;
  out.x_hat = rec.reconstruct(fb, theta_hat);
  auto tv = recover_tv_params(sc, fb, theta_hat);
  out.theta_tv_hat = std::move(tv.theta_tv);
  out.B_hat = std::move(tv.B);
  auto rho = recover_rho(sc, theta_hat.eta);
  out.Gamma_hat = std::move(rho.Gamma_hat);
  out.rho_hat = std::move(rho.rho_hat);
  out.eta_hat = theta_hat.eta;
  return out;
}

}  // namespace gpebo
