#include "gpebo/gpebo.hpp"

namespace gpebo {

FilterBank FilterBank::zeros(const Dimensions& d) {
  FilterBank fb;
  fb.Phi_theta = Matrix(d.n_theta, d.n_theta);
  fb.Phi_B = Matrix(d.n_B, d.n_B);
  fb.z.assign(d.n, 0.0);
  fb.Omega = Matrix(d.n, d.n_theta);
  fb.P = Matrix(d.n, d.n_B);
  fb.L.assign(d.n_w, 0.0);
  fb.Q = Matrix(d.n_w, d.m());
  return fb;
}

FilterBank FilterBank::initial(const Dimensions& d) {
  FilterBank fb = zeros(d);
  fb.Phi_theta = Matrix::identity(d.n_theta);
  fb.Phi_B = Matrix::identity(d.n_B);
  return fb;
}

LreDesign LreDesign::from(const Scenario& sc) {
  return {companion_first_col(sc.gains.K, sc.dims.n), companion_last_row(sc.gains.f, sc.dims.n_w)};
}

Measurables measurables(const FilterBank& fb, double y) {
  Measurables m;
  m.zeta = y - fb.z.at(0);
  m.phi = concat({fb.Omega.row(0), fb.P.row(0)});
  return m;
}

FilterBank filters_rhs(const Scenario& sc, const LreDesign& design, double t, const FilterBank& fb,
                       double y, double u) {
  const auto& d = sc.dims;
  const Measurables meas = measurables(fb, y);

  FilterBank dfb;
  dfb.Phi_theta = sc.A_theta.at(t) * fb.Phi_theta;
  dfb.Phi_B = sc.A_B.at(t) * fb.Phi_B;

  dfb.z = add(design.A_K * fb.z, scale(sc.gains.K, y));
  dfb.Omega = design.A_K * fb.Omega + (sc.h_theta * fb.Phi_theta) * y;
  dfb.P = design.A_K * fb.P + (sc.h_B * fb.Phi_B) * u;

  dfb.L = design.A_f * fb.L;
  dfb.L[d.n_w - 1] += meas.zeta;
  dfb.Q = design.A_f * fb.Q;
  for (std::size_t j = 0; j < d.m(); ++j) {
    dfb.Q(d.n_w - 1, j) += meas.phi[j];
  }
  return dfb;
}

RegressorSample regressor_sample(const Scenario& sc, const FilterBank& fb, const Measurables& m,
                                 double t) {
  const auto& d = sc.dims;
  RegressorSample r;
  r.t = t;
  r.Y = m.zeta + dot(fb.L, sc.gains.f);

  const Vector qtf = vec_mat(sc.gains.f, fb.Q);  // Qᵀf
  const Vector ctl = vec_mat(fb.L, sc.C_Gamma);  // C_ΓᵀL
  r.Omega_L = concat({add(qtf, m.phi), ctl});

  const Matrix ctq = sc.C_Gamma.transpose() * fb.Q;  // n_Γ×m
  r.Omega_N.resize(d.n_Gamma * d.m());
  for (std::size_t k = 0; k < d.n_Gamma; ++k) {
    for (std::size_t j = 0; j < d.m(); ++j) {
      r.Omega_N[k * d.m() + j] = -ctq(k, j);
    }
  }
  return r;
}

Vector g_map(const ThetaVector& theta) {
  const Vector x0 = theta.initial_conditions();
  Vector g = theta.flat();
  g.reserve(g.size() + theta.eta.size() * x0.size());
  for (double eta_k : theta.eta) {
    for (double x0_j : x0) {
      g.push_back(eta_k * x0_j);
    }
  }
  return g;
}

Vector g_map(std::span<const double> theta_flat, const Dimensions& d) {
  return g_map(ThetaVector::from_flat(theta_flat, d.n_theta, d.n_B, d.n_Gamma));
}

Matrix g_jacobian(const ThetaVector& theta) {
  const Vector x0 = theta.initial_conditions();
  const std::size_t m = x0.size();
  const std::size_t n_gamma = theta.eta.size();
  const std::size_t q = m + n_gamma;
  const std::size_t p = q + n_gamma * m;
  Matrix jac(p, q);
  for (std::size_t i = 0; i < q; ++i) {
    jac(i, i) = 1.0;
  }
  // ∂(η_k x0_j)/∂x0_j = η_k, ∂(η_k x0_j)/∂η_k = x0_j
  for (std::size_t k = 0; k < n_gamma; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t row = q + k * m + j;
      jac(row, j) = theta.eta[k];
      jac(row, m + k) = x0[j];
    }
  }
  return jac;
}

Matrix selection_matrix(std::size_t q, std::size_t p) {
  if (q > p) {
    throw DimensionError("selection_matrix: q=" + std::to_string(q) + " exceeds p=" +
                         std::to_string(p));
  }
  Matrix sel(q, p);
  for (std::size_t i = 0; i < q; ++i) {
    sel(i, i) = 1.0;
  }
  return sel;
}

double regression_residual(const RegressorSample& sample, const ThetaVector& theta) {
  const Vector g = g_map(theta);
  return sample.Y - dot(sample.row(), g);
}

}  // namespace gpebo
