#include "gpebo/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gpebo {

EstimatorState EstimatorState::initial(std::span<const double> theta_g0,
                                       std::span<const double> theta0, double f0) {
  EstimatorState st;
  st.theta_g.assign(theta_g0.begin(), theta_g0.end());
  st.F = Matrix::identity(theta_g0.size()) * (1.0 / f0);
  st.theta.assign(theta0.begin(), theta0.end());
  return st;
}

namespace {

Matrix identity_minus_scaled(const Matrix& F, double f0) {
  Matrix m = F * (-f0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    m(i, i) += 1.0;
  }
  return m;
}

// θ̂_g − f₀F θ_g0
Vector ls_offset(const Matrix& F, std::span<const double> theta_g, std::span<const double> theta_g0,
                 double f0) {
  return sub(theta_g, scale(F * theta_g0, f0));
}

}  // namespace

DremSample drem_transform(const Matrix& F, std::span<const double> theta_g,
                          std::span<const double> theta_g0, double f0) {
  const DetAdjugate da = det_adjugate(identity_minus_scaled(F, f0));
  DremSample out;
  out.Delta = da.determinant;
  out.Y = da.adjugate * ls_offset(F, theta_g, theta_g0, f0);
  return out;
}

EstimatorState estimator_rhs(const EstimatorState& st, const RegressorSample& sample,
                             const EstimatorGains& gains, std::span<const double> theta_g0,
                             const Matrix& q_sel, const Dimensions& dims) {
  const Vector omega = sample.row();
  const std::size_t p = omega.size();
  if (st.F.rows() != p || st.theta_g.size() != p) {
    throw DimensionError("estimator_rhs: regressor length " + std::to_string(p) +
                         " does not match estimator dimension " + std::to_string(st.theta_g.size()));
  }

  // F Ωᵀ; Ḟ = −α (FΩᵀ)(FΩᵀ)ᵀ, filled from the upper triangle so it is exactly symmetric.
  const Vector f_omega = st.F * omega;
  const double prediction_error = sample.Y - dot(omega, st.theta_g);

  EstimatorState d;
  d.theta_g = scale(f_omega, gains.alpha * prediction_error);
  d.F = Matrix(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      d.F(i, j) = d.F(j, i) = -gains.alpha * f_omega[i] * f_omega[j];
    }
  }

  const DremSample drem = drem_transform(st.F, st.theta_g, theta_g0, gains.f0);
  const Vector g_hat = g_map(st.theta, dims);
  Vector mixed(p);
  for (std::size_t i = 0; i < p; ++i) {
    mixed[i] = drem.Delta * (drem.Y[i] - drem.Delta * g_hat[i]);
  }
  d.theta = scale(q_sel * mixed, gains.gamma);

  if (!d.F.all_finite()) {
    throw NonFiniteError("estimator_rhs: non-finite F derivative");
  }
  for (double v : d.theta) {
    if (!std::isfinite(v)) {
      throw NonFiniteError("estimator_rhs: non-finite parameter derivative");
    }
  }
  return d;
}

ExtendedLreResidual extended_lre_residual(const Matrix& F, std::span<const double> theta_g,
                                          std::span<const double> theta_g0, double f0,
                                          const ThetaVector& theta_true) {
  const Matrix m = identity_minus_scaled(F, f0);
  const Vector g = g_map(theta_true);
  ExtendedLreResidual r;
  r.extended = sub(m * g, ls_offset(F, theta_g, theta_g0, f0));
  r.mixed = det_adjugate(m).adjugate * r.extended;
  return r;
}

ExcitationReport excitation_report(std::span<const double> times, std::span<const double> delta,
                                   const std::vector<Vector>& regressor_rows, double t_c) {
  if (times.size() != delta.size() || times.size() != regressor_rows.size()) {
    throw DimensionError("excitation_report: trajectories must share one time grid");
  }
  ExcitationReport rep;
  rep.t_c = t_c;
  if (times.empty()) {
    return rep;
  }
  rep.t0 = times.front();
  rep.delta_at_start = delta.front();
  const std::size_t p = regressor_rows.front().size();
  rep.gram = Matrix(p, p);

  // Trapezoidal ∫ΩᵀΩ over [t0, t0 + t_c].
  const double t_end = rep.t0 + t_c;
  for (std::size_t i = 0; i + 1 < times.size() && times[i] < t_end; ++i) {
    const double h = std::min(times[i + 1], t_end) - times[i];
    if (h <= 0.0) {
      continue;
    }
    const auto& a = regressor_rows[i];
    const auto& b = regressor_rows[i + 1];
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        rep.gram(r, c) += 0.5 * h * (a[r] * a[c] + b[r] * b[c]);
      }
    }
  }
  rep.gram_min_eigenvalue = min_eigenvalue_symmetric(rep.gram);
  rep.gram_gershgorin_bound = gershgorin_lower_bound(rep.gram);

  for (double threshold : {1e-8, 1e-6, 1e-4}) {
    std::optional<double> when;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (delta[i] > threshold) {
        when = times[i];
        break;
      }
    }
    rep.first_crossing.emplace_back(threshold, when);
  }

  rep.delta_min_after_tc = std::numeric_limits<double>::infinity();
  rep.delta_max_after_tc = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > rep.t0 + t_c) {
      rep.delta_min_after_tc = std::min(rep.delta_min_after_tc, delta[i]);
      rep.delta_max_after_tc = std::max(rep.delta_max_after_tc, delta[i]);
      any = true;
    }
  }
  if (!any) {
    rep.delta_min_after_tc = rep.delta_max_after_tc = 0.0;
  }
  return rep;
}

}  // namespace gpebo
