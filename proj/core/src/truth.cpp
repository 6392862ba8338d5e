#include "gpebo/truth.hpp"

namespace gpebo {

Matrix shift_matrix(std::size_t n) {
  Matrix a(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    a(i, i + 1) = 1.0;
  }
  return a;
}

Vector theta_tv(const Scenario& sc, const TruthState& s) { return sc.h_theta * s.x_theta; }

Vector b_tv(const Scenario& sc, const TruthState& s) { return sc.h_B * s.x_B; }

double disturbance(const Scenario& sc, const TruthState& s) { return dot(sc.h_delta, s.w); }

TruthState truth_rhs(const Scenario& sc, double t, const TruthState& s) {
  const std::size_t n = sc.dims.n;
  const double u = sc.input.at(t);
  const Vector theta = theta_tv(sc, s);
  const Vector b = b_tv(sc, s);
  const double delta = disturbance(sc, s);

  TruthState ds;
  ds.x.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ds.x[i] = s.x[i + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    ds.x[i] += theta[i] * s.x[0] + b[i] * u;
  }
  ds.x[n - 1] += delta;

  ds.x_theta = sc.A_theta.at(t) * s.x_theta;
  ds.x_B = sc.A_B.at(t) * s.x_B;
  ds.w = sc.S * s.w;
  return ds;
}

MeasurementNoise::MeasurementNoise(double amplitude, std::uint64_t seed)
    : amplitude_(amplitude), engine_(seed) {}

double MeasurementNoise::next() {
  // Map the raw 64-bit draw to [−1, 1] explicitly so the sequence does not
  // depend on the standard library's distribution implementation.
  const std::uint64_t raw = engine_();
  const double unit = static_cast<double>(raw >> 11) * 0x1.0p-53;  // [0, 1)
  return amplitude_ * (2.0 * unit - 1.0);
}

double measure(const TruthState& s, double noise_sample) { return s.x.at(0) + noise_sample; }

}  // namespace gpebo
