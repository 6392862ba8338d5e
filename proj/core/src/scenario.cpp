#include "gpebo/scenario.hpp"

#include <cmath>

namespace gpebo {

double SinusoidEntry::at(double t) const {
  if (amplitude == 0.0) {
    return offset;
  }
  return offset + amplitude * std::sin(omega * t + phase);
}

TimeVaryingMatrix::TimeVaryingMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

TimeVaryingMatrix TimeVaryingMatrix::constant(const Matrix& m) {
  TimeVaryingMatrix tv(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      tv.entry(i, j).offset = m(i, j);
    }
  }
  return tv;
}

Matrix TimeVaryingMatrix::at(double t) const {
  Matrix m(rows_, cols_);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    m.data()[k] = entries_[k].at(t);
  }
  return m;
}

bool TimeVaryingMatrix::is_constant() const {
  for (const auto& e : entries_) {
    if (e.amplitude != 0.0) {
      return false;
    }
  }
  return true;
}

double InputSignal::at(double t) const {
  double u = constant;
  for (const auto& term : terms) {
    u += term.amplitude * std::sin(term.omega * t + term.phase);
  }
  return u;
}

ThetaVector Scenario::true_theta() const {
  return ThetaVector{initial.x_theta, initial.x_B, eta};
}

Vector Scenario::theta_g0_or_default() const {
  return theta_g0.value_or(Vector(dims.p(), 0.0));
}

Vector Scenario::theta0_or_default() const {
  return theta0.value_or(Vector(dims.q(), 0.0));
}

Scenario make_example_scenario() {
  Scenario sc;
  sc.name = "example";
  sc.dims = {.n = 2, .n_theta = 2, .n_B = 2, .n_w = 2, .n_Gamma = 1};

  sc.A_theta = TimeVaryingMatrix::constant(Matrix{{-0.001, 0.0}, {0.0, -0.002}});
  sc.h_theta = Matrix::identity(2);

  sc.A_B = TimeVaryingMatrix(2, 2);
  sc.A_B.entry(0, 1).offset = 1.0;
  sc.A_B.entry(1, 0) = {.offset = -1.0, .amplitude = 0.1, .omega = 1.0, .phase = 0.0};
  sc.h_B = Matrix::identity(2);

  const double rho = -1.0;
  sc.S = Matrix{{0.0, 1.0}, {rho, 0.0}};
  sc.h_delta = {1.0, 0.0};
  // Char poly of S is λ² − ρ, so Γ = ρ·e₁.
  sc.C_Gamma = Matrix{{1.0}, {0.0}};
  sc.eta = {rho};
  sc.rho_readout = {1};

  sc.initial.x = {0.0, 0.0};
  sc.initial.x_theta = {-2.0, -1.0};
  sc.initial.x_B = {0.7, 0.2};
  sc.initial.w = {-10.0, 1.0};

  sc.input.constant = 10.0;
  sc.input.terms = {{.amplitude = 1.0, .omega = 0.5, .phase = 0.0}};

  sc.gains.K = {7.5, 25.0};
  sc.gains.f = {-1.0, -2.0};
  sc.gains.f0 = 0.001;
  sc.gains.alpha = 100.0;
  sc.gains.gamma = 100.0;
  return sc;
}

Scenario make_slow_gains_scenario() {
  Scenario sc = make_example_scenario();
  sc.name = "example-slow-gains";
  sc.gains.f0 = 0.1;
  sc.gains.alpha = 1.0;
  return sc;
}

namespace {

void expect_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& field) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ScenarioError(field, "expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                                   ", got " + std::to_string(m.rows()) + "x" +
                                   std::to_string(m.cols()));
  }
  if (!m.all_finite()) {
    throw ScenarioError(field, "non-finite entry");
  }
}

void expect_shape(const TimeVaryingMatrix& m, std::size_t n, const std::string& field) {
  if (m.rows() != n || m.cols() != n) {
    throw ScenarioError(field, "expected " + std::to_string(n) + "x" + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& e = m.entry(i, j);
      if (!std::isfinite(e.offset) || !std::isfinite(e.amplitude) || !std::isfinite(e.omega) ||
          !std::isfinite(e.phase)) {
        throw ScenarioError(field, "non-finite entry");
      }
    }
  }
}

void expect_length(std::span<const double> v, std::size_t n, const std::string& field) {
  if (v.size() != n) {
    throw ScenarioError(field, "expected length " + std::to_string(n) + ", got " +
                                   std::to_string(v.size()));
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw ScenarioError(field, "non-finite entry");
    }
  }
}

void expect_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ScenarioError(field, "must be a finite positive number");
  }
}

bool hurwitz_or_throw(const Matrix& m, const std::string& field, const std::string& what) {
  try {
    return is_hurwitz(m);
  } catch (const InconclusiveError& e) {
    throw ScenarioError(field, what + " Hurwitz test inconclusive: " + e.what());
  }
}

}  // namespace

std::vector<std::string> validate(const Scenario& sc) {
  std::vector<std::string> warnings;
  const auto& d = sc.dims;
  if (d.n == 0) throw ScenarioError("dims.n", "must be positive");
  if (d.n_theta == 0) throw ScenarioError("dims.n_theta", "must be positive");
  if (d.n_B == 0) throw ScenarioError("dims.n_B", "must be positive");
  if (d.n_w == 0) throw ScenarioError("dims.n_w", "must be positive");
  if (d.n_Gamma == 0) throw ScenarioError("dims.n_Gamma", "must be positive");

  expect_shape(sc.A_theta, d.n_theta, "A_theta");
  expect_shape(sc.A_B, d.n_B, "A_B");
  expect_shape(sc.h_theta, d.n, d.n_theta, "h_theta");
  expect_shape(sc.h_B, d.n, d.n_B, "h_B");
  expect_shape(sc.S, d.n_w, d.n_w, "S");
  expect_length(sc.h_delta, d.n_w, "h_delta");
  expect_shape(sc.C_Gamma, d.n_w, d.n_Gamma, "C_Gamma");
  expect_length(sc.eta, d.n_Gamma, "eta");
  for (std::size_t idx : sc.rho_readout) {
    if (idx == 0 || idx > d.n_Gamma) {
      throw ScenarioError("rho.readout", "index " + std::to_string(idx) + " outside 1.." +
                                             std::to_string(d.n_Gamma));
    }
  }

  expect_length(sc.initial.x, d.n, "initial.x");
  expect_length(sc.initial.x_theta, d.n_theta, "initial.x_theta");
  expect_length(sc.initial.x_B, d.n_B, "initial.x_B");
  expect_length(sc.initial.w, d.n_w, "initial.w");

  if (!std::isfinite(sc.input.constant)) throw ScenarioError("input.constant", "non-finite");
  for (const auto& term : sc.input.terms) {
    if (!std::isfinite(term.amplitude) || !std::isfinite(term.omega) || !std::isfinite(term.phase)) {
      throw ScenarioError("input.sine", "non-finite term");
    }
  }

  expect_length(sc.gains.K, d.n, "gains.K");
  expect_length(sc.gains.f, d.n_w, "gains.f");
  expect_positive(sc.gains.f0, "gains.f0");
  expect_positive(sc.gains.alpha, "gains.alpha");
  expect_positive(sc.gains.gamma, "gains.gamma");

  if (!(sc.noise.amplitude >= 0.0) || !std::isfinite(sc.noise.amplitude)) {
    throw ScenarioError("noise.amplitude", "must be >= 0");
  }
  if (sc.theta_g0) expect_length(*sc.theta_g0, d.p(), "estimator.theta_g0");
  if (sc.theta0) expect_length(*sc.theta0, d.q(), "estimator.theta0");

  if (!(sc.sim.dt > 0.0)) throw ScenarioError("sim.dt", "must be > 0");
  if (!(sc.sim.t_final >= 0.0)) throw ScenarioError("sim.t_final", "must be >= 0");
  if (sc.sim.record_stride == 0) throw ScenarioError("sim.record_stride", "must be positive");
  if (!(sc.verify.window_end > sc.verify.window_start)) {
    throw ScenarioError("verify.window", "end must exceed start");
  }

  const Matrix a_k = companion_first_col(sc.gains.K, d.n);
  if (!hurwitz_or_throw(a_k, "gains.K", "A_K")) {
    throw ScenarioError("gains.K", "A_K = A - K e1^T is not Hurwitz");
  }
  const Matrix a_f = companion_last_row(sc.gains.f, d.n_w);
  if (!hurwitz_or_throw(a_f, "gains.f", "A_f")) {
    throw ScenarioError("gains.f", "A_f is not Hurwitz");
  }

  const Vector gamma = gamma_from_charpoly(char_poly(sc.S));
  const Vector declared = sc.C_Gamma * std::span<const double>(sc.eta);
  const double mismatch = max_abs(sub(gamma, declared));
  if (mismatch > 1e-9 * (1.0 + max_abs(gamma))) {
    throw ScenarioError("C_Gamma", "C_Gamma*eta does not match the characteristic polynomial of S "
                                   "(max deviation " + std::to_string(mismatch) + ")");
  }

  const Vector e_n = unit_vector(d.n, d.n - 1);
  const Matrix c_k = Matrix::column(e_n) * Matrix(1, d.n_w, sc.h_delta);
  try {
    (void)solve_sylvester(a_k, sc.S, c_k);
  } catch (const SpectraNotDisjointError& e) {
    throw ScenarioError("S", std::string("spectra of A_K and S not disjoint: ") + e.what());
  }
  const Vector e_nw = unit_vector(d.n_w, d.n_w - 1);
  const Matrix c_f = Matrix::column(e_nw) * Matrix(1, d.n_w, Vector(d.n_w, 1.0));
  try {
    (void)solve_sylvester(a_f, sc.S, c_f);
  } catch (const SpectraNotDisjointError& e) {
    throw ScenarioError("gains.f", std::string("spectra of A_f and S not disjoint: ") + e.what());
  }

  // The exosystem is expected to have no strictly stable modes.
  Matrix minus_s = sc.S * -1.0;
  if (spectral_abscissa(minus_s) > 1e-6) {
    warnings.push_back("S has an eigenvalue with negative real part");
  }
  if (d.p() > 20) {
    warnings.push_back("extended parameter dimension p=" + std::to_string(d.p()) +
                       " exceeds 20; adjugate cost grows as p^4");
  }
  return warnings;
}

}  // namespace gpebo
