#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpebo/simulation.hpp"

namespace gpebo {

class InsufficientDataError : public std::runtime_error {
 public:
  InsufficientDataError() : std::runtime_error("insufficient data") {}
};

/// Least-squares line through (t, log|v|).
struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double max_abs_residual = 0.0;
  std::size_t samples = 0;
};

/// Samples with |v| < 1e−14 are skipped. Fewer than 10 usable samples in
/// [t_start, t_end] throws InsufficientDataError.
DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> v,
                               double t_start, double t_end);

/// Same fit, but the window ends at the first sample below `floor`: once a
/// decaying signal reaches rounding noise its log no longer carries a slope.
DecayFit fit_decay_above_floor(std::span<const double> t, std::span<const double> v,
                               double t_start, double t_end, double floor);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// ė = A_K e + e_n h_δᵀw beside ẇ = Sw; ε = e − Πw must decay no slower
/// than the dominant A_K mode (+0.1 margin).
struct SylvesterDecouplingResult {
  CheckResult check;
  Matrix Pi;
  double residual = 0.0;  // ‖ΠS − A_KΠ − e_n h_δᵀ‖_max
  std::vector<double> times;
  std::vector<double> eps_norm;
};
SylvesterDecouplingResult check_sylvester_decoupling(const Scenario& sc,
                                                     std::optional<Vector> e0 = {});

/// Filter cascade ẇ = Sw, ė = A_K e, ẋ = A_f x + e_{n_w}(Q_c w + M e).
struct Lemma2Config {
  Matrix Q_c;           // 1×n_w
  Matrix M;             // 1×n
  Vector x0;            // n_w
  Vector e0;            // n
  Vector w0;            // n_w
};
/// Q_c = e₁ᵀΠ with Π from the plant Sylvester equation, M = e₁ᵀ, x(0) = 0,
/// e(0) = (1, …, 1), w(0) from the scenario.
Lemma2Config default_lemma2_config(const Scenario& sc);

struct Lemma2Result {
  CheckResult check;
  std::vector<double> times;
  std::vector<double> eps_defect;   // fᵀx + u − Γᵀx
  std::vector<double> eps_formula;  // h_εᵀξ
  double max_disagreement = 0.0;
};
Lemma2Result check_lemma2(const Scenario& sc, const std::optional<Lemma2Config>& cfg = {});

/// ε(t) at θ_true along a recorded noise-free run.
struct RegressionCheck {
  CheckResult check;
  std::vector<double> times;
  std::vector<double> eps;
  std::optional<DecayFit> fit;
  double max_after_20 = 0.0;
};
RegressionCheck check_regression(const Run& run);

/// ‖x̂(θ_true) − x‖ along a recorded run.
struct StateFormulaCheck {
  CheckResult check;
  std::vector<double> times;
  std::vector<double> err;
  std::optional<DecayFit> fit;
};
StateFormulaCheck check_state_formula(const Run& run);

/// e := x − z − Ωx_θ0 − Px_B0 versus an independent integration of
/// ė = A_K e + e_n h_δᵀw, and Ψ̇ = A_fΨ + e_{n_w}(ζ − φᵀx₀) versus
/// L − Qx₀. Runs truth and filters only.
struct IdentityCheckOptions {
  double t_final = 20.0;
  double dt = 1e-3;
  std::optional<FilterBank> filter_initial;
};
CheckResult check_error_identity(const Scenario& sc, const IdentityCheckOptions& opt = {});
CheckResult check_psi_identity(const Scenario& sc, const IdentityCheckOptions& opt = {});

/// Q_sel∇G + ∇GᵀQ_selᵀ = 2I_q at random θ.
CheckResult check_monotonicity_margin(const Dimensions& d, std::size_t trials = 100,
                                      std::uint64_t seed = 7);

/// Random-matrix suites for det/adjugate/char-poly/Sylvester/companion/O_K.
std::vector<CheckResult> linalg_property_suite(std::uint64_t seed = 2024);

/// Estimator properties along a recorded run.
CheckResult check_delta_excitation(const Run& run);
CheckResult check_f_invariants(const Run& run);
CheckResult check_extended_lre(const Run& run);
CheckResult check_drem_consistency(const Run& run);
CheckResult check_lyapunov(const Run& run);
CheckResult check_closed_loop(const Run& run, double tol = 1e-3);

/// Everything above on a noise-free run of `sc`.
VerifyReport run_verification(const Scenario& sc);

void print_table(const VerifyReport& rep, std::ostream& os);
void write_verify_report(const VerifyReport& rep, std::ostream& os);

}  // namespace gpebo
