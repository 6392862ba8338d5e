#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gpebo/estimator.hpp"
#include "gpebo/gpebo.hpp"
#include "gpebo/observer.hpp"
#include "gpebo/ode.hpp"
#include "gpebo/scenario.hpp"

namespace gpebo {

/// Per-run overrides applied on top of a scenario (never written back).
struct SimulationOptions {
  std::optional<double> t_final;
  std::optional<double> dt;
  std::optional<std::size_t> record_stride;
  std::optional<double> noise_amplitude;
  std::optional<std::uint64_t> seed;
  std::optional<double> f0;
  std::optional<double> alpha;
  std::optional<double> gamma;
  /// Non-default filter initial conditions (theory allows any).
  std::optional<FilterBank> filter_initial;
};

Scenario apply_overrides(const Scenario& sc, const SimulationOptions& opt);

/// Everything recorded at one output instant.
struct Sample {
  double t = 0.0;
  double u = 0.0;
  double y = 0.0;
  double noise = 0.0;
  TruthState truth;
  FilterBank filters;
  EstimatorState estimator;
  RegressorSample regressor;
  double Delta = 0.0;
  ObserverOutput observer;
  double param_err_norm = 0.0;
  double state_err_norm = 0.0;
};

struct Run {
  Scenario scenario;  // effective scenario after overrides
  std::vector<Sample> samples;
  double wall_seconds = 0.0;
};

/// Layout of the single composite state: truth, filters, estimator.
std::shared_ptr<const StateLayout> closed_loop_layout(const Dimensions& d);

/// Right-hand side of truth ⊕ filters ⊕ estimator. `held_noise` is read on
/// every evaluation (sample-and-hold across the RK4 stages of one step).
class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& sc);

  std::vector<double> operator()(double t, std::span<const double> state) const;

  CompositeState initial_state(const std::optional<FilterBank>& filter_initial = {}) const;

  void set_held_noise(double v) noexcept { held_noise_ = v; }

  TruthState unpack_truth(std::span<const double> s) const;
  FilterBank unpack_filters(std::span<const double> s) const;
  EstimatorState unpack_estimator(std::span<const double> s) const;

  const Scenario& scenario() const noexcept { return sc_; }
  const std::shared_ptr<const StateLayout>& layout() const noexcept { return layout_; }
  const LreDesign& design() const noexcept { return design_; }

 private:
  Scenario sc_;
  std::shared_ptr<const StateLayout> layout_;
  LreDesign design_;
  Matrix q_sel_;
  Vector theta_g0_;
  double held_noise_ = 0.0;
};

/// Validates the scenario, then integrates the closed loop over [0, t_final].
/// Throws ScenarioError on validation failure and BlowUpError on blow-up.
Run simulate(const Scenario& sc, const SimulationOptions& opt = {});

struct RunReport {
  double final_param_err = 0.0;
  double final_state_err = 0.0;
  std::vector<std::pair<double, std::optional<double>>> time_to_threshold;
  double delta_final = 0.0;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> config;
};

RunReport make_report(const Run& run);

/// First recorded time at which ‖θ̃‖ ≤ threshold.
std::optional<double> time_to_threshold(const Run& run, double threshold);

/// Flat key=value text.
void write_report(const RunReport& rep, std::ostream& os);

/// Header: t,u,y,x_i,xhat_i,thetahat_k,param_err_norm,state_err_norm,Delta
/// followed by thetatvhat_i,Bhat_i,Gammahat_i and rhohat_k when declared.
std::vector<std::string> csv_header(const Scenario& sc);
void write_csv(const Run& run, std::ostream& os);

}  // namespace gpebo
