#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gpebo {

class StructureError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a derivative or state component is non-finite or exceeds the
/// blow-up threshold. Carries the simulation time of the offending step.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double t, const std::string& what);
  double time() const noexcept { return time_; }

 private:
  double time_;
};

inline constexpr double kBlowUpThreshold = 1e12;

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Immutable named layout of a flat state vector.
class StateLayout {
 public:
  explicit StateLayout(std::vector<std::pair<std::string, std::size_t>> segments);

  std::size_t size() const noexcept { return size_; }
  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const Segment& segment(const std::string& name) const;

 private:
  std::vector<Segment> segments_;
  std::size_t size_ = 0;
};

/// Flat real vector plus time, partitioned by a shared immutable layout.
class CompositeState {
 public:
  CompositeState(std::shared_ptr<const StateLayout> layout, double t = 0.0);
  CompositeState(std::shared_ptr<const StateLayout> layout, std::vector<double> values, double t);

  double time() const noexcept { return t_; }
  void set_time(double t) noexcept { t_ = t; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<double> segment(const std::string& name);
  std::span<const double> segment(const std::string& name) const;

  const StateLayout& layout() const noexcept { return *layout_; }
  const std::shared_ptr<const StateLayout>& layout_ptr() const noexcept { return layout_; }

 private:
  std::shared_ptr<const StateLayout> layout_;
  std::vector<double> values_;
  double t_ = 0.0;
};

struct IntegrationConfig {
  double step = 1e-3;
  double t_final = 0.0;
  std::size_t record_stride = 1;

  void validate() const;
  /// ⌈t_final / step⌉, robust to the rounding of t_final/step.
  std::size_t step_count() const;
};

/// Derivative of the flat state at time t. Must return a vector of the same
/// length as its input.
using RightHandSide = std::function<std::vector<double>(double t, std::span<const double> state)>;
using Recorder = std::function<void(std::size_t step_index, const CompositeState& state)>;
/// Called before step `step_index` begins at time t (e.g. to hold a sample).
using StepHook = std::function<void(std::size_t step_index, double t)>;

/// One classical Runge–Kutta step of size h.
CompositeState rk4_step(const RightHandSide& rhs, const CompositeState& s, double h);

/// Fixed-step RK4 over [s0.time(), s0.time() + cfg.t_final]. The final step is
/// shortened so the run ends exactly at t_final. The recorder sees step 0,
/// every record_stride-th step, and the final step.
CompositeState integrate(const RightHandSide& rhs, const CompositeState& s0,
                         const IntegrationConfig& cfg, const Recorder& recorder,
                         const StepHook& before_step = {});

}  // namespace gpebo
