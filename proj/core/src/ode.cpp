#include "gpebo/ode.hpp"

#include <cmath>

namespace gpebo {

namespace {

void check_derivative(std::span<const double> dx, std::size_t expected, double t) {
  if (dx.size() != expected) {
    throw StructureError("rhs returned " + std::to_string(dx.size()) + " components, expected " +
                         std::to_string(expected));
  }
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (!std::isfinite(dx[i])) {
      throw BlowUpError(t, "non-finite derivative component " + std::to_string(i));
    }
  }
}

void check_state(std::span<const double> x, double t) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || std::abs(x[i]) > kBlowUpThreshold) {
      throw BlowUpError(t, "state component " + std::to_string(i) + " = " + std::to_string(x[i]) +
                               " exceeds blow-up threshold");
    }
  }
}

}  // namespace

BlowUpError::BlowUpError(double t, const std::string& what)
    : std::runtime_error("blow-up at t=" + std::to_string(t) + ": " + what), time_(t) {}

StateLayout::StateLayout(std::vector<std::pair<std::string, std::size_t>> segments) {
  segments_.reserve(segments.size());
  for (auto& [name, length] : segments) {
    for (const auto& s : segments_) {
      if (s.name == name) {
        throw StructureError("duplicate segment name '" + name + "'");
      }
    }
    segments_.push_back({std::move(name), size_, length});
    size_ += length;
  }
}

const Segment& StateLayout::segment(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) {
      return s;
    }
  }
  throw StructureError("unknown segment '" + name + "'");
}

CompositeState::CompositeState(std::shared_ptr<const StateLayout> layout, double t)
    : layout_(std::move(layout)), values_(layout_->size(), 0.0), t_(t) {}

CompositeState::CompositeState(std::shared_ptr<const StateLayout> layout, std::vector<double> values,
                               double t)
    : layout_(std::move(layout)), values_(std::move(values)), t_(t) {
  if (values_.size() != layout_->size()) {
    throw StructureError("state has " + std::to_string(values_.size()) +
                         " components but layout expects " + std::to_string(layout_->size()));
  }
}

std::span<double> CompositeState::segment(const std::string& name) {
  const auto& s = layout_->segment(name);
  return std::span<double>(values_).subspan(s.offset, s.length);
}

std::span<const double> CompositeState::segment(const std::string& name) const {
  const auto& s = layout_->segment(name);
  return std::span<const double>(values_).subspan(s.offset, s.length);
}

void IntegrationConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("integration step must be > 0");
  }
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_final must be >= 0");
  }
  if (record_stride == 0) {
    throw std::invalid_argument("record_stride must be positive");
  }
}

std::size_t IntegrationConfig::step_count() const {
  const double ratio = t_final / step;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

CompositeState rk4_step(const RightHandSide& rhs, const CompositeState& s, double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("rk4_step: h must be > 0");
  }
  const std::size_t n = s.values().size();
  const double t = s.time();
  const auto x = s.values();

  std::vector<double> stage(n);
  const auto k1 = rhs(t, x);
  check_derivative(k1, n, t);
  for (std::size_t i = 0; i < n; ++i) {
    stage[i] = x[i] + 0.5 * h * k1[i];
  }
  const auto k2 = rhs(t + 0.5 * h, stage);
  check_derivative(k2, n, t);
  for (std::size_t i = 0; i < n; ++i) {
    stage[i] = x[i] + 0.5 * h * k2[i];
  }
  const auto k3 = rhs(t + 0.5 * h, stage);
  check_derivative(k3, n, t);
  for (std::size_t i = 0; i < n; ++i) {
    stage[i] = x[i] + h * k3[i];
  }
  const auto k4 = rhs(t + h, stage);
  check_derivative(k4, n, t);

  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    next[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  check_state(next, t + h);
  return CompositeState(s.layout_ptr(), std::move(next), t + h);
}

CompositeState integrate(const RightHandSide& rhs, const CompositeState& s0,
                         const IntegrationConfig& cfg, const Recorder& recorder,
                         const StepHook& before_step) {
  cfg.validate();
  const std::size_t steps = cfg.step_count();
  const double t0 = s0.time();
  const double t_end = t0 + cfg.t_final;

  CompositeState s = s0;
  if (recorder) {
    recorder(0, s);
  }
  for (std::size_t k = 0; k < steps; ++k) {
    if (before_step) {
      before_step(k, s.time());
    }
    // Times come from the step index, not from accumulation.
    const double t_next = (k + 1 == steps) ? t_end : t0 + static_cast<double>(k + 1) * cfg.step;
    s = rk4_step(rhs, s, t_next - s.time());
    s.set_time(t_next);
    const std::size_t idx = k + 1;
    if (recorder && (idx % cfg.record_stride == 0 || idx == steps)) {
      recorder(idx, s);
    }
  }
  return s;
}

}  // namespace gpebo
