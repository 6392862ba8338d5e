#include "gpebo/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "gpebo/format.hpp"
#include "gpebo/truth.hpp"

namespace gpebo {

Scenario apply_overrides(const Scenario& sc, const SimulationOptions& opt) {
  Scenario out = sc;
  if (opt.t_final) out.sim.t_final = *opt.t_final;
  if (opt.dt) out.sim.dt = *opt.dt;
  if (opt.record_stride) out.sim.record_stride = *opt.record_stride;
  if (opt.noise_amplitude) out.noise.amplitude = *opt.noise_amplitude;
  if (opt.seed) out.noise.seed = *opt.seed;
  if (opt.f0) out.gains.f0 = *opt.f0;
  if (opt.alpha) out.gains.alpha = *opt.alpha;
  if (opt.gamma) out.gains.gamma = *opt.gamma;
  return out;
}

std::shared_ptr<const StateLayout> closed_loop_layout(const Dimensions& d) {
  const std::size_t p = d.p();
  return std::make_shared<const StateLayout>(std::vector<std::pair<std::string, std::size_t>>{
      {"x", d.n},
      {"x_theta", d.n_theta},
      {"x_B", d.n_B},
      {"w", d.n_w},
      {"Phi_theta", d.n_theta * d.n_theta},
      {"Phi_B", d.n_B * d.n_B},
      {"z", d.n},
      {"Omega", d.n * d.n_theta},
      {"P", d.n * d.n_B},
      {"L", d.n_w},
      {"Q", d.n_w * d.m()},
      {"theta_g", p},
      {"F", p * p},
      {"theta_hat", d.q()},
  });
}

namespace {

// Segment views over a flat state; order matches closed_loop_layout.
struct Offsets {
  std::size_t x, x_theta, x_B, w, phi_theta, phi_b, z, omega, p, l, q, theta_g, f, theta_hat, end;

  explicit Offsets(const StateLayout& layout)
      : x(layout.segment("x").offset),
        x_theta(layout.segment("x_theta").offset),
        x_B(layout.segment("x_B").offset),
        w(layout.segment("w").offset),
        phi_theta(layout.segment("Phi_theta").offset),
        phi_b(layout.segment("Phi_B").offset),
        z(layout.segment("z").offset),
        omega(layout.segment("Omega").offset),
        p(layout.segment("P").offset),
        l(layout.segment("L").offset),
        q(layout.segment("Q").offset),
        theta_g(layout.segment("theta_g").offset),
        f(layout.segment("F").offset),
        theta_hat(layout.segment("theta_hat").offset),
        end(layout.size()) {}
};

Vector slice(std::span<const double> s, std::size_t offset, std::size_t length) {
  return Vector(s.begin() + static_cast<std::ptrdiff_t>(offset),
                s.begin() + static_cast<std::ptrdiff_t>(offset + length));
}

Matrix slice_matrix(std::span<const double> s, std::size_t offset, std::size_t rows,
                    std::size_t cols) {
  return Matrix(rows, cols, slice(s, offset, rows * cols));
}

void put(std::vector<double>& out, std::size_t offset, std::span<const double> v) {
  std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
}

}  // namespace

ClosedLoop::ClosedLoop(const Scenario& sc)
    : sc_(sc),
      layout_(closed_loop_layout(sc.dims)),
      design_(LreDesign::from(sc)),
      q_sel_(selection_matrix(sc.dims.q(), sc.dims.p())),
      theta_g0_(sc.theta_g0_or_default()) {}

TruthState ClosedLoop::unpack_truth(std::span<const double> s) const {
  const Offsets o(*layout_);
  const auto& d = sc_.dims;
  return {slice(s, o.x, d.n), slice(s, o.x_theta, d.n_theta), slice(s, o.x_B, d.n_B),
          slice(s, o.w, d.n_w)};
}

FilterBank ClosedLoop::unpack_filters(std::span<const double> s) const {
  const Offsets o(*layout_);
  const auto& d = sc_.dims;
  FilterBank fb;
  fb.Phi_theta = slice_matrix(s, o.phi_theta, d.n_theta, d.n_theta);
  fb.Phi_B = slice_matrix(s, o.phi_b, d.n_B, d.n_B);
  fb.z = slice(s, o.z, d.n);
  fb.Omega = slice_matrix(s, o.omega, d.n, d.n_theta);
  fb.P = slice_matrix(s, o.p, d.n, d.n_B);
  fb.L = slice(s, o.l, d.n_w);
  fb.Q = slice_matrix(s, o.q, d.n_w, d.m());
  return fb;
}

EstimatorState ClosedLoop::unpack_estimator(std::span<const double> s) const {
  const Offsets o(*layout_);
  const std::size_t p = sc_.dims.p();
  EstimatorState st;
  st.theta_g = slice(s, o.theta_g, p);
  st.F = slice_matrix(s, o.f, p, p);
  st.theta = slice(s, o.theta_hat, sc_.dims.q());
  return st;
}

CompositeState ClosedLoop::initial_state(const std::optional<FilterBank>& filter_initial) const {
  const Offsets o(*layout_);
  std::vector<double> v(layout_->size(), 0.0);
  put(v, o.x, sc_.initial.x);
  put(v, o.x_theta, sc_.initial.x_theta);
  put(v, o.x_B, sc_.initial.x_B);
  put(v, o.w, sc_.initial.w);
  const FilterBank fb = filter_initial.value_or(FilterBank::initial(sc_.dims));
  put(v, o.phi_theta, fb.Phi_theta.data());
  put(v, o.phi_b, fb.Phi_B.data());
  put(v, o.z, fb.z);
  put(v, o.omega, fb.Omega.data());
  put(v, o.p, fb.P.data());
  put(v, o.l, fb.L);
  put(v, o.q, fb.Q.data());
  const EstimatorState est =
      EstimatorState::initial(theta_g0_, sc_.theta0_or_default(), sc_.gains.f0);
  put(v, o.theta_g, est.theta_g);
  put(v, o.f, est.F.data());
  put(v, o.theta_hat, est.theta);
  return CompositeState(layout_, std::move(v), 0.0);
}

std::vector<double> ClosedLoop::operator()(double t, std::span<const double> state) const {
  const Offsets o(*layout_);
  const TruthState truth = unpack_truth(state);
  const FilterBank fb = unpack_filters(state);
  const EstimatorState est = unpack_estimator(state);

  const double u = sc_.input.at(t);
  const double y = measure(truth, held_noise_);

  const TruthState dtruth = truth_rhs(sc_, t, truth);
  const FilterBank dfb = filters_rhs(sc_, design_, t, fb, y, u);
  const RegressorSample reg = regressor_sample(sc_, fb, measurables(fb, y), t);
  const EstimatorGains gains{sc_.gains.alpha, sc_.gains.gamma, sc_.gains.f0};
  const EstimatorState dest = estimator_rhs(est, reg, gains, theta_g0_, q_sel_, sc_.dims);

  std::vector<double> out(o.end);
  put(out, o.x, dtruth.x);
  put(out, o.x_theta, dtruth.x_theta);
  put(out, o.x_B, dtruth.x_B);
  put(out, o.w, dtruth.w);
  put(out, o.phi_theta, dfb.Phi_theta.data());
  put(out, o.phi_b, dfb.Phi_B.data());
  put(out, o.z, dfb.z);
  put(out, o.omega, dfb.Omega.data());
  put(out, o.p, dfb.P.data());
  put(out, o.l, dfb.L);
  put(out, o.q, dfb.Q.data());
  put(out, o.theta_g, dest.theta_g);
  put(out, o.f, dest.F.data());
  put(out, o.theta_hat, dest.theta);
  return out;
}

Run simulate(const Scenario& scenario, const SimulationOptions& opt) {
  Run run;
  run.scenario = apply_overrides(scenario, opt);
  const Scenario& sc = run.scenario;
  validate(sc);

  const auto wall_start = std::chrono::steady_clock::now();
  ClosedLoop loop(sc);
  const StateReconstructor reconstructor(sc);
  const ThetaVector theta_true = sc.true_theta();
  const Vector theta_true_flat = theta_true.flat();
  const Vector theta_g0 = sc.theta_g0_or_default();

  IntegrationConfig cfg{sc.sim.dt, sc.sim.t_final, sc.sim.record_stride};
  cfg.validate();
  const std::size_t steps = cfg.step_count();

  // One noise value per step, held over the step; index `steps` is the
  // value reported with the final sample.
  std::vector<double> noise(steps + 1, 0.0);
  if (sc.noise.amplitude > 0.0) {
    MeasurementNoise gen(sc.noise.amplitude, sc.noise.seed);
    for (double& v : noise) {
      v = gen.next();
    }
  }

  const auto recorder = [&](std::size_t k, const CompositeState& s) {
    Sample smp;
    smp.t = s.time();
    smp.u = sc.input.at(smp.t);
    smp.noise = noise[k];
    smp.truth = loop.unpack_truth(s.values());
    smp.filters = loop.unpack_filters(s.values());
    smp.estimator = loop.unpack_estimator(s.values());
    smp.y = measure(smp.truth, smp.noise);
    smp.regressor = regressor_sample(sc, smp.filters, measurables(smp.filters, smp.y), smp.t);
    smp.Delta =
        drem_transform(smp.estimator.F, smp.estimator.theta_g, theta_g0, sc.gains.f0).Delta;
    const ThetaVector theta_hat = ThetaVector::from_flat(smp.estimator.theta, sc.dims.n_theta,
                                                         sc.dims.n_B, sc.dims.n_Gamma);
    smp.observer = observe(reconstructor, sc, smp.filters, theta_hat);
    smp.param_err_norm = norm2(sub(smp.estimator.theta, theta_true_flat));
    smp.state_err_norm = norm2(sub(smp.observer.x_hat, smp.truth.x));
    run.samples.push_back(std::move(smp));
  };
  const auto before_step = [&](std::size_t k, double) { loop.set_held_noise(noise[k]); };

  run.samples.reserve(steps / cfg.record_stride + 2);
  integrate(std::cref(loop), loop.initial_state(opt.filter_initial), cfg, recorder, before_step);
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return run;
}

std::optional<double> time_to_threshold(const Run& run, double threshold) {
  for (const auto& s : run.samples) {
    if (s.param_err_norm <= threshold) {
      return s.t;
    }
  }
  return std::nullopt;
}

RunReport make_report(const Run& run) {
  RunReport rep;
  const Scenario& sc = run.scenario;
  if (!run.samples.empty()) {
    const Sample& last = run.samples.back();
    rep.final_param_err = last.param_err_norm;
    rep.final_state_err = last.state_err_norm;
    rep.delta_final = last.Delta;
  }
  for (double thr : {1e-1, 1e-2, 1e-3}) {
    rep.time_to_threshold.emplace_back(thr, time_to_threshold(run, thr));
  }
  rep.wall_seconds = run.wall_seconds;
  rep.config = {
      {"scenario", sc.name},
      {"t_final", format_double(sc.sim.t_final)},
      {"dt", format_double(sc.sim.dt)},
      {"record_stride", std::to_string(sc.sim.record_stride)},
      {"gains.K", format_array(sc.gains.K)},
      {"gains.f", format_array(sc.gains.f)},
      {"gains.f0", format_double(sc.gains.f0)},
      {"gains.alpha", format_double(sc.gains.alpha)},
      {"gains.gamma", format_double(sc.gains.gamma)},
      {"noise.amplitude", format_double(sc.noise.amplitude)},
      {"noise.seed", std::to_string(sc.noise.seed)},
  };
  return rep;
}

void write_report(const RunReport& rep, std::ostream& os) {
  os << "final_param_err_norm=" << format_double(rep.final_param_err) << '\n';
  os << "final_state_err_norm=" << format_double(rep.final_state_err) << '\n';
  for (const auto& [thr, when] : rep.time_to_threshold) {
    os << "time_to_param_err_" << format_double(thr) << '='
       << (when ? format_double(*when) : std::string("not reached")) << '\n';
  }
  os << "Delta_final=" << format_double(rep.delta_final) << '\n';
  os << "wall_seconds=" << format_double(rep.wall_seconds) << '\n';
  for (const auto& [k, v] : rep.config) {
    os << "config." << k << '=' << v << '\n';
  }
}

std::vector<std::string> csv_header(const Scenario& sc) {
  const auto& d = sc.dims;
  std::vector<std::string> h = {"t", "u", "y"};
  for (std::size_t i = 1; i <= d.n; ++i) h.push_back("x_" + std::to_string(i));
  for (std::size_t i = 1; i <= d.n; ++i) h.push_back("xhat_" + std::to_string(i));
  for (std::size_t i = 1; i <= d.q(); ++i) h.push_back("thetahat_" + std::to_string(i));
  h.insert(h.end(), {"param_err_norm", "state_err_norm", "Delta"});
  for (std::size_t i = 1; i <= d.n; ++i) h.push_back("thetatvhat_" + std::to_string(i));
  for (std::size_t i = 1; i <= d.n; ++i) h.push_back("Bhat_" + std::to_string(i));
  for (std::size_t i = 1; i <= d.n_w; ++i) h.push_back("Gammahat_" + std::to_string(i));
  for (std::size_t i = 1; i <= sc.rho_readout.size(); ++i) h.push_back("rhohat_" + std::to_string(i));
  return h;
}

void write_csv(const Run& run, std::ostream& os) {
  const auto header = csv_header(run.scenario);
  for (std::size_t i = 0; i < header.size(); ++i) {
    os << (i ? "," : "") << header[i];
  }
  os << '\n';
  for (const auto& s : run.samples) {
    std::vector<double> row = {s.t, s.u, s.y};
    row.insert(row.end(), s.truth.x.begin(), s.truth.x.end());
    row.insert(row.end(), s.observer.x_hat.begin(), s.observer.x_hat.end());
    row.insert(row.end(), s.estimator.theta.begin(), s.estimator.theta.end());
    row.insert(row.end(), {s.param_err_norm, s.state_err_norm, s.Delta});
    row.insert(row.end(), s.observer.theta_tv_hat.begin(), s.observer.theta_tv_hat.end());
    row.insert(row.end(), s.observer.B_hat.begin(), s.observer.B_hat.end());
    row.insert(row.end(), s.observer.Gamma_hat.begin(), s.observer.Gamma_hat.end());
    if (s.observer.rho_hat) {
      row.insert(row.end(), s.observer.rho_hat->begin(), s.observer.rho_hat->end());
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << (i ? "," : "") << format_double(row[i]);
    }
    os << '\n';
  }
}

}  // namespace gpebo
