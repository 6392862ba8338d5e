#include "gpebo_cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <stdexcept>
#include <thread>

namespace gpebo::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {"alpha", "gamma", "f0",     "noise_amplitude",
                                                "seed",  "dt",    "t_final"};
  return keys;
}

void apply(SimulationOptions& opt, const std::string& key, double v) {
  if (key == "alpha") opt.alpha = v;
  else if (key == "gamma") opt.gamma = v;
  else if (key == "f0") opt.f0 = v;
  else if (key == "noise_amplitude") opt.noise_amplitude = v;
  else if (key == "seed") opt.seed = static_cast<std::uint64_t>(v);
  else if (key == "dt") opt.dt = v;
  else if (key == "t_final") opt.t_final = v;
}

}  // namespace

std::vector<GridAxis> parse_grid(std::string_view spec) {
  std::vector<GridAxis> axes;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t semi = spec.find(';', start);
    const std::string_view part =
        trim(spec.substr(start, semi == std::string_view::npos ? semi : semi - start));
    start = semi == std::string_view::npos ? spec.size() + 1 : semi + 1;
    if (part.empty()) continue;
    const std::size_t eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("grid axis '" + std::string(part) + "' lacks '='");
    }
    GridAxis axis{std::string(trim(part.substr(0, eq))), {}};
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), axis.key) == keys.end()) {
      throw std::invalid_argument("unknown grid key '" + axis.key + "'");
    }
    for (const auto& a : axes) {
      if (a.key == axis.key) throw std::invalid_argument("grid key '" + axis.key + "' repeated");
    }
    std::string_view list = part.substr(eq + 1);
    std::size_t p = 0;
    while (p <= list.size()) {
      const std::size_t comma = list.find(',', p);
      const std::string_view tok =
          trim(list.substr(p, comma == std::string_view::npos ? comma : comma - p));
      p = comma == std::string_view::npos ? list.size() + 1 : comma + 1;
      double v = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
        throw std::invalid_argument("grid value '" + std::string(tok) + "' for '" + axis.key +
                                    "' is not a number");
      }
      axis.values.push_back(v);
    }
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw std::invalid_argument("empty grid");
  return axes;
}

std::vector<SweepPoint> expand_grid(const std::vector<GridAxis>& axes) {
  std::vector<SweepPoint> points{SweepPoint{}};
  for (const auto& axis : axes) {
    std::vector<SweepPoint> next;
    next.reserve(points.size() * axis.values.size());
    for (const auto& base : points) {
      for (double v : axis.values) {
        SweepPoint pt = base;
        pt.settings.emplace_back(axis.key, v);
        apply(pt.options, axis.key, v);
        next.push_back(std::move(pt));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::vector<SweepResult> run_sweep(const Scenario& sc, const std::vector<SweepPoint>& points,
                                   std::size_t jobs) {
  std::vector<SweepResult> results(points.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      SweepResult& r = results[i];
      r.point = points[i];
      try {
        r.report = make_report(simulate(sc, points[i].options));
      } catch (const std::exception& ex) {
        r.error = ex.what();
      }
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(points.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace gpebo::cli
