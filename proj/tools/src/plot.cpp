#include "gpebo_cli/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gpebo/format.hpp"

namespace gpebo::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                               "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (span / step <= 6.0) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

RenderedPlot render_svg(const PlotSpec& spec) {
  RenderedPlot out;
  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      if (spec.log_y && y <= 0.0) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      const double yy = spec.log_y ? std::log10(y) : y;
      y_lo = std::min(y_lo, yy);
      y_hi = std::max(y_hi, yy);
    }
  }
  if (!std::isfinite(x_lo)) {
    x_lo = 0.0;
    x_hi = 1.0;
    y_lo = 0.0;
    y_hi = 1.0;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (spec.log_y) {
    y_lo = std::floor(y_lo);
    y_hi = std::max(std::ceil(y_hi), y_lo + 1.0);
  } else if (y_hi == y_lo) {
    y_lo -= 1.0;
    y_hi += 1.0;
  } else {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  const auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(spec.title) << "</text>\n";

  // Grid and ticks.
  for (double t : linear_ticks(x_lo, x_hi)) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(t))
       << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(kTop + ph + 16)
       << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  std::vector<double> yticks;
  if (spec.log_y) {
    const int decades = static_cast<int>(y_hi - y_lo);
    const int every = std::max(1, decades / 8);
    for (int d = static_cast<int>(y_lo); d <= static_cast<int>(y_hi); d += every) {
      yticks.push_back(d);
    }
  } else {
    yticks = linear_ticks(y_lo, y_hi);
  }
  for (double t : yticks) {
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(kLeft + pw)
       << "\" y2=\"" << num(py(t)) << "\" stroke=\"#e0e0e0\"/>\n";
    const std::string label = spec.log_y ? "1e" + std::to_string(static_cast<int>(t)) : tick_label(t);
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(t) + 4)
       << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kTop + ph + 36)
     << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    const auto flush = [&] {
      if (!pts.empty()) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\" points=\""
           << pts << "\"/>\n";
        pts.clear();
      }
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double y = s.y[i];
      if (!std::isfinite(y) || !std::isfinite(s.x[i])) {
        flush();
        continue;
      }
      if (spec.log_y) {
        if (y <= 0.0) {
          ++out.omitted;
          flush();
          continue;
        }
        y = std::log10(y);
      }
      pts += num(px(s.x[i])) + "," + num(py(y)) + " ";
    }
    flush();
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
       << num(kLeft + pw + 36) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(kLeft + pw + 42) << "\" y=\"" << num(ly) << "\">" << escape(s.label)
       << "</text>\n";
  }
  if (spec.log_y && out.omitted > 0) {
    os << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kHeight - 10) << "\" font-size=\"11\">"
       << out.omitted << " sample(s) at exactly zero omitted from the log axis</text>\n";
  }
  os << "</svg>\n";
  out.svg = os.str();
  return out;
}

namespace {

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name,
                                 const std::string& body) {
  const auto path = dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << body;
  return path;
}

}  // namespace

std::vector<std::filesystem::path> write_run_plots(const CsvTable& table,
                                                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto t = table.values("t");
  std::vector<std::filesystem::path> written;

  PlotSpec param{"Parameter estimation error", "t [s]", "|theta_hat - theta|", true,
                 {{"|theta error|", t, table.values("param_err_norm")}}};
  written.push_back(write_file(out_dir, "param_error.svg", render_svg(param).svg));

  PlotSpec state{"State observation error", "t [s]", "xhat_i - x_i", false, {}};
  for (std::size_t i = 1;; ++i) {
    const std::string xi = "x_" + std::to_string(i);
    const std::string hi = "xhat_" + std::to_string(i);
    if (!table.has_column(xi) || !table.has_column(hi)) break;
    const auto x = table.values(xi);
    const auto xh = table.values(hi);
    Series s{"x" + std::to_string(i) + " error", t, {}};
    for (std::size_t k = 0; k < x.size(); ++k) s.y.push_back(xh[k] - x[k]);
    state.series.push_back(std::move(s));
  }
  if (state.series.empty()) throw CsvError(0, "missing x_i/xhat_i columns");
  written.push_back(write_file(out_dir, "state_error.svg", render_svg(state).svg));

  PlotSpec delta{"DREM excitation Delta(t)", "t [s]", "Delta", false,
                 {{"Delta", t, table.values("Delta")}}};
  written.push_back(write_file(out_dir, "delta.svg", render_svg(delta).svg));
  return written;
}

}  // namespace gpebo::cli
