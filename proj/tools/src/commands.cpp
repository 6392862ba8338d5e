#include "gpebo_cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <ostream>
#include <thread>

#include "gpebo/format.hpp"
#include "gpebo/scenario_io.hpp"
#include "gpebo/verify.hpp"
#include "gpebo_cli/csv.hpp"
#include "gpebo_cli/plot.hpp"
#include "gpebo_cli/sweep.hpp"

namespace gpebo::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  return f;
}

// Loads and validates, printing warnings.
Scenario load_valid(const fs::path& path, std::ostream& err) {
  Scenario sc = load_scenario(path);
  for (const auto& w : validate(sc)) err << "warning: " << w << '\n';
  return sc;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ScenarioError& ex) {
    err << "scenario error: " << ex.what() << '\n';
    return kInvalidInput;
  } catch (const CsvError& ex) {
    err << "csv error: " << ex.what() << '\n';
    return kInvalidInput;
  } catch (const BlowUpError& ex) {
    err << "blow-up: " << ex.what() << '\n';
    return kBlowUp;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kFailure;
  }
}

}  // namespace

int cmd_example(const fs::path& out_path, bool slow_gains, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    save_scenario(slow_gains ? make_slow_gains_scenario() : make_example_scenario(), out_path);
    out << "wrote " << out_path.string() << '\n';
    return kOk;
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_valid(args.scenario, err);
    const Run run = simulate(sc, args.options);
    const fs::path csv_path = args.csv.value_or(fs::path(args.scenario).replace_extension(".csv"));
    {
      auto f = open_out(csv_path);
      write_csv(run, f);
    }
    const RunReport rep = make_report(run);
    write_report(rep, out);
    out << "csv=" << csv_path.string() << '\n';
    if (args.report) {
      auto f = open_out(*args.report);
      write_report(rep, f);
    }
    return kOk;
  });
}

int cmd_verify(const fs::path& scenario, const std::optional<fs::path>& report, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_valid(scenario, err);
    const VerifyReport rep = run_verification(sc);
    print_table(rep, out);
    const fs::path path = report.value_or(fs::path(scenario).replace_extension(".verify.txt"));
    auto f = open_out(path);
    write_verify_report(rep, f);
    out << "report=" << path.string() << '\n';
    return rep.all_passed() ? kOk : kFailure;
  });
}

int cmd_plot(const fs::path& csv, const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const CsvTable table = read_csv(csv);
    for (const auto& p : write_run_plots(table, out_dir)) out << "wrote " << p.string() << '\n';
    return kOk;
  });
}

int cmd_sweep(const fs::path& scenario, const std::string& grid, std::size_t jobs,
              const std::optional<fs::path>& out_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Scenario sc = load_valid(scenario, err);
    const auto axes = parse_grid(grid);
    const auto results = run_sweep(sc, expand_grid(axes), jobs);
    std::ofstream file;
    if (out_path) file = open_out(*out_path);
    std::ostream& os = out_path ? static_cast<std::ostream&>(file) : out;
    for (const auto& a : axes) os << a.key << ',';
    os << "final_param_err_norm,final_state_err_norm,time_to_param_err_0.01,Delta_final,error\n";
    bool any_error = false;
    for (const auto& r : results) {
      for (const auto& [k, v] : r.point.settings) os << format_double(v) << ',';
      if (r.report) {
        const auto& t = r.report->time_to_threshold;
        const auto hit = std::find_if(t.begin(), t.end(), [](const auto& p) { return p.first == 1e-2; });
        os << format_double(r.report->final_param_err) << ','
           << format_double(r.report->final_state_err) << ','
           << (hit != t.end() && hit->second ? format_double(*hit->second) : "not reached") << ','
           << format_double(r.report->delta_final) << ",\n";
      } else {
        any_error = true;
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        os << ",,,," << msg << '\n';
      }
    }
    if (out_path) out << "wrote " << out_path->string() << '\n';
    return any_error ? kFailure : kOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive observer for uncertain LTV systems: simulate, verify, plot, sweep"};
  app.require_subcommand(1);

  std::string example_out;
  bool slow = false;
  auto* example = app.add_subcommand("example", "Write the built-in example scenario");
  example->add_option("out", example_out, "Output scenario path")->required();
  example->add_flag("--slow-gains", slow, "Use f0 = 0.1, alpha = 1");

  SimulateArgs sim;
  std::string sim_scenario, sim_out, sim_report;
  double t_final = 0, dt = 0, noise = 0;
  std::uint64_t seed = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run the closed loop and write a CSV");
  simulate_cmd->add_option("scenario", sim_scenario, "Scenario file")->required();
  auto* o_tf = simulate_cmd->add_option("--t-final", t_final, "Final time [s]");
  auto* o_dt = simulate_cmd->add_option("--dt", dt, "RK4 step [s]");
  auto* o_noise = simulate_cmd->add_option("--noise-amplitude", noise, "Output noise amplitude");
  auto* o_seed = simulate_cmd->add_option("--seed", seed, "Noise seed");
  auto* o_out = simulate_cmd->add_option("--out", sim_out, "CSV output path");
  auto* o_rep = simulate_cmd->add_option("--report", sim_report, "Write the run report here too");

  std::string verify_scenario, verify_report;
  auto* verify_cmd = app.add_subcommand("verify", "Run all numerical checks");
  verify_cmd->add_option("scenario", verify_scenario, "Scenario file")->required();
  auto* o_vrep = verify_cmd->add_option("--report", verify_report, "Key=value report path");

  std::string plot_csv, plot_dir;
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from a simulate CSV");
  plot_cmd->add_option("csv", plot_csv, "CSV from simulate")->required();
  plot_cmd->add_option("outdir", plot_dir, "Output directory")->required();

  std::string sweep_scenario, sweep_grid, sweep_out;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a grid of gain/noise overrides");
  sweep_cmd->add_option("scenario", sweep_scenario, "Scenario file")->required();
  sweep_cmd->add_option("--grid", sweep_grid, "e.g. \"alpha=1,10;f0=0.001,0.1\"")->required();
  sweep_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* o_sout = sweep_cmd->add_option("--out", sweep_out, "Results CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  if (*example) return cmd_example(example_out, slow, out, err);
  if (*simulate_cmd) {
    sim.scenario = sim_scenario;
    if (*o_tf) sim.options.t_final = t_final;
    if (*o_dt) sim.options.dt = dt;
    if (*o_noise) sim.options.noise_amplitude = noise;
    if (*o_seed) sim.options.seed = seed;
    if (*o_out) sim.csv = sim_out;
    if (*o_rep) sim.report = sim_report;
    return cmd_simulate(sim, out, err);
  }
  if (*verify_cmd) {
    return cmd_verify(verify_scenario,
                      *o_vrep ? std::optional<fs::path>(verify_report) : std::nullopt, out, err);
  }
  if (*plot_cmd) return cmd_plot(plot_csv, plot_dir, out, err);
  if (*sweep_cmd) {
    return cmd_sweep(sweep_scenario, sweep_grid, jobs,
                     *o_sout ? std::optional<fs::path>(sweep_out) : std::nullopt, out, err);
  }
  return kInvalidInput;
}

}  // namespace gpebo::cli
