#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gpebo/scenario_io.hpp"
#include "gpebo_cli/commands.hpp"
#include "gpebo_cli/csv.hpp"
#include "gpebo_cli/plot.hpp"
#include "gpebo_cli/sweep.hpp"

using namespace gpebo;
using namespace gpebo::cli;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gpebo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "gpebo");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, ExampleWritesLoadableScenario) {
  const fs::path p = dir_ / "ex.scn";
  ASSERT_EQ(run({"example", p.string()}), kOk) << err_.str();
  const Scenario sc = load_scenario(p);
  EXPECT_EQ(sc, make_example_scenario());
  EXPECT_EQ(sc.gains.f0, 1e-3);
  EXPECT_EQ(sc.gains.alpha, 100.0);
  EXPECT_EQ(sc.gains.gamma, 100.0);

  const fs::path slow = dir_ / "slow.scn";
  ASSERT_EQ(run({"example", "--slow-gains", slow.string()}), kOk);
  EXPECT_EQ(load_scenario(slow).gains.f0, 0.1);
  EXPECT_EQ(load_scenario(slow).gains.alpha, 1.0);
}

TEST_F(CliTest, SimulateZeroHorizonWritesInitialRowOnly) {
  const fs::path p = dir_ / "ex.scn";
  save_scenario(make_example_scenario(), p);
  ASSERT_EQ(run({"simulate", p.string(), "--t-final", "0"}), kOk) << err_.str();
  const CsvTable t = read_csv(dir_ / "ex.csv");
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][t.column("t")], 0.0);
  EXPECT_EQ(t.rows[0][t.column("Delta")], 0.0);
  EXPECT_NE(out_.str().find("time_to_param_err_0.1=not reached"), std::string::npos) << out_.str();
}

TEST_F(CliTest, SimulateCsvHeaderAndDeterminism) {
  const fs::path p = dir_ / "ex.scn";
  save_scenario(make_example_scenario(), p);
  const fs::path a = dir_ / "a.csv", b = dir_ / "b.csv";
  ASSERT_EQ(run({"simulate", p.string(), "--t-final", "2", "--noise-amplitude", "0.05", "--seed", "9",
                 "--out", a.string()}),
            kOk);
  ASSERT_EQ(run({"simulate", p.string(), "--t-final", "2", "--noise-amplitude", "0.05", "--seed", "9",
                 "--out", b.string()}),
            kOk);
  EXPECT_EQ(slurp(a), slurp(b));
  const CsvTable t = read_csv(a);
  const std::vector<std::string> head(t.header.begin(), t.header.begin() + 15);
  EXPECT_EQ(head, (std::vector<std::string>{"t", "u", "y", "x_1", "x_2", "xhat_1", "xhat_2",
                                            "thetahat_1", "thetahat_2", "thetahat_3", "thetahat_4",
                                            "thetahat_5", "param_err_norm", "state_err_norm",
                                            "Delta"}));
  EXPECT_EQ(t.rows.size(), 21u);
}

TEST_F(CliTest, OverridesDoNotTouchScenarioFile) {
  const fs::path p = dir_ / "ex.scn";
  save_scenario(make_example_scenario(), p);
  const std::string before = slurp(p);
  const fs::path rep = dir_ / "r.txt";
  ASSERT_EQ(run({"simulate", p.string(), "--t-final", "0.5", "--dt", "0.0005", "--report",
                 rep.string()}),
            kOk);
  EXPECT_EQ(slurp(p), before);
  const std::string report = slurp(rep);
  EXPECT_NE(report.find("config."), std::string::npos);
  EXPECT_NE(report.find("final_param_err_norm="), std::string::npos);
}

TEST_F(CliTest, VerifyRejectsUnstableObserverGain) {
  Scenario sc = make_example_scenario();
  sc.gains.K = {0.0, 0.0};
  const fs::path p = dir_ / "bad.scn";
  save_scenario(sc, p);
  EXPECT_EQ(run({"verify", p.string()}), kInvalidInput);
  EXPECT_NE(err_.str().find("gains.K"), std::string::npos) << err_.str();
}

TEST_F(CliTest, OverlappingSpectraRejected) {
  Scenario sc = make_example_scenario();
  sc.S = companion_first_col(sc.gains.K, 2);
  sc.C_Gamma = Matrix::identity(2);
  sc.eta = gamma_from_charpoly(char_poly(sc.S));
  sc.dims.n_Gamma = 2;
  sc.rho_readout.clear();
  const fs::path p = dir_ / "overlap.scn";
  save_scenario(sc, p);
  EXPECT_EQ(run({"simulate", p.string()}), kInvalidInput);
  EXPECT_NE(err_.str().find("spectra"), std::string::npos) << err_.str();
}

TEST_F(CliTest, MalformedScenarioReportsLine) {
  const fs::path p = dir_ / "broken.scn";
  std::ofstream(p) << "name = x\ndims.n = two\n";
  EXPECT_EQ(run({"simulate", p.string()}), kInvalidInput);
  EXPECT_NE(err_.str().find("line 2"), std::string::npos) << err_.str();
}

TEST_F(CliTest, PlotWritesThreeFigures) {
  const fs::path p = dir_ / "ex.scn";
  save_scenario(make_example_scenario(), p);
  ASSERT_EQ(run({"simulate", p.string(), "--t-final", "1"}), kOk);
  ASSERT_EQ(run({"plot", (dir_ / "ex.csv").string(), (dir_ / "figs").string()}), kOk) << err_.str();
  for (const char* name : {"param_error.svg", "state_error.svg", "delta.svg"}) {
    const std::string svg = slurp(dir_ / "figs" / name);
    EXPECT_NE(svg.find("<svg"), std::string::npos) << name;
    EXPECT_NE(svg.find("</svg>"), std::string::npos) << name;
  }
}

TEST_F(CliTest, PlotRejectsEmptyCsv) {
  const fs::path c = dir_ / "empty.csv";
  std::ofstream(c) << "t,param_err_norm,state_err_norm,Delta\n";
  EXPECT_EQ(run({"plot", c.string(), dir_.string()}), kInvalidInput);
  EXPECT_NE(err_.str().find("no data rows"), std::string::npos) << err_.str();
}

TEST(Csv, MalformedRowNamesLine) {
  try {
    parse_csv("t,a\n0,1\n1,x\n");
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_csv("t,a\n0,1,2\n");
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_csv(""), CsvError);
}

TEST(Csv, ColumnLookup) {
  const CsvTable t = parse_csv("t,a\n0,1\n1,2.5\n");
  EXPECT_EQ(t.values("a"), (std::vector<double>{1.0, 2.5}));
  EXPECT_FALSE(t.has_column("b"));
  EXPECT_THROW(t.column("b"), CsvError);
}

TEST(Plot, LogAxisFootnoteForZeros) {
  PlotSpec spec{"err", "t", "e", true, {{"e", {0, 1, 2, 3}, {1.0, 0.0, 0.1, 0.0}}}};
  const RenderedPlot r = render_svg(spec);
  EXPECT_EQ(r.omitted, 2u);
  EXPECT_NE(r.svg.find("2 sample(s) at exactly zero omitted from the log axis"), std::string::npos);
  spec.log_y = false;
  const RenderedPlot lin = render_svg(spec);
  EXPECT_EQ(lin.omitted, 0u);
  EXPECT_EQ(lin.svg.find("omitted"), std::string::npos);
}

TEST(Sweep, ParseGrid) {
  const auto axes = parse_grid("alpha=1,10;f0=0.001");
  ASSERT_EQ(axes.size(), 2u);
  EXPECT_EQ(axes[0].key, "alpha");
  EXPECT_EQ(axes[0].values, (std::vector<double>{1.0, 10.0}));
  EXPECT_EQ(axes[1].values, (std::vector<double>{0.001}));
  EXPECT_THROW(parse_grid("beta=1"), std::invalid_argument);
  EXPECT_THROW(parse_grid("alpha="), std::invalid_argument);
  EXPECT_THROW(parse_grid("alpha=1,x"), std::invalid_argument);
  EXPECT_THROW(parse_grid(""), std::invalid_argument);
}

TEST(Sweep, CartesianProductOrder) {
  const auto pts = expand_grid(parse_grid("alpha=1,2;gamma=3,4,5"));
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(*pts[0].options.alpha, 1.0);
  EXPECT_EQ(*pts[0].options.gamma, 3.0);
  EXPECT_EQ(*pts[1].options.gamma, 4.0);
  EXPECT_EQ(*pts[5].options.alpha, 2.0);
  EXPECT_EQ(*pts[5].options.gamma, 5.0);
}

TEST(Sweep, ParallelMatchesSerial) {
  auto pts = expand_grid(parse_grid("alpha=10,100;t_final=1"));
  const auto serial = run_sweep(make_example_scenario(), pts, 1);
  const auto parallel = run_sweep(make_example_scenario(), pts, 2);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    ASSERT_TRUE(serial[i].report && parallel[i].report);
    EXPECT_EQ(serial[i].report->final_param_err, parallel[i].report->final_param_err);
  }
}
