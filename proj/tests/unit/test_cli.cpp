#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "kbte/errors.hpp"
#include "kbte/snapshot.hpp"
#include "scenario.hpp"
#include "svg_plot.hpp"
#include "table.hpp"

using namespace kbte;
using namespace kbte::cli;

namespace {

const char* kSmall = R"(name: small
seed: 4
kernel:
  polar_order: 1
  azimuth_order: 4
grid:
  spatial_points: 4
  velocity_cutoff: 4.0
  velocity_points: 4
scheme:
  dt: 0.01
  t_end: 0.03
  output_every: 0.01
)";

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("kbte_cli_" + name);
  std::filesystem::remove_all(p);
  return p;
}

int run(const std::string& cmd, const Scenario& s, const std::filesystem::path& out) {
  RunOptions opt;
  opt.out = out;
  std::ostringstream log, err;
  return dispatch(cmd, s, opt, log, err);
}

}  // namespace

TEST(Scenario, EmptyFileGivesValidDefaults) {
  const Scenario s = parse_scenario("");
  EXPECT_EQ(s.domain.kind, DomainKind::Ball);
  EXPECT_EQ(s.potential.kind, PotentialKind::Zero);
  EXPECT_EQ(s.initial.kind, InitialKind::Equilibrium);
  EXPECT_DOUBLE_EQ(s.scheme.dt, 0.01);
  EXPECT_DOUBLE_EQ(s.beta, 6.0);
  EXPECT_EQ(s.hash, git_blob_hash(""));
}

TEST(Scenario, MissingPotentialMeansZero) {
  const Scenario s = parse_scenario("grid:\n  spatial_points: 6\n");
  EXPECT_EQ(s.potential.kind, PotentialKind::Zero);
  EXPECT_TRUE(s.make_space()->potential().is_zero());
}

TEST(Scenario, FullFileIsRead) {
  const Scenario s = parse_scenario(R"(seed: 9
potential: {kind: harmonic, kappa: 2.0}
initial: {kind: bump, amplitude: 5, center: [0.1, 0, 0], radius: 0.2}
scheme: {kind: linear, damping: rf, interpolation_order: 3}
cycles: {ks: [1, 2]}
sweep: {start: 2}
)");
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.scheme.seed, 9u);
  EXPECT_DOUBLE_EQ(s.potential.kappa, 2.0);
  EXPECT_EQ(s.initial.kind, InitialKind::Bump);
  EXPECT_DOUBLE_EQ(s.initial.center.x(), 0.1);
  EXPECT_EQ(s.scheme.damping, DampingMode::Rf);
  EXPECT_EQ(s.cycles.ks, (std::vector<int>{1, 2}));
  EXPECT_TRUE(s.sweep.enabled);
}

TEST(Scenario, BetaAtMostFiveIsRejected) {
  try {
    parse_scenario("weight:\n  beta: 4\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "beta must exceed 5");
  }
  EXPECT_THROW(parse_scenario("weight: {beta: 5}\n"), ValidationError);
}

TEST(Scenario, InvariantsAreChecked) {
  EXPECT_THROW(parse_scenario("kernel: {gamma: 1.5}\n"), ValidationError);
  EXPECT_THROW(parse_scenario("kernel: {gamma: -0.1}\n"), ValidationError);
  EXPECT_THROW(parse_scenario("scheme: {dt: 0}\n"), ValidationError);
  EXPECT_THROW(parse_scenario("scheme: {dt: -0.1}\n"), ValidationError);
  EXPECT_THROW(parse_scenario("grid: {velocity_points: 7}\n"), ValidationError);
  EXPECT_THROW(parse_scenario("scheme: {interpolation_order: 3}\n"), ValidationError);
}

TEST(Scenario, UnknownKeysReportLineAndKey) {
  try {
    parse_scenario("seed: 1\ngrid:\n  spatial_points: 4\n  spatial_pts: 4\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4);
    EXPECT_EQ(e.key(), "grid.spatial_pts");
  }
  EXPECT_THROW(parse_scenario("bogus: 1\n"), ParseError);
}

TEST(Scenario, MalformedValuesAreParseErrors) {
  EXPECT_THROW(parse_scenario("scheme: {dt: fast}\n"), ParseError);
  EXPECT_THROW(parse_scenario("initial: {center: [1, 2]}\n"), ParseError);
  EXPECT_THROW(parse_scenario("scheme: {damping: strong}\n"), ParseError);
  EXPECT_THROW(parse_scenario("grid: [1, 2]\n"), ParseError);
  EXPECT_THROW(parse_scenario("grid: {spatial_points: 4\n"), ParseError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.yaml"), IoError);
}

TEST(Table, CsvRoundTrip) {
  Table t;
  t.metadata = {{"seed", "3"}};
  t.columns = {"k", "value"};
  t.rows = {{1, 0.1}, {2, 1.0 / 3.0}};
  const auto back = Table::from_csv(t.to_csv());
  EXPECT_EQ(back.metadata.at("seed"), "3");
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.column("value")[1], 1.0 / 3.0);
  EXPECT_THROW(Table::from_csv("a,b\n1\n"), ParseError);
}

TEST(Svg, EmbedsProvenanceAndSeries) {
  PlotSpec spec{"title", "t", "y", true, "scenario_hash=abc seed=1"};
  const auto svg = render_svg(spec, {{"decay", {0, 1, 2}, {1, 0.1, 0.0}}});
  EXPECT_NE(svg.find("<!-- scenario_hash=abc seed=1 -->"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("decay"), std::string::npos);
}

TEST(Dispatch, ExitCodes) {
  EXPECT_EQ(exit_code_for(NonContractive("x")), 3);
  EXPECT_EQ(exit_code_for(ExitNotFound("x")), 3);
  EXPECT_EQ(exit_code_for(ValidationError("x")), 2);
  EXPECT_EQ(exit_code_for(ParseError("x")), 2);
  EXPECT_EQ(exit_code_for(IoError("x")), 1);
  const Scenario s = parse_scenario(kSmall);
  EXPECT_EQ(run("frobnicate", s, temp_dir("unknown")), 2);
  EXPECT_EQ(run("report", s, temp_dir("empty")), 1);
}

TEST(Dispatch, SimulateEquilibriumIsFlat) {
  const auto out = temp_dir("sim");
  const Scenario s = parse_scenario(kSmall);
  ASSERT_EQ(run("simulate", s, out), 0);
  const Table t = Table::from_csv(read_text(out / "simulate.csv"));
  EXPECT_EQ(t.metadata.at("scenario_hash"), s.hash);
  EXPECT_EQ(t.metadata.at("seed"), "4");
  const auto mass = t.column("mass");
  for (double m : mass) EXPECT_NEAR(m / mass.front(), 1.0, 1e-13);
  for (double e : t.column("entropy")) EXPECT_NEAR(e, 0.0, 1e-12);
  EXPECT_EQ(run("report", s, out), 0);
  EXPECT_TRUE(std::filesystem::exists(out / "report.json"));
  EXPECT_NE(read_text(out / "simulate_norms.svg").find(s.hash), std::string::npos);
  std::filesystem::remove_all(out);
}

TEST(Dispatch, SnapshotsEveryKthOutput) {
  const auto out = temp_dir("snap");
  const Scenario s = parse_scenario(kSmall);
  RunOptions opt;
  opt.out = out;
  opt.snapshot_every = 2;
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("simulate", s, opt, log, err), 0);
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(out / "snapshots")) {
    if (e.path().extension() == ".json") ++n;
  }
  EXPECT_EQ(n, 2);
  std::filesystem::remove_all(out);
}

TEST(Dispatch, PicardAboveThresholdExitsThree) {
  const auto out = temp_dir("picard");
  const Scenario s = parse_scenario(std::string(kSmall) +
                                    "initial: {kind: small_perturbation, amplitude: 1000}\n");
  RunOptions opt;
  opt.out = out;
  std::ostringstream log, err;
  EXPECT_EQ(dispatch("picard", s, opt, log, err), 3);
  EXPECT_NE(err.str().find("not contractive"), std::string::npos);
  std::filesystem::remove_all(out);
}

TEST(Dispatch, CyclesAreByteIdenticalAcrossRuns) {
  const Scenario s = parse_scenario("seed: 3\ncycles: {samples: 500, ks: [1, 3, 6]}\n");
  const auto a = temp_dir("cyc_a"), b = temp_dir("cyc_b");
  ASSERT_EQ(run("cycles", s, a), 0);
  ASSERT_EQ(run("cycles", s, b), 0);
  EXPECT_EQ(read_text(a / "cycles.csv"), read_text(b / "cycles.csv"));
  RunOptions opt;
  opt.out = b;
  opt.seed = 4;
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("cycles", s, opt, log, err), 0);
  EXPECT_NE(read_text(a / "cycles.csv"), read_text(b / "cycles.csv"));
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}
