#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bopb/experiment.hpp"
#include "oracles.hpp"

using namespace bopb;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& row) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : row) {
    if (c == '"') quoted = !quoted;
    else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::size_t column(const std::string& name) {
  const auto h = split(csv_header());
  return static_cast<std::size_t>(std::find(h.begin(), h.end(), name) - h.begin());
}

}  // namespace

TEST(Experiment, ReportSamplesExamples) {
  EXPECT_EQ(report_samples(10, 50, 10, 500), 10000u);
  EXPECT_EQ(report_samples(50, 80, 40, 500), 317300u);
  EXPECT_EQ(report_samples(1, 7, 3, 11), 7u * 3u + 11u);

  auto cfg = ExperimentConfig::from_json(R"({"basis":"mixed","N":64,"D":50,"d":50,"s":10,
    "m1_factor":8,"m2_factor":4,"trials":1})");
  const auto p = expand_points(cfg).front();
  EXPECT_EQ(report_samples(p), 317300u);
}

TEST(Experiment, ReportSamplesMatchesPlanGridSize) {
  for (std::size_t D : {1u, 2u, 5u, 10u}) {
    const auto assign = BasisAssignment::uniform(BasisKind::Fourier, D, 16, D);
    const auto plan = draw_plan(assign, singleton_partition(D), 6, 4, 30, 1);
    EXPECT_EQ(plan.grid_size(), report_samples(D, 6, 4, 30)) << D;
  }
}

TEST(Experiment, ConfigParsing) {
  const auto cfg = ExperimentConfig::from_json(R"({
    "mode": "sweep_m1",
    "basis": "C,L,F*4",
    "N": 32,
    "D": 6,
    "s": [3, 4],
    "m1_factors": [2, 2.5],
    "snr_db": "inf",
    "trials": 2
  })");
  EXPECT_EQ(cfg.mode, ExperimentMode::SweepM1);
  EXPECT_EQ(expand_points(cfg).size(), 4u);
  EXPECT_TRUE(std::isinf(cfg.snr_db));
  const auto p = expand_points(cfg)[1];
  EXPECT_EQ(p.m1, static_cast<std::size_t>(std::lround(2.5 * 3)));
  EXPECT_EQ(p.m_ce, 150u);
  const auto again = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(again.to_json(), cfg.to_json());
}

TEST(Experiment, ConfigErrorsCarryLineNumbers) {
  auto message = [](const std::string& text) -> std::string {
    try {
      (void)ExperimentConfig::from_json(text);
    } catch (const std::invalid_argument& e) {
      return e.what();
    }
    return "";
  };
  EXPECT_NE(message("{\n\"N\": 8,\n\"bogus\": 1\n}").find("line 3"), std::string::npos);
  EXPECT_NE(message("{\n\"N\": 8,\n\"trials\": \"x\"\n}").find("line 3"), std::string::npos);
  EXPECT_NE(message("{\n\"N\": 8,\n\"D\": [3,\n}").find("line"), std::string::npos);
  EXPECT_FALSE(message(R"({"basis":"Q*3","D":3})").empty());
  EXPECT_FALSE(message(R"({"trials":0})").empty());
  EXPECT_FALSE(message(R"({"basis":"F*3","D":4})").empty());
  EXPECT_FALSE(message(R"({"N":2,"D":2,"d":1,"s":4})").empty());
  EXPECT_FALSE(message(R"({"mode":"approx_sparse"})").empty());
  EXPECT_FALSE(message(R"({"mode":"approx_sparse","test_function":"periodic10","D":10,"basis":"chebyshev"})").empty());
  EXPECT_FALSE(message(R"({"s":1,"m2_factor":0.2})").empty());
  EXPECT_FALSE(message("[1,2]").empty());
}

TEST(Experiment, TrialSeeds) {
  EXPECT_EQ(trial_seed(5, 0), 5u);
  EXPECT_EQ(trial_seed(5, 1), 4u);
  EXPECT_EQ(trial_seed(5, 2), 7u);
}

TEST(Experiment, WilsonInterval) {
  auto [lo, hi] = wilson_interval(50, 50);
  EXPECT_NEAR(hi, 1.0, 1e-15);
  EXPECT_NEAR(lo, 0.92865, 1e-4);
  std::tie(lo, hi) = wilson_interval(0, 10);
  EXPECT_EQ(lo, 0.0);
  EXPECT_NEAR(hi, 0.27753, 1e-4);
  std::tie(lo, hi) = wilson_interval(21, 50);
  EXPECT_LT(lo, 0.42);
  EXPECT_GT(hi, 0.42);
}

TEST(Experiment, SingleTrialRunWritesOneRowAndManifest) {
  const auto dir = oracle::temp_dir("experiment_single");
  auto cfg = ExperimentConfig::from_json(R"({"N":16,"D":4,"s":1,"m1_factor":8,"m2_factor":4,"trials":1})");
  cfg.output = (dir / "out.csv").string();
  const auto summary = run(cfg);
  ASSERT_EQ(summary.points.size(), 1u);
  EXPECT_FALSE(summary.interrupted);
  const auto rows = lines(slurp(cfg.output));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], csv_header());
  const auto cells = split(rows[1]);
  ASSERT_EQ(cells.size(), split(csv_header()).size());
  EXPECT_EQ(cells[column("success_rate")], "1");
  EXPECT_EQ(cells[column("n_samples_total")], std::to_string(report_samples(4, 8, 4, 50)));

  const auto manifest = nlohmann::json::parse(slurp(cfg.output + ".manifest.json"));
  EXPECT_EQ(manifest["csv_version"].get<int>(), kCsvVersion);
  EXPECT_EQ(manifest["trial_seeds"].size(), 1u);
  EXPECT_EQ(manifest["config"]["N"].get<int>(), 16);
  EXPECT_FALSE(manifest["interrupted"].get<bool>());
}

TEST(Experiment, RerunFromManifestReproducesCsv) {
  const auto dir = oracle::temp_dir("experiment_rerun");
  auto cfg = ExperimentConfig::from_json(
      R"({"mode":"sweep_m1","basis":"F,C,L,F","N":12,"D":4,"s":3,"m1_factors":[1.5,3],"m2_factor":1,"snr_db":15,"trials":4,"seed":9})");
  cfg.output = (dir / "a.csv").string();
  run(cfg);
  const auto manifest = nlohmann::json::parse(slurp(cfg.output + ".manifest.json"));
  auto replay = ExperimentConfig::from_json(manifest["config"].dump());
  replay.output = (dir / "b.csv").string();
  run(replay);

  const auto a = lines(slurp(cfg.output)), b = lines(slurp(replay.output));
  ASSERT_EQ(a.size(), 3u);
  ASSERT_EQ(a.size(), b.size());
  const std::size_t wall = column("avg_runtime_s");
  for (std::size_t i = 1; i < a.size(); ++i) {
    auto ra = split(a[i]), rb = split(b[i]);
    ra[wall] = rb[wall] = "";
    EXPECT_EQ(ra, rb);
  }
}

TEST(Experiment, ThreadCountDoesNotChangeResults) {
  auto cfg = ExperimentConfig::from_json(R"({"N":16,"D":5,"s":3,"m1_factor":3,"snr_db":12,"trials":6,"seed":3})");
  const auto point = expand_points(cfg).front();
  std::vector<TrialOutcome> one, two;
  const auto s1 = run_point(cfg, point, nullptr, &one);
  cfg.threads = 2;
  const auto s2 = run_point(cfg, point, nullptr, &two);
  EXPECT_EQ(s1.successes, s2.successes);
  EXPECT_EQ(s1.avg_iterations, s2.avg_iterations);
  EXPECT_EQ(s1.rel_l2_error, s2.rel_l2_error);
  ASSERT_EQ(one.size(), two.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].result.coeffs, two[i].result.coeffs);
}

TEST(Experiment, StopFlagMarksIncomplete) {
  const auto dir = oracle::temp_dir("experiment_stop");
  auto cfg = ExperimentConfig::from_json(R"({"N":16,"D":4,"s":2,"trials":5})");
  cfg.output = (dir / "x.csv").string();
  std::atomic<bool> stop{true};
  const auto summary = run(cfg, &stop);
  EXPECT_TRUE(summary.interrupted);
  EXPECT_EQ(lines(slurp(cfg.output)).size(), 1u);
  const auto manifest = nlohmann::json::parse(slurp(cfg.output + ".manifest.json"));
  EXPECT_TRUE(manifest["interrupted"].get<bool>());

  const auto point = expand_points(cfg).front();
  const auto partial = run_point(cfg, point, &stop);
  EXPECT_FALSE(partial.complete);
  EXPECT_EQ(partial.trials, 0u);
}

TEST(Experiment, ApproxSparseTrial) {
  auto cfg = ExperimentConfig::from_json(
      R"({"mode":"approx_sparse","test_function":"chebleg7","N":16,"D":7,"s":5,"m1_factor":4,"m2_factor":2,"trials":1})");
  const auto point = expand_points(cfg).front();
  const auto tf = TestFunction::make("chebleg7", make_assignment(cfg, 7, 7));
  const auto out = run_trial(cfg, point, 0, &tf);
  EXPECT_GT(out.rel_l2_error, 0.0);
  EXPECT_LT(out.rel_l2_error, 1.0);
  EXPECT_THROW(run_trial(cfg, point, 0, nullptr), std::invalid_argument);
}

TEST(Experiment, MakeAssignmentNames) {
  ExperimentConfig cfg;
  cfg.N = 8;
  cfg.basis = "mixed";
  EXPECT_EQ(make_assignment(cfg, 10, 3).to_string(), BasisAssignment::mixed_layout(10, 8, 3).to_string());
  cfg.basis = "Legendre";
  EXPECT_EQ(make_assignment(cfg, 3, 3).kind(2), BasisKind::LegendrePreconditioned);
  cfg.basis = "";
  cfg.test_function = "mixed10";
  EXPECT_EQ(make_assignment(cfg, 10, 10).kind(1), BasisKind::Fourier);
  EXPECT_EQ(make_assignment(cfg, 10, 10).kind(0), BasisKind::Chebyshev);
}
