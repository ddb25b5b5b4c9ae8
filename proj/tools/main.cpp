#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bopb/experiment.hpp"
#include "bopb/selftest.hpp"
#include "bopb/supportid.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
};

bopb::ExperimentConfig load_config(const std::string& path, const Overrides& o) {
  auto cfg = bopb::ExperimentConfig::from_json(read_file(path));
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.out) cfg.output = *o.out;
  cfg.validate();
  return cfg;
}

int cmd_recover(const std::string& config, const Overrides& o, std::size_t trial, const std::string& dump,
                std::size_t top) {
  using nlohmann::json;
  const auto cfg = load_config(config, o);
  const auto point = bopb::expand_points(cfg).front();
  std::optional<bopb::TestFunction> tf;
  if (cfg.mode == bopb::ExperimentMode::ApproxSparse)
    tf = bopb::TestFunction::make(cfg.test_function, bopb::make_assignment(cfg, point.D, point.d));
  bopb::SupportIdTrace trace;
  const auto outcome = bopb::run_trial(cfg, point, trial, tf ? &*tf : nullptr, dump.empty() ? nullptr : &trace);

  auto j = json::parse(bopb::result_to_json(outcome.result));
  j["trial"] = trial;
  j["trial_seed"] = outcome.seed;
  j["n_samples"] = outcome.n_samples;
  j["point"] = {{"D", point.D}, {"d", point.d}, {"s", point.s}, {"m1", point.m1}, {"m2", point.m2}, {"m_ce", point.m_ce}};
  if (cfg.mode == bopb::ExperimentMode::ApproxSparse) {
    j["rel_l2_error"] = outcome.rel_l2_error;
  } else {
    j["success"] = outcome.success;
    j["rel_coeff_error"] = outcome.rel_coeff_error;
  }
  if (!dump.empty()) {
    std::ofstream d(dump);
    if (!d) throw std::runtime_error("cannot open " + dump);
    bopb::write_trace_csv(trace, d, top);
  }
  if (o.out) {
    std::ofstream f(*o.out);
    if (!f) throw std::runtime_error("cannot open " + *o.out);
    f << j.dump(2) << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_sweep(const std::string& config, const Overrides& o) {
  const auto cfg = load_config(config, o);
  std::signal(SIGINT, on_sigint);
  const auto summary = bopb::run(cfg, &g_stop, [](const bopb::PointSummary& p) {
    std::fprintf(stderr, "D=%zu s=%zu m1=%zu: %zu/%zu successes, %.3f iterations, rel_l2 %.4g\n", p.point.D,
                 p.point.s, p.point.m1, p.successes, p.trials, p.avg_iterations, p.rel_l2_error);
  });
  if (summary.interrupted) {
    std::fprintf(stderr, "interrupted; partial results in %s\n", cfg.output.c_str());
    return 130;
  }
  return 0;
}

int cmd_samples(const std::string& config, const Overrides& o) {
  const auto cfg = load_config(config, o);
  std::cout << "D,d,s,m1,m2,m_ce,n_samples\n";
  for (const auto& p : bopb::expand_points(cfg))
    std::cout << p.D << ',' << p.d << ',' << p.s << ',' << p.m1 << ',' << p.m2 << ',' << p.m_ce << ','
              << bopb::report_samples(p) << '\n';
  return 0;
}

int cmd_selftest(std::uint64_t seed) {
  int failures = 0;
  for (const auto& c : bopb::run_property_suite(seed)) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    failures += c.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse approximation in bounded orthonormal product bases"};
  app.require_subcommand(1);

  std::string config, dump;
  std::uint64_t seed = 0;
  std::size_t threads = 0, trial = 0, top = 20;
  std::string out;

  auto* recover = app.add_subcommand("recover", "Run one trial and print the result as JSON");
  recover->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  recover->add_option("--seed", seed, "Override the config seed");
  recover->add_option("--trial", trial, "Trial number within the first grid point");
  recover->add_option("--out", out, "Write the JSON result here instead of stdout");
  recover->add_option("--dump-scores", dump, "Write first-round support-identification score tables (CSV)");
  recover->add_option("--top", top, "Rows per stage in the score dump");

  auto* sweep = app.add_subcommand("sweep", "Run every grid point and write CSV plus a manifest");
  sweep->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seed", seed, "Override the config seed");
  sweep->add_option("--threads", threads, "Worker threads over trials")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "CSV output path");

  auto* samples = app.add_subcommand("samples", "Print the sample count of every grid point");
  samples->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  std::uint64_t self_seed = 20240601;
  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");
  selftest->add_option("--seed", self_seed, "Seed of the randomized checks");

  CLI11_PARSE(app, argc, argv);

  Overrides o;
  for (auto* sub : {recover, sweep}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--out")) o.out = out;
  }
  if (sweep->count("--threads")) o.threads = threads;

  try {
    if (recover->parsed()) return cmd_recover(config, o, trial, dump, top);
    if (sweep->parsed()) return cmd_sweep(config, o);
    if (samples->parsed()) return cmd_samples(config, o);
    if (selftest->parsed()) return cmd_selftest(self_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
