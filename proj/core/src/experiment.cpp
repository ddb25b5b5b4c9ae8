#include "bopb/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace bopb {

namespace {

using nlohmann::json;

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" in the source; 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

template <class T>
std::vector<T> scalar_or_list(const json& v) {
  if (v.is_array()) return v.get<std::vector<T>>();
  return {v.get<T>()};
}

std::size_t scaled(double factor, std::size_t s) {
  return static_cast<std::size_t>(std::max(0L, std::lround(factor * static_cast<double>(s))));
}

}  // namespace

const char* to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::RecoverSparse: return "recover_sparse";
    case ExperimentMode::SweepM1: return "sweep_m1";
    case ExperimentMode::SweepDimension: return "sweep_dimension";
    case ExperimentMode::ApproxSparse: return "approx_sparse";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("line " + std::to_string(line_of_offset(text, e.byte)) +
                                ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("line 1: config must be a JSON object");

  ExperimentConfig cfg;
  std::string key;
  auto fail = [&](const std::string& msg) -> std::invalid_argument {
    return std::invalid_argument("line " + std::to_string(line_of_key(text, key)) + ": '" + key + "': " + msg);
  };
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      key = it.key();
      const json& v = it.value();
      if (key == "mode") {
        const auto m = v.get<std::string>();
        if (m == "recover_sparse") cfg.mode = ExperimentMode::RecoverSparse;
        else if (m == "sweep_m1") cfg.mode = ExperimentMode::SweepM1;
        else if (m == "sweep_dimension") cfg.mode = ExperimentMode::SweepDimension;
        else if (m == "approx_sparse") cfg.mode = ExperimentMode::ApproxSparse;
        else throw fail("unknown mode '" + m + "'");
      } else if (key == "basis") {
        cfg.basis = v.get<std::string>();
      } else if (key == "N") {
        cfg.N = v.get<std::size_t>();
      } else if (key == "D") {
        cfg.D = scalar_or_list<std::size_t>(v);
      } else if (key == "d") {
        cfg.d = v.get<std::size_t>();
      } else if (key == "s") {
        cfg.s = scalar_or_list<std::size_t>(v);
      } else if (key == "m1_factor" || key == "m1_factors") {
        cfg.m1_factors = scalar_or_list<double>(v);
      } else if (key == "m2_factor") {
        cfg.m2_factor = v.get<double>();
      } else if (key == "m_ce_factor") {
        cfg.m_ce_factor = v.get<double>();
      } else if (key == "snr_db") {
        if (v.is_string()) {
          if (lower(v.get<std::string>()) != "inf") throw fail("expected a number or \"inf\"");
          cfg.snr_db = kNoiselessSnr;
        } else {
          cfg.snr_db = v.get<double>();
        }
      } else if (key == "trials") {
        cfg.trials = v.get<std::size_t>();
      } else if (key == "kappa") {
        cfg.kappa = v.get<std::size_t>();
      } else if (key == "cg_iters") {
        cfg.cg_iters = v.get<std::size_t>();
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "output") {
        cfg.output = v.get<std::string>();
      } else if (key == "test_function") {
        cfg.test_function = v.get<std::string>();
      } else if (key == "threads") {
        cfg.threads = v.get<std::size_t>();
      } else if (key == "real_noise") {
        cfg.real_noise = v.get<bool>();
      } else if (key == "comment" || key == "description") {
        // free text
      } else {
        throw fail("unknown key");
      }
    }
  } catch (const json::exception& e) {
    throw fail(std::string("wrong type: ") + e.what());
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["mode"] = bopb::to_string(mode);
  j["basis"] = basis;
  j["N"] = N;
  j["D"] = D;
  if (d) j["d"] = *d;
  j["s"] = s;
  j["m1_factors"] = m1_factors;
  j["m2_factor"] = m2_factor;
  j["m_ce_factor"] = m_ce_factor;
  j["snr_db"] = std::isinf(snr_db) ? json("inf") : json(snr_db);
  j["trials"] = trials;
  j["kappa"] = kappa;
  j["cg_iters"] = cg_iters;
  j["seed"] = seed;
  j["output"] = output;
  if (!test_function.empty()) j["test_function"] = test_function;
  j["threads"] = threads;
  j["real_noise"] = real_noise;
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(N >= 2, "N must be >= 2");
  require(!D.empty() && std::all_of(D.begin(), D.end(), [](auto x) { return x >= 1; }), "D must be >= 1");
  require(!s.empty() && std::all_of(s.begin(), s.end(), [](auto x) { return x >= 1; }), "s must be >= 1");
  require(!m1_factors.empty(), "m1_factors must not be empty");
  require(trials >= 1, "trials must be >= 1");
  require(kappa >= 1, "kappa must be >= 1");
  require(cg_iters >= 1, "cg_iters must be >= 1");
  require(threads >= 1, "threads must be >= 1");
  require(!std::isnan(snr_db), "snr_db must be a number or \"inf\"");
  require(!output.empty(), "output path must not be empty");
  if (mode == ExperimentMode::ApproxSparse) require(!test_function.empty(), "approx_sparse needs test_function");
  if (mode == ExperimentMode::SweepDimension) require(D.size() >= 1, "sweep_dimension needs a D list");
  for (const auto& p : expand_points(*this)) {
    require(p.m1 >= 1 && p.m2 >= 1 && p.m_ce >= 1, "every sample budget must round to >= 1");
    require(p.d >= 1 && p.d <= p.D, "d must lie in [1, D]");
    const auto assign = make_assignment(*this, p.D, p.d);
    if (mode == ExperimentMode::ApproxSparse) {
      (void)TestFunction::make(test_function, assign);
    } else {
      require(BigInt(p.s) <= space_cardinality(N, p.D, p.d), "s exceeds the size of the index space");
    }
  }
}

std::vector<ExperimentPoint> expand_points(const ExperimentConfig& cfg) {
  std::vector<ExperimentPoint> out;
  for (auto D : cfg.D)
    for (auto s : cfg.s)
      for (auto f : cfg.m1_factors) {
        ExperimentPoint p;
        p.D = D;
        p.d = cfg.d.value_or(D);
        p.s = s;
        p.m1_factor = f;
        p.m1 = scaled(f, s);
        p.m2 = scaled(cfg.m2_factor, s);
        p.m_ce = scaled(cfg.m_ce_factor, s);
        out.push_back(p);
      }
  return out;
}

BasisAssignment make_assignment(const ExperimentConfig& cfg, std::size_t D, std::size_t d) {
  std::string b = lower(cfg.basis);
  if (b.empty() || b == "default")
    b = cfg.test_function.empty() ? "fourier" : lower(TestFunction::default_basis(cfg.test_function));
  BasisAssignment assign;
  if (b == "fourier") assign = BasisAssignment::uniform(BasisKind::Fourier, D, cfg.N, d);
  else if (b == "chebyshev") assign = BasisAssignment::uniform(BasisKind::Chebyshev, D, cfg.N, d);
  else if (b == "legendre") assign = BasisAssignment::uniform(BasisKind::LegendrePreconditioned, D, cfg.N, d);
  else if (b == "mixed") assign = BasisAssignment::mixed_layout(D, cfg.N, d);
  else assign = BasisAssignment::parse(cfg.basis.empty() ? b : cfg.basis, cfg.N, d);
  if (assign.dimension() != D)
    throw std::invalid_argument("basis '" + cfg.basis + "' has " + std::to_string(assign.dimension()) +
                                " dimensions, expected " + std::to_string(D));
  return assign;
}

std::size_t report_samples(std::size_t D, std::size_t m1, std::size_t m2, std::size_t m_ce) {
  return m1 * m2 * (2 * D - 1) + m_ce;
}

std::size_t report_samples(const ExperimentPoint& p) { return report_samples(p.D, p.m1, p.m2, p.m_ce); }

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return seed ^ static_cast<std::uint64_t>(trial); }

TrialOutcome run_trial(const ExperimentConfig& cfg, const ExperimentPoint& point, std::size_t trial,
                       const TestFunction* tf, SupportIdTrace* first_round) {
  TrialOutcome out;
  out.trial = trial;
  out.seed = trial_seed(cfg.seed, trial);
  const auto assign = make_assignment(cfg, point.D, point.d);
  const auto plan = draw_plan(assign, singleton_partition(point.D), point.m1, point.m2, point.m_ce,
                              derive_seed(out.seed, 2));
  out.n_samples = plan.grid_size();
  Rng noise_rng(derive_seed(out.seed, 3));

  RecoveryConfig rc;
  rc.s = point.s;
  rc.kappa = cfg.kappa;
  rc.cg_iters = cfg.cg_iters;

  if (cfg.mode == ExperimentMode::ApproxSparse) {
    if (tf == nullptr) throw std::invalid_argument("run_trial: approximately sparse mode needs a test function");
    const auto samples = acquire(plan, [tf](std::span<const double> xi) { return Complex((*tf)(xi), 0.0); });
    const auto noisy = add_noise(samples, cfg.snr_db, noise_rng, cfg.real_noise);
    if (first_round != nullptr) support_id(noisy.sid, plan, rc.support_config(), first_round);
    out.result = cosamp(noisy.sid, noisy.ce, plan, rc);
    out.rel_l2_error = relative_l2_error(out.result.coeffs, *tf);
    return out;
  }
  Rng signal_rng(derive_seed(out.seed, 1));
  const auto signal = gen_trial(assign, point.s, signal_rng);
  const auto samples = acquire(plan, [&signal](std::span<const double> xi) { return signal(xi); });
  const auto noisy = add_noise(samples, cfg.snr_db, noise_rng, cfg.real_noise);
  if (first_round != nullptr) support_id(noisy.sid, plan, rc.support_config(), first_round);
  out.result = cosamp(noisy.sid, noisy.ce, plan, rc);
  out.success = success(out.result.coeffs, signal);
  out.rel_coeff_error = relative_coefficient_error(out.result.coeffs, signal.coeffs);
  // Orthonormal basis: the L2 error of an exactly sparse function equals its coefficient error.
  out.rel_l2_error = out.rel_coeff_error;
  return out;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

PointSummary run_point(const ExperimentConfig& cfg, const ExperimentPoint& point,
                       const std::atomic<bool>* stop, std::vector<TrialOutcome>* outcomes) {
  std::optional<TestFunction> tf;
  if (cfg.mode == ExperimentMode::ApproxSparse)
    tf = TestFunction::make(cfg.test_function, make_assignment(cfg, point.D, point.d));

  std::vector<std::optional<TrialOutcome>> results(cfg.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (stop != nullptr && stop->load()) return;
      const std::size_t t = next.fetch_add(1);
      if (t >= cfg.trials) return;
      try {
        results[t] = run_trial(cfg, point, t, tf ? &*tf : nullptr);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(cfg.trials);
      }
    }
  };
  const std::size_t nthreads = std::min(cfg.threads, cfg.trials);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  PointSummary sum;
  sum.point = point;
  sum.n_samples_total = report_samples(point);
  double iters = 0, runtime = 0, l2 = 0, coeff_ok = 0, coeff_max = 0;
  for (auto& r : results) {
    if (!r) {
      sum.complete = false;
      continue;
    }
    ++sum.trials;
    iters += static_cast<double>(r->result.iterations);
    runtime += r->result.wall_time_s;
    l2 += r->rel_l2_error;
    if (r->success) {
      ++sum.successes;
      coeff_ok += r->rel_coeff_error;
      coeff_max = std::max(coeff_max, r->rel_coeff_error);
    }
    if (outcomes != nullptr) outcomes->push_back(std::move(*r));
  }
  const double n = static_cast<double>(std::max<std::size_t>(sum.trials, 1));
  sum.success_rate = static_cast<double>(sum.successes) / n;
  std::tie(sum.wilson_lo, sum.wilson_hi) = wilson_interval(sum.successes, sum.trials);
  sum.avg_iterations = iters / n;
  sum.avg_runtime_s = runtime / n;
  sum.rel_l2_error = l2 / n;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  sum.rel_coeff_error_success = sum.successes ? coeff_ok / static_cast<double>(sum.successes) : nan;
  sum.max_rel_coeff_error_success = sum.successes ? coeff_max : nan;
  return sum;
}

std::string csv_header() {
  return "mode,basis,N,D,d,s,m1_factor,m1,m2,m_ce,snr_db,trials,successes,success_rate,wilson_lo,wilson_hi,"
         "avg_iterations,avg_runtime_s,rel_l2_error,rel_coeff_error_success,max_rel_coeff_error_success,"
         "n_samples_total";
}

std::string csv_row(const ExperimentConfig& cfg, const PointSummary& r) {
  const auto& p = r.point;
  const auto basis = make_assignment(cfg, p.D, p.d).to_string();
  std::string row;
  auto add = [&](const std::string& x) {
    if (!row.empty()) row += ',';
    row += x;
  };
  add(to_string(cfg.mode));
  add('"' + basis + '"');
  add(std::to_string(cfg.N));
  add(std::to_string(p.D));
  add(std::to_string(p.d));
  add(std::to_string(p.s));
  add(fmt(p.m1_factor));
  add(std::to_string(p.m1));
  add(std::to_string(p.m2));
  add(std::to_string(p.m_ce));
  add(fmt(cfg.snr_db));
  add(std::to_string(r.trials));
  add(std::to_string(r.successes));
  add(fmt(r.success_rate));
  add(fmt(r.wilson_lo));
  add(fmt(r.wilson_hi));
  add(fmt(r.avg_iterations));
  add(fmt(r.avg_runtime_s));
  add(fmt(r.rel_l2_error));
  add(fmt(r.rel_coeff_error_success));
  add(fmt(r.max_rel_coeff_error_success));
  add(std::to_string(r.n_samples_total));
  return row;
}

RunSummary run(const ExperimentConfig& cfg, const std::atomic<bool>* stop,
               const std::function<void(const PointSummary&)>& on_point) {
  cfg.validate();
  const auto points = expand_points(cfg);
  const std::filesystem::path csv_path(cfg.output);
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + cfg.output);
  csv << csv_header() << '\n' << std::flush;

  RunSummary summary;
  for (const auto& p : points) {
    if (stop != nullptr && stop->load()) {
      summary.interrupted = true;
      break;
    }
    auto r = run_point(cfg, p, stop);
    if (r.trials > 0) csv << csv_row(cfg, r) << '\n' << std::flush;
    summary.points.push_back(r);
    if (on_point) on_point(r);
    if (!r.complete) {
      summary.interrupted = true;
      break;
    }
  }

  json manifest;
  manifest["format"] = "bopb-sweep-manifest-1";
  manifest["csv_version"] = kCsvVersion;
  manifest["config"] = json::parse(cfg.to_json());
  manifest["trial_seeds"] = json::array();
  for (std::size_t t = 0; t < cfg.trials; ++t) manifest["trial_seeds"].push_back(trial_seed(cfg.seed, t));
  manifest["points"] = json::array();
  for (const auto& r : summary.points)
    manifest["points"].push_back({{"D", r.point.D}, {"d", r.point.d}, {"s", r.point.s},
                                  {"m1", r.point.m1}, {"m2", r.point.m2}, {"m_ce", r.point.m_ce},
                                  {"trials_completed", r.trials}, {"n_samples_total", r.n_samples_total}});
  manifest["interrupted"] = summary.interrupted;
  std::ofstream(cfg.output + ".manifest.json") << manifest.dump(2) << '\n';
  return summary;
}

}  // namespace bopb
