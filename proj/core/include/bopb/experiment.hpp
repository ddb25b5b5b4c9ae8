#ifndef BOPB_EXPERIMENT_HPP_
#define BOPB_EXPERIMENT_HPP_

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bopb/bases.hpp"
#include "bopb/recovery.hpp"
#include "bopb/testbed.hpp"

namespace bopb {

enum class ExperimentMode { RecoverSparse, SweepM1, SweepDimension, ApproxSparse };

const char* to_string(ExperimentMode mode);

/// Parsed experiment description. List-valued fields span the parameter grid.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::RecoverSparse;
  /// `fourier`, `chebyshev`, `legendre`, `mixed`, or a compact string such as `C,L,F*8`.
  /// Empty: the test function's own basis, else fourier.
  std::string basis;
  std::size_t N = 64;
  std::vector<std::size_t> D{10};
  std::optional<std::size_t> d;  // defaults to D
  std::vector<std::size_t> s{10};
  std::vector<double> m1_factors{3.0};
  double m2_factor = 1.0;
  double m_ce_factor = 50.0;
  double snr_db = kNoiselessSnr;
  std::size_t trials = 50;
  std::size_t kappa = 20;
  std::size_t cg_iters = 3;
  std::uint64_t seed = 1;
  std::string output = "results.csv";
  std::string test_function;
  std::size_t threads = 1;
  bool real_noise = false;

  /// Throws std::invalid_argument with a `line N:` prefix when the problem can be located.
  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
  /// Checks ranges and that every basis assignment in the grid can be built.
  void validate() const;
};

struct ExperimentPoint {
  std::size_t D = 0;
  std::size_t d = 0;
  std::size_t s = 0;
  double m1_factor = 0.0;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::size_t m_ce = 0;
};

std::vector<ExperimentPoint> expand_points(const ExperimentConfig& cfg);
BasisAssignment make_assignment(const ExperimentConfig& cfg, std::size_t D, std::size_t d);

/// m1 m2 (2D-1) + m_CE for the singleton partition.
std::size_t report_samples(const ExperimentPoint& point);
std::size_t report_samples(std::size_t D, std::size_t m1, std::size_t m2, std::size_t m_ce);

/// Seed of trial t: seed xor t.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  RecoveryResult result;
  bool success = false;          // exactly sparse modes only
  double rel_coeff_error = 0.0;  // exactly sparse modes only
  double rel_l2_error = 0.0;
  std::size_t n_samples = 0;
};

/// One full trial: signal, plan, acquisition, noise, recovery, metrics.
/// `tf` must be given for the approximately sparse mode. When `first_round` is set it
/// receives the score tables of the first support identification.
TrialOutcome run_trial(const ExperimentConfig& cfg, const ExperimentPoint& point, std::size_t trial,
                       const TestFunction* tf = nullptr, SupportIdTrace* first_round = nullptr);

struct PointSummary {
  ExperimentPoint point;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double avg_iterations = 0.0;
  double avg_runtime_s = 0.0;
  double rel_l2_error = 0.0;
  double rel_coeff_error_success = 0.0;      // mean over successes, NaN if none
  double max_rel_coeff_error_success = 0.0;  // NaN if none
  std::size_t n_samples_total = 0;
  bool complete = true;
};

/// Wilson score interval at 95%.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

/// Runs every trial of a point (in parallel when cfg.threads > 1). Trials not started
/// before `stop` is raised are skipped and the summary is marked incomplete.
PointSummary run_point(const ExperimentConfig& cfg, const ExperimentPoint& point,
                       const std::atomic<bool>* stop = nullptr,
                       std::vector<TrialOutcome>* outcomes = nullptr);

inline constexpr int kCsvVersion = 1;
std::string csv_header();
std::string csv_row(const ExperimentConfig& cfg, const PointSummary& summary);

struct RunSummary {
  std::vector<PointSummary> points;
  bool interrupted = false;
};

/// Writes one CSV row per point to cfg.output (flushed per point) and a JSON
/// manifest to cfg.output + ".manifest.json".
RunSummary run(const ExperimentConfig& cfg, const std::atomic<bool>* stop = nullptr,
               const std::function<void(const PointSummary&)>& on_point = {});

}  // namespace bopb

#endif  // BOPB_EXPERIMENT_HPP_
