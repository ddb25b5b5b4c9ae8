#ifndef BOPB_RECOVERY_HPP_
#define BOPB_RECOVERY_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bopb/coefficients.hpp"
#include "bopb/sampling.hpp"
#include "bopb/supportid.hpp"

namespace bopb {

/// Raised when the least-squares iteration produces NaN or infinity.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecoveryConfig {
  std::size_t s = 1;
  std::size_t kappa = 20;
  std::size_t cg_iters = 3;
  std::size_t stagnation_window = 3;
  /// Sieve cardinality inside support identification; 0 means 2s.
  std::size_t keep = 0;
  std::size_t candidate_budget = 1'000'000;

  void validate() const;
  SupportIdConfig support_config() const { return {s, keep, candidate_budget}; }
};

enum class StopReason { ResidualIncrease, MaxIterations, SupportStagnation };

const char* to_string(StopReason reason);

struct RecoveryResult {
  SparseCoefficients coeffs;
  std::size_t iterations = 0;
  std::vector<double> residual_history;                  // ||v_CE||_2 after each iteration
  std::vector<std::vector<IndexVector>> support_history;  // supp(a^k)
  std::vector<std::vector<IndexVector>> identified;       // support_id output per iteration
  std::vector<SparseCoefficients> iterates;               // a^k
  StopReason stop_reason = StopReason::MaxIterations;
  double wall_time_s = 0.0;
  std::vector<std::string> warnings;
};

/// `iters` CG steps on the normal equations of min ||Phi_CE|_omega u - y||
/// (both sides scaled by 1/sqrt(m_CE)), warm-started at init restricted to omega.
SparseCoefficients cg_restricted_ls(const SamplingPlan& plan, const std::vector<IndexVector>& omega,
                                    const Eigen::VectorXcd& y_ce, const SparseCoefficients& init,
                                    std::size_t iters);

/// s largest-magnitude entries; ties go to the lexicographically smaller index. Exact zeros are dropped.
SparseCoefficients prune(const SparseCoefficients& b, std::size_t s);

/// The CoSaMP variant: support identification on the SID residual, merge with the
/// current support, warm-started CG least squares on the CE samples, prune, update.
RecoveryResult cosamp(const std::vector<Eigen::MatrixXcd>& y_sid, const Eigen::VectorXcd& y_ce,
                      const SamplingPlan& plan, const RecoveryConfig& cfg);

std::string result_to_json(const RecoveryResult& result);

}  // namespace bopb

#endif  // BOPB_RECOVERY_HPP_
