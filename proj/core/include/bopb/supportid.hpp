#ifndef BOPB_SUPPORTID_HPP_
#define BOPB_SUPPORTID_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bopb/index.hpp"
#include "bopb/sampling.hpp"

namespace bopb {

struct SupportIdConfig {
  std::size_t s = 1;
  /// Sieve cardinality; 0 means 2s.
  std::size_t keep = 0;
  /// Largest entry-identification candidate grid accepted for non-singleton cells.
  std::size_t candidate_budget = 1'000'000;

  std::size_t effective_keep() const { return keep == 0 ? 2 * s : keep; }
};

/// E = (1/m2) sum_k |(1/m1) sum_l v[l,k] conj(T_{S;n}(w_l))|^2 with S the block's w coordinates.
/// Throws std::invalid_argument on a shape mismatch or supp(n) outside S.
double energy_estimate(const Eigen::MatrixXcd& v, const SidBlock& block, const IndexVector& n,
                       const BasisAssignment& assign);

/// The same estimator for many candidates at once (one matrix product).
std::vector<double> energy_scores(const Eigen::MatrixXcd& v, const SidBlock& block,
                                  std::span<const IndexVector> candidates,
                                  const BasisAssignment& assign);

/// Positions of the min(keep, n) best candidates: score descending, then index ascending.
std::vector<std::size_t> sieve_order(std::span<const IndexVector> candidates,
                                     std::span<const double> scores, std::size_t keep);
std::vector<IndexVector> sieve(std::span<const IndexVector> candidates, std::span<const double> scores,
                               std::size_t keep);

/// Every n supported in `cell` with weight <= d (the zero index included), ascending.
/// Throws std::invalid_argument if there are more than `budget` of them.
std::vector<IndexVector> entry_candidates(const BasisAssignment& assign, const DimensionSet& cell,
                                          std::size_t budget);

/// Candidate set of a pairing step: p + m for p in prev, m in next, kept when in I_{N,d}.
struct PairingCandidates {
  std::vector<IndexVector> prev;
  std::vector<IndexVector> next;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (position in prev, position in next)
  std::vector<IndexVector> combined;                          // parallel to pairs
};

/// Throws std::invalid_argument if the supports of prev and next overlap.
PairingCandidates pairing_candidates(std::vector<IndexVector> prev, std::vector<IndexVector> next,
                                     std::size_t N, std::size_t d);

/// Pairing-block scores for every candidate, reusing the prefix/new factorization of T_{S;p+m}.
std::vector<double> pairing_scores(const Eigen::MatrixXcd& v, const SidBlock& block,
                                   const DimensionSet& prefix, const DimensionSet& cell,
                                   const PairingCandidates& cands, const BasisAssignment& assign);

/// Scores one stage's candidates. Swappable so tests can substitute exact energies.
class StageScorer {
 public:
  virtual ~StageScorer() = default;
  virtual std::vector<double> entry(std::size_t j, std::span<const IndexVector> candidates) = 0;
  virtual std::vector<double> pairing(std::size_t j, const PairingCandidates& candidates) = 0;
};

/// The sample-based estimator over residual samples laid out like a SampleSet's sid part.
class EstimatorScorer final : public StageScorer {
 public:
  EstimatorScorer(const SamplingPlan& plan, const std::vector<Eigen::MatrixXcd>& v_sid);
  std::vector<double> entry(std::size_t j, std::span<const IndexVector> candidates) override;
  std::vector<double> pairing(std::size_t j, const PairingCandidates& candidates) override;

 private:
  const SamplingPlan& plan_;
  const std::vector<Eigen::MatrixXcd>& v_;
};

/// Per-stage record for diagnostics and invariant checks.
struct SupportIdStage {
  SidBlock::Role role = SidBlock::Role::EntryId;
  std::size_t stage = 0;
  std::vector<IndexVector> candidates;
  std::vector<double> scores;
  std::vector<IndexVector> kept;  // ranked
  std::vector<double> kept_scores;
};

struct SupportIdTrace {
  std::vector<SupportIdStage> stages;
};

/// Ranked top-keep entry-identification output for partition cell j.
std::vector<IndexVector> entry_identify(const SamplingPlan& plan, std::size_t j,
                                        std::span<const IndexVector> candidates, StageScorer& scorer,
                                        std::size_t keep, SupportIdTrace* trace = nullptr);

/// Ranked top-keep output of pairing step j (1..t).
std::vector<IndexVector> pair_step(const SamplingPlan& plan, std::size_t j, std::vector<IndexVector> prev,
                                   std::vector<IndexVector> next, StageScorer& scorer, std::size_t keep,
                                   SupportIdTrace* trace = nullptr);

/// Throws std::invalid_argument when the plan's partition needs more entry candidates than allowed.
void validate_support_config(const SamplingPlan& plan, const SupportIdConfig& cfg);

/// Entry identification on every cell, then the pairing fold. Result sorted ascending, size <= keep.
std::vector<IndexVector> support_id_with(const SamplingPlan& plan, const SupportIdConfig& cfg,
                                         StageScorer& scorer, SupportIdTrace* trace = nullptr);
std::vector<IndexVector> support_id(const std::vector<Eigen::MatrixXcd>& v_sid, const SamplingPlan& plan,
                                    const SupportIdConfig& cfg, SupportIdTrace* trace = nullptr);

/// CSV dump of the top `top` rows of every stage: stage,role,rank,index,score.
void write_trace_csv(const SupportIdTrace& trace, std::ostream& out, std::size_t top);

}  // namespace bopb

#endif  // BOPB_SUPPORTID_HPP_
