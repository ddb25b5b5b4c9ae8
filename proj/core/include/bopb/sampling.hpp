#ifndef BOPB_SAMPLING_HPP_
#define BOPB_SAMPLING_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bopb/bases.hpp"
#include "bopb/coefficients.hpp"
#include "bopb/index.hpp"

namespace bopb {

/// One support-identification block: the grid rho_S(w_l, z_k) for
/// l in [m1], k in [m2], with w over the block's coordinate set S and z over S^c.
struct SidBlock {
  enum class Role { EntryId, Pairing };

  Role role = Role::EntryId;
  /// Partition index j for entry-ID blocks, pairing step j (1..t) for pairing blocks.
  std::size_t stage = 0;
  DimensionSet w_dims;
  DimensionSet z_dims;
  std::size_t m1 = 0;
  std::size_t m2 = 0;
  std::vector<double> w_nodes;  // m1 x |w_dims|, row-major
  std::vector<double> z_nodes;  // m2 x |z_dims|, row-major

  std::span<const double> w(std::size_t l) const {
    return {w_nodes.data() + l * w_dims.size(), w_dims.size()};
  }
  std::span<const double> z(std::size_t k) const {
    return {z_nodes.data() + k * z_dims.size(), z_dims.size()};
  }
  /// rho_S(w_l, z_k) as a full D-dimensional point.
  std::vector<double> point(std::size_t l, std::size_t k) const;
};

/// Address of a single grid node.
struct NodeId {
  enum class Kind { Sid, Ce };
  Kind kind = Kind::Ce;
  std::size_t block = 0;  // SID only
  std::size_t l = 0;      // SID: w index; CE: node index
  std::size_t k = 0;      // SID only
};

/// Per-block node budgets overriding the uniform (m1, m2).
struct BlockBudget {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
};

/// The fixed nonadaptive grid: t+1 entry-identification blocks over the
/// partition cells, t pairing blocks over the prefix unions, plus m_CE
/// coefficient-estimation nodes.
class SamplingPlan {
 public:
  SamplingPlan(BasisAssignment assign, std::vector<DimensionSet> partition,
               std::vector<SidBlock> blocks, std::vector<double> ce_nodes, std::size_t m_ce,
               std::uint64_t seed);

  const BasisAssignment& assign() const { return assign_; }
  std::size_t dimension() const { return assign_.dimension(); }
  const std::vector<DimensionSet>& partition() const { return partition_; }
  /// t, the number of pairing steps (partition size minus one).
  std::size_t pairing_steps() const { return partition_.size() - 1; }

  std::span<const SidBlock> blocks() const { return blocks_; }
  const SidBlock& entry_block(std::size_t j) const { return blocks_[j]; }
  /// Pairing step j in [1, t].
  const SidBlock& pairing_block(std::size_t j) const { return blocks_[pairing_steps() + j]; }

  std::size_t m_ce() const { return m_ce_; }
  std::span<const double> ce_node(std::size_t i) const {
    return {ce_nodes_.data() + i * dimension(), dimension()};
  }
  std::span<const double> ce_nodes() const { return ce_nodes_; }
  std::uint64_t seed() const { return seed_; }

  /// Sum over blocks of m1 m2, plus m_CE.
  std::size_t grid_size() const;
  std::size_t sid_size() const;

  std::vector<double> point(const NodeId& node) const;

 private:
  BasisAssignment assign_;
  std::vector<DimensionSet> partition_;
  std::vector<SidBlock> blocks_;
  std::vector<double> ce_nodes_;
  std::size_t m_ce_;
  std::uint64_t seed_;
};

/// Function values on the grid (already multiplied by sample_weight).
struct SampleSet {
  std::vector<Eigen::MatrixXcd> sid;  // one m1 x m2 matrix per block
  Eigen::VectorXcd ce;

  double squared_norm() const;
};

std::vector<DimensionSet> singleton_partition(std::size_t D);
/// Throws std::invalid_argument unless the cells are nonempty, disjoint and cover [D].
void validate_partition(const std::vector<DimensionSet>& partition, std::size_t D);

/// Draws every node coordinate independently from its per-dimension measure.
/// Deterministic in `seed`. `overrides`, when given, holds one budget per block and
/// replaces m1, m2.
SamplingPlan draw_plan(const BasisAssignment& assign, std::vector<DimensionSet> partition,
                       std::size_t m1, std::size_t m2, std::size_t m_ce, std::uint64_t seed,
                       const std::vector<BlockBudget>& overrides = {});

using SamplingOracle = std::function<Complex(std::span<const double>)>;

/// Evaluates `f` once per grid node and applies the preconditioning weight.
/// Oracle exceptions are rethrown nested inside a std::runtime_error naming the node.
SampleSet acquire(const SamplingPlan& plan, const SamplingOracle& f);

/// Phi entry T_n(xi) at one node.
Complex phi_row(const SamplingPlan& plan, const NodeId& node, const IndexVector& n);

/// Phi_SID a on one block, returned in the block's m1 x m2 layout.
Eigen::MatrixXcd phi_apply_sid(const SamplingPlan& plan, std::size_t block,
                               const SparseCoefficients& coeffs);
/// Phi_CE a.
Eigen::VectorXcd phi_apply_ce(const SamplingPlan& plan, const SparseCoefficients& coeffs);
/// Phi_SID a on every block.
std::vector<Eigen::MatrixXcd> phi_apply_sid_all(const SamplingPlan& plan,
                                                const SparseCoefficients& coeffs);

/// (Phi_CE restricted to omega)^* residual.
SparseCoefficients phi_adjoint_apply(const SamplingPlan& plan, const Eigen::VectorXcd& residual,
                                     const std::vector<IndexVector>& omega);

/// Evaluates T_{S;n} for a fixed list of columns at arbitrary nodes over S.
/// Distinct 1-D factors are computed once per node and shared across columns.
class ColumnEvaluator {
 public:
  ColumnEvaluator(const BasisAssignment& assign, const DimensionSet& dims,
                  std::span<const IndexVector> columns);

  std::size_t columns() const { return column_factors_.size(); }
  /// out[c] = T_{S;n_c}(coords); coords covers the dims of S in order.
  void row(std::span<const double> coords, std::span<Complex> out) const;
  /// rows x columns matrix for row-major node storage; optionally conjugated.
  Eigen::MatrixXcd matrix(std::span<const double> nodes, std::size_t rows,
                          bool conjugate = false) const;

 private:
  struct Factor {
    std::uint32_t position;  // position within dims
    std::uint32_t value;
    BasisKind kind;
  };
  void factors(std::span<const double> coords, std::span<Complex> values) const;

  std::size_t N_;
  std::size_t width_;
  std::vector<Factor> factors_;
  std::vector<std::vector<std::uint32_t>> column_factors_;
};

/// Phi_CE restricted to a column set, for repeated products inside least squares.
/// Materializes the m_CE x |omega| block when it is small, otherwise evaluates rows on the fly.
class CeOperator {
 public:
  CeOperator(const SamplingPlan& plan, std::vector<IndexVector> omega);

  const std::vector<IndexVector>& omega() const { return omega_; }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& u) const;
  Eigen::VectorXcd adjoint(const Eigen::VectorXcd& r) const;

 private:
  const SamplingPlan& plan_;
  std::vector<IndexVector> omega_;
  ColumnEvaluator columns_;
  std::optional<Eigen::MatrixXcd> dense_;
};

/// Exact-replay JSON form of a plan (node coordinates as hex floats).
std::string plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const std::string& text);

}  // namespace bopb

#endif  // BOPB_SAMPLING_HPP_
