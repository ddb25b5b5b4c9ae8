#include "bopb/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <stdexcept>

namespace bopb {

namespace {

// Above this many entries the restricted CE block is evaluated row by row.
constexpr std::size_t kDenseLimit = std::size_t{1} << 23;

void fill_nodes(const BasisAssignment& assign, const DimensionSet& dims, std::size_t rows,
                Rng& rng, std::vector<double>& out) {
  out.resize(rows * dims.size());
  auto d = dims.dims();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < d.size(); ++i)
      out[r * d.size() + i] = sample_node(assign.kind(d[i]), rng);
}

std::string describe(const NodeId& node) {
  if (node.kind == NodeId::Kind::Ce) return "CE node " + std::to_string(node.l);
  return "SID block " + std::to_string(node.block) + " node (" + std::to_string(node.l) + ", " +
         std::to_string(node.k) + ")";
}

}  // namespace

std::vector<double> SidBlock::point(std::size_t l, std::size_t k) const {
  std::vector<double> xi(w_dims.ambient());
  auto wd = w_dims.dims();
  auto zd = z_dims.dims();
  auto wl = w(l);
  auto zk = z(k);
  for (std::size_t i = 0; i < wd.size(); ++i) xi[wd[i]] = wl[i];
  for (std::size_t i = 0; i < zd.size(); ++i) xi[zd[i]] = zk[i];
  return xi;
}

SamplingPlan::SamplingPlan(BasisAssignment assign, std::vector<DimensionSet> partition,
                           std::vector<SidBlock> blocks, std::vector<double> ce_nodes,
                           std::size_t m_ce, std::uint64_t seed)
    : assign_(std::move(assign)),
      partition_(std::move(partition)),
      blocks_(std::move(blocks)),
      ce_nodes_(std::move(ce_nodes)),
      m_ce_(m_ce),
      seed_(seed) {
  const std::size_t D = assign_.dimension();
  validate_partition(partition_, D);
  if (blocks_.size() != 2 * partition_.size() - 1)
    throw std::invalid_argument("sampling plan: expected 2t+1 SID blocks");
  if (m_ce_ == 0 || ce_nodes_.size() != m_ce_ * D)
    throw std::invalid_argument("sampling plan: CE node array has wrong shape");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    const bool entry = b < partition_.size();
    DimensionSet expected;
    if (entry) {
      expected = partition_[b];
    } else {
      const std::size_t j = b - pairing_steps();
      expected = partition_[0];
      for (std::size_t i = 1; i <= j; ++i) expected = expected.united(partition_[i]);
    }
    if (blk.w_dims != expected || blk.z_dims != expected.complement())
      throw std::invalid_argument("sampling plan: block " + std::to_string(b) +
                                  " has the wrong coordinate split");
    if (blk.m1 == 0 || blk.m2 == 0 || blk.w_nodes.size() != blk.m1 * blk.w_dims.size() ||
        blk.z_nodes.size() != blk.m2 * blk.z_dims.size())
      throw std::invalid_argument("sampling plan: block " + std::to_string(b) + " has bad shape");
  }
  auto check = [&](const DimensionSet& dims, std::span<const double> nodes) {
    auto d = dims.dims();
    if (d.empty()) return;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (!assign_.in_domain(d[i % d.size()], nodes[i]))
        throw std::invalid_argument("sampling plan: node coordinate outside its domain");
  };
  for (const auto& blk : blocks_) {
    check(blk.w_dims, blk.w_nodes);
    check(blk.z_dims, blk.z_nodes);
  }
  check(DimensionSet::all(D), ce_nodes_);
}

std::size_t SamplingPlan::sid_size() const {
  std::size_t total = 0;
  for (const auto& blk : blocks_) total += blk.m1 * blk.m2;
  return total;
}

std::size_t SamplingPlan::grid_size() const { return sid_size() + m_ce_; }

std::vector<double> SamplingPlan::point(const NodeId& node) const {
  if (node.kind == NodeId::Kind::Ce) {
    if (node.l >= m_ce_) throw std::out_of_range("unknown " + describe(node));
    auto p = ce_node(node.l);
    return {p.begin(), p.end()};
  }
  if (node.block >= blocks_.size() || node.l >= blocks_[node.block].m1 ||
      node.k >= blocks_[node.block].m2)
    throw std::out_of_range("unknown " + describe(node));
  return blocks_[node.block].point(node.l, node.k);
}

double SampleSet::squared_norm() const {
  double total = ce.squaredNorm();
  for (const auto& m : sid) total += m.squaredNorm();
  return total;
}

std::vector<DimensionSet> singleton_partition(std::size_t D) {
  std::vector<DimensionSet> out;
  out.reserve(D);
  for (std::size_t j = 0; j < D; ++j)
    out.push_back(DimensionSet::singleton(D, static_cast<std::uint32_t>(j)));
  return out;
}

void validate_partition(const std::vector<DimensionSet>& partition, std::size_t D) {
  if (partition.empty()) throw std::invalid_argument("partition is empty");
  std::vector<bool> seen(D, false);
  std::size_t covered = 0;
  for (const auto& cell : partition) {
    if (cell.ambient() != D) throw std::invalid_argument("partition cell has wrong ambient dimension");
    if (cell.empty()) throw std::invalid_argument("partition cell is empty");
    for (auto j : cell.dims()) {
      if (seen[j]) throw std::invalid_argument("partition cells overlap at dim " + std::to_string(j));
      seen[j] = true;
      ++covered;
    }
  }
  if (covered != D) throw std::invalid_argument("partition does not cover every dimension");
}

SamplingPlan draw_plan(const BasisAssignment& assign, std::vector<DimensionSet> partition,
                       std::size_t m1, std::size_t m2, std::size_t m_ce, std::uint64_t seed,
                       const std::vector<BlockBudget>& overrides) {
  const std::size_t D = assign.dimension();
  validate_partition(partition, D);
  if (m_ce == 0) throw std::invalid_argument("draw_plan: m_CE must be >= 1");
  if (overrides.empty() && (m1 == 0 || m2 == 0)) throw std::invalid_argument("draw_plan: m1, m2 must be >= 1");
  const std::size_t t = partition.size() - 1;
  if (!overrides.empty() && overrides.size() != 2 * t + 1)
    throw std::invalid_argument("draw_plan: need one budget override per block");

  Rng rng(seed);
  std::vector<SidBlock> blocks(2 * t + 1);
  DimensionSet prefix = partition[0];
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& blk = blocks[b];
    if (b <= t) {
      blk.role = SidBlock::Role::EntryId;
      blk.stage = b;
      blk.w_dims = partition[b];
    } else {
      blk.role = SidBlock::Role::Pairing;
      blk.stage = b - t;
      prefix = prefix.united(partition[blk.stage]);
      blk.w_dims = prefix;
    }
    blk.z_dims = blk.w_dims.complement();
    blk.m1 = overrides.empty() ? m1 : overrides[b].m1;
    blk.m2 = overrides.empty() ? m2 : overrides[b].m2;
    if (blk.m1 == 0 || blk.m2 == 0) throw std::invalid_argument("draw_plan: block budget must be >= 1");
    fill_nodes(assign, blk.w_dims, blk.m1, rng, blk.w_nodes);
    fill_nodes(assign, blk.z_dims, blk.m2, rng, blk.z_nodes);
  }
  std::vector<double> ce;
  fill_nodes(assign, DimensionSet::all(D), m_ce, rng, ce);
  return SamplingPlan(assign, std::move(partition), std::move(blocks), std::move(ce), m_ce, seed);
}

SampleSet acquire(const SamplingPlan& plan, const SamplingOracle& f) {
  const auto& assign = plan.assign();
  std::map<std::vector<double>, Complex> memo;
  auto sample = [&](const NodeId& node) -> Complex {
    auto xi = plan.point(node);
    if (auto it = memo.find(xi); it != memo.end()) return it->second;
    Complex value;
    try {
      value = f(xi);
    } catch (...) {
      std::throw_with_nested(std::runtime_error("sampling oracle failed at " + describe(node)));
    }
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
      throw std::runtime_error("sampling oracle returned a non-finite value at " + describe(node));
    value *= sample_weight(assign, xi);
    memo.emplace(std::move(xi), value);
    return value;
  };

  SampleSet out;
  auto blocks = plan.blocks();
  out.sid.reserve(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Eigen::MatrixXcd m(blocks[b].m1, blocks[b].m2);
    for (std::size_t k = 0; k < blocks[b].m2; ++k)
      for (std::size_t l = 0; l < blocks[b].m1; ++l)
        m(l, k) = sample({NodeId::Kind::Sid, b, l, k});
    out.sid.push_back(std::move(m));
  }
  out.ce.resize(plan.m_ce());
  for (std::size_t i = 0; i < plan.m_ce(); ++i) out.ce(i) = sample({NodeId::Kind::Ce, 0, i, 0});
  return out;
}

Complex phi_row(const SamplingPlan& plan, const NodeId& node, const IndexVector& n) {
  return eval_product(plan.assign(), n, plan.point(node));
}

ColumnEvaluator::ColumnEvaluator(const BasisAssignment& assign, const DimensionSet& dims,
                                 std::span<const IndexVector> columns)
    : N_(assign.N()), width_(dims.size()) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> ids;
  auto id_of = [&](std::uint32_t pos, std::uint32_t value, BasisKind kind) {
    auto [it, inserted] = ids.try_emplace({pos, value}, static_cast<std::uint32_t>(factors_.size()));
    if (inserted) factors_.push_back({pos, value, kind});
    return it->second;
  };
  auto d = dims.dims();
  column_factors_.reserve(columns.size());
  for (const auto& n : columns) {
    std::vector<std::uint32_t> list;
    for (const auto& e : n.entries()) {
      auto it = std::lower_bound(d.begin(), d.end(), e.dim);
      if (it == d.end() || *it != e.dim)
        throw std::invalid_argument("ColumnEvaluator: index " + to_string(n) +
                                    " has support outside the coordinate set");
      if (e.value >= N_) throw std::out_of_range("ColumnEvaluator: index value >= N");
    }
    for (std::uint32_t pos = 0; pos < d.size(); ++pos) {
      const auto kind = assign.kind(d[pos]);
      const auto v = n.at(d[pos]);
      if (v == 0 && kind != BasisKind::LegendrePreconditioned) continue;
      list.push_back(id_of(pos, v, kind));
    }
    column_factors_.push_back(std::move(list));
  }
}

void ColumnEvaluator::factors(std::span<const double> coords, std::span<Complex> values) const {
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    values[f] = detail::basis_value(fac.kind, fac.value, coords[fac.position], N_);
  }
}

void ColumnEvaluator::row(std::span<const double> coords, std::span<Complex> out) const {
  if (coords.size() != width_ || out.size() != column_factors_.size())
    throw std::invalid_argument("ColumnEvaluator::row: size mismatch");
  std::vector<Complex> values(factors_.size());
  factors(coords, values);
  for (std::size_t c = 0; c < column_factors_.size(); ++c) {
    Complex v{1.0, 0.0};
    for (auto f : column_factors_[c]) v *= values[f];
    out[c] = v;
  }
}

Eigen::MatrixXcd ColumnEvaluator::matrix(std::span<const double> nodes, std::size_t rows,
                                         bool conjugate) const {
  if (nodes.size() != rows * width_) throw std::invalid_argument("ColumnEvaluator::matrix: size mismatch");
  Eigen::MatrixXcd out(rows, column_factors_.size());
  std::vector<Complex> values(factors_.size());
  for (std::size_t r = 0; r < rows; ++r) {
    factors(nodes.subspan(r * width_, width_), values);
    for (std::size_t c = 0; c < column_factors_.size(); ++c) {
      Complex v{1.0, 0.0};
      for (auto f : column_factors_[c]) v *= values[f];
      out(r, c) = conjugate ? std::conj(v) : v;
    }
  }
  return out;
}

Eigen::MatrixXcd phi_apply_sid(const SamplingPlan& plan, std::size_t block,
                               const SparseCoefficients& coeffs) {
  if (block >= plan.blocks().size()) throw std::out_of_range("phi_apply_sid: unknown block");
  const auto& blk = plan.blocks()[block];
  if (coeffs.empty()) return Eigen::MatrixXcd::Zero(blk.m1, blk.m2);
  std::vector<IndexVector> w_part, z_part;
  Eigen::VectorXcd c(coeffs.size());
  std::size_t i = 0;
  for (const auto& [n, value] : coeffs) {
    w_part.push_back(restrict(n, blk.w_dims));
    z_part.push_back(restrict(n, blk.z_dims));
    c(i++) = value;
  }
  // T_n(rho_S(w, z)) = T_{S;n}(w) T_{S^c;n}(z), so the block is A_w diag(c) A_z^T.
  const auto a_w = ColumnEvaluator(plan.assign(), blk.w_dims, w_part).matrix(blk.w_nodes, blk.m1);
  const auto a_z = ColumnEvaluator(plan.assign(), blk.z_dims, z_part).matrix(blk.z_nodes, blk.m2);
  return (a_w * c.asDiagonal()) * a_z.transpose();
}

std::vector<Eigen::MatrixXcd> phi_apply_sid_all(const SamplingPlan& plan,
                                                const SparseCoefficients& coeffs) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(plan.blocks().size());
  for (std::size_t b = 0; b < plan.blocks().size(); ++b) out.push_back(phi_apply_sid(plan, b, coeffs));
  return out;
}

Eigen::VectorXcd phi_apply_ce(const SamplingPlan& plan, const SparseCoefficients& coeffs) {
  if (coeffs.empty()) return Eigen::VectorXcd::Zero(plan.m_ce());
  CeOperator op(plan, coeffs.support());
  Eigen::VectorXcd u(coeffs.size());
  std::size_t i = 0;
  for (const auto& [_, value] : coeffs) u(i++) = value;
  return op.apply(u);
}

SparseCoefficients phi_adjoint_apply(const SamplingPlan& plan, const Eigen::VectorXcd& residual,
                                     const std::vector<IndexVector>& omega) {
  if (static_cast<std::size_t>(residual.size()) != plan.m_ce())
    throw std::invalid_argument("phi_adjoint_apply: residual length != m_CE");
  SparseCoefficients out;
  if (omega.empty()) return out;
  CeOperator op(plan, omega);
  const Eigen::VectorXcd g = op.adjoint(residual);
  for (std::size_t i = 0; i < omega.size(); ++i) out[omega[i]] = g(i);
  return out;
}

CeOperator::CeOperator(const SamplingPlan& plan, std::vector<IndexVector> omega)
    : plan_(plan),
      omega_(std::move(omega)),
      columns_(plan.assign(), DimensionSet::all(plan.dimension()), omega_) {
  if (plan_.m_ce() * omega_.size() <= kDenseLimit)
    dense_ = columns_.matrix(plan_.ce_nodes(), plan_.m_ce());
}

Eigen::VectorXcd CeOperator::apply(const Eigen::VectorXcd& u) const {
  if (static_cast<std::size_t>(u.size()) != omega_.size())
    throw std::invalid_argument("CeOperator::apply: size mismatch");
  if (dense_) return *dense_ * u;
  const std::size_t D = plan_.dimension();
  Eigen::VectorXcd out(plan_.m_ce());
  std::vector<Complex> row(omega_.size());
  for (std::size_t i = 0; i < plan_.m_ce(); ++i) {
    columns_.row(plan_.ce_nodes().subspan(i * D, D), row);
    Complex acc{};
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * u(c);
    out(i) = acc;
  }
  return out;
}

Eigen::VectorXcd CeOperator::adjoint(const Eigen::VectorXcd& r) const {
  if (static_cast<std::size_t>(r.size()) != plan_.m_ce())
    throw std::invalid_argument("CeOperator::adjoint: size mismatch");
  if (dense_) return dense_->adjoint() * r;
  const std::size_t D = plan_.dimension();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(omega_.size());
  std::vector<Complex> row(omega_.size());
  for (std::size_t i = 0; i < plan_.m_ce(); ++i) {
    columns_.row(plan_.ce_nodes().subspan(i * D, D), row);
    for (std::size_t c = 0; c < row.size(); ++c) out(c) += std::conj(row[c]) * r(i);
  }
  return out;
}

}  // namespace bopb
