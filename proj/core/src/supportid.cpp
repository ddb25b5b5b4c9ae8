#include "bopb/supportid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace bopb {

namespace {

void check_shape(const Eigen::MatrixXcd& v, const SidBlock& block) {
  if (static_cast<std::size_t>(v.rows()) != block.m1 || static_cast<std::size_t>(v.cols()) != block.m2)
    throw std::invalid_argument("estimator: sample block shape does not match the plan");
}

// Coordinates of `sub` (a subset of the block's w dims) pulled out of the w nodes.
std::vector<double> sub_nodes(const SidBlock& block, const DimensionSet& sub) {
  auto all = block.w_dims.dims();
  std::vector<std::size_t> pos;
  for (auto j : sub.dims()) {
    auto it = std::lower_bound(all.begin(), all.end(), j);
    if (it == all.end() || *it != j) throw std::invalid_argument("estimator: coordinate set mismatch");
    pos.push_back(static_cast<std::size_t>(it - all.begin()));
  }
  std::vector<double> out(block.m1 * pos.size());
  for (std::size_t l = 0; l < block.m1; ++l) {
    auto w = block.w(l);
    for (std::size_t i = 0; i < pos.size(); ++i) out[l * pos.size() + i] = w[pos[i]];
  }
  return out;
}

DimensionSet prefix_union(const std::vector<DimensionSet>& partition, std::size_t upto) {
  DimensionSet out = partition[0];
  for (std::size_t i = 1; i <= upto; ++i) out = out.united(partition[i]);
  return out;
}

void enumerate(const BasisAssignment& assign, std::span<const std::uint32_t> dims, std::size_t pos,
               std::size_t left, std::vector<Entry>& cur, std::vector<IndexVector>& out) {
  if (pos == dims.size()) {
    out.emplace_back(assign.dimension(), cur);
    return;
  }
  enumerate(assign, dims, pos + 1, left, cur, out);
  if (left == 0) return;
  for (std::uint32_t v = 1; v < assign.N(); ++v) {
    cur.push_back({dims[pos], v});
    enumerate(assign, dims, pos + 1, left - 1, cur, out);
    cur.pop_back();
  }
}

void record(SupportIdTrace* trace, SidBlock::Role role, std::size_t stage,
            std::vector<IndexVector> candidates, std::vector<double> scores,
            const std::vector<std::size_t>& order) {
  if (trace == nullptr) return;
  SupportIdStage st;
  st.role = role;
  st.stage = stage;
  for (auto i : order) {
    st.kept.push_back(candidates[i]);
    st.kept_scores.push_back(scores[i]);
  }
  st.candidates = std::move(candidates);
  st.scores = std::move(scores);
  trace->stages.push_back(std::move(st));
}

}  // namespace

double energy_estimate(const Eigen::MatrixXcd& v, const SidBlock& block, const IndexVector& n,
                       const BasisAssignment& assign) {
  return energy_scores(v, block, std::span<const IndexVector>(&n, 1), assign).front();
}

std::vector<double> energy_scores(const Eigen::MatrixXcd& v, const SidBlock& block,
                                  std::span<const IndexVector> candidates,
                                  const BasisAssignment& assign) {
  check_shape(v, block);
  if (candidates.empty()) return {};
  const Eigen::MatrixXcd c =
      ColumnEvaluator(assign, block.w_dims, candidates).matrix(block.w_nodes, block.m1, true);
  const Eigen::MatrixXcd g = v.transpose() * c;
  const double scale = 1.0 / (static_cast<double>(block.m1) * block.m1 * block.m2);
  std::vector<double> out(candidates.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = g.col(i).squaredNorm() * scale;
  return out;
}

std::vector<std::size_t> sieve_order(std::span<const IndexVector> candidates,
                                     std::span<const double> scores, std::size_t keep) {
  if (candidates.size() != scores.size()) throw std::invalid_argument("sieve: size mismatch");
  for (double x : scores)
    if (std::isnan(x)) throw std::runtime_error("sieve: NaN score");
  std::vector<std::size_t> idx(candidates.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t k = std::min(keep, idx.size());
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

std::vector<IndexVector> sieve(std::span<const IndexVector> candidates, std::span<const double> scores,
                               std::size_t keep) {
  std::vector<IndexVector> out;
  for (auto i : sieve_order(candidates, scores, keep)) out.push_back(candidates[i]);
  return out;
}

std::vector<IndexVector> entry_candidates(const BasisAssignment& assign, const DimensionSet& cell,
                                          std::size_t budget) {
  const std::size_t w = std::min(assign.d(), cell.size());
  if (space_cardinality(assign.N(), cell.size(), w) > BigInt(budget))
    throw std::invalid_argument("entry identification: candidate grid for a cell of size " +
                                std::to_string(cell.size()) + " exceeds the budget of " +
                                std::to_string(budget));
  std::vector<IndexVector> out;
  std::vector<Entry> cur;
  enumerate(assign, cell.dims(), 0, w, cur, out);
  std::sort(out.begin(), out.end());
  return out;
}

PairingCandidates pairing_candidates(std::vector<IndexVector> prev, std::vector<IndexVector> next,
                                     std::size_t N, std::size_t d) {
  PairingCandidates out;
  out.prev = std::move(prev);
  out.next = std::move(next);
  for (std::uint32_t m = 0; m < out.next.size(); ++m) {
    for (std::uint32_t p = 0; p < out.prev.size(); ++p) {
      if (out.prev[p].weight() + out.next[m].weight() > d) continue;
      IndexVector c = merge_disjoint(out.prev[p], out.next[m]);
      if (!in_space(c, N, d)) continue;
      out.pairs.emplace_back(p, m);
      out.combined.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<double> pairing_scores(const Eigen::MatrixXcd& v, const SidBlock& block,
                                   const DimensionSet& prefix, const DimensionSet& cell,
                                   const PairingCandidates& cands, const BasisAssignment& assign) {
  check_shape(v, block);
  if (prefix.united(cell) != block.w_dims || !prefix.disjoint(cell))
    throw std::invalid_argument("pairing scores: prefix and cell must split the block's coordinates");
  std::vector<double> out(cands.pairs.size());
  if (out.empty()) return out;

  // T_{S;p+m}(w) = T_{prefix;p}(w) T_{cell;m}(w): one factor table per side.
  const Eigen::MatrixXcd P =
      ColumnEvaluator(assign, prefix, cands.prev).matrix(sub_nodes(block, prefix), block.m1, true);
  const Eigen::MatrixXcd M =
      ColumnEvaluator(assign, cell, cands.next).matrix(sub_nodes(block, cell), block.m1, true);
  const double scale = 1.0 / (static_cast<double>(block.m1) * block.m1 * block.m2);

  std::vector<std::vector<std::size_t>> by_next(cands.next.size());
  for (std::size_t i = 0; i < cands.pairs.size(); ++i) by_next[cands.pairs[i].second].push_back(i);

  const Eigen::MatrixXcd vt = v.transpose();
  Eigen::MatrixXcd psub;
  for (std::size_t m = 0; m < by_next.size(); ++m) {
    const auto& list = by_next[m];
    if (list.empty()) continue;
    const Eigen::MatrixXcd w = vt * M.col(static_cast<Eigen::Index>(m)).asDiagonal();
    Eigen::MatrixXcd g;
    if (list.size() == cands.prev.size()) {
      g = w * P;  // pairs for fixed m are generated in prev order
    } else {
      psub.resize(P.rows(), static_cast<Eigen::Index>(list.size()));
      for (std::size_t c = 0; c < list.size(); ++c) psub.col(c) = P.col(cands.pairs[list[c]].first);
      g = w * psub;
    }
    for (std::size_t c = 0; c < list.size(); ++c) out[list[c]] = g.col(c).squaredNorm() * scale;
  }
  return out;
}

EstimatorScorer::EstimatorScorer(const SamplingPlan& plan, const std::vector<Eigen::MatrixXcd>& v_sid)
    : plan_(plan), v_(v_sid) {
  if (v_.size() != plan_.blocks().size())
    throw std::invalid_argument("support identification: residual has wrong number of blocks");
}

std::vector<double> EstimatorScorer::entry(std::size_t j, std::span<const IndexVector> candidates) {
  return energy_scores(v_[j], plan_.entry_block(j), candidates, plan_.assign());
}

std::vector<double> EstimatorScorer::pairing(std::size_t j, const PairingCandidates& candidates) {
  const std::size_t b = plan_.pairing_steps() + j;
  return pairing_scores(v_[b], plan_.pairing_block(j), prefix_union(plan_.partition(), j - 1),
                        plan_.partition()[j], candidates, plan_.assign());
}

std::vector<IndexVector> entry_identify(const SamplingPlan& plan, std::size_t j,
                                        std::span<const IndexVector> candidates, StageScorer& scorer,
                                        std::size_t keep, SupportIdTrace* trace) {
  if (j >= plan.partition().size()) throw std::out_of_range("entry_identify: unknown cell");
  auto scores = scorer.entry(j, candidates);
  auto order = sieve_order(candidates, scores, keep);
  std::vector<IndexVector> out;
  for (auto i : order) out.push_back(candidates[i]);
  record(trace, SidBlock::Role::EntryId, j, {candidates.begin(), candidates.end()}, std::move(scores),
         order);
  return out;
}

std::vector<IndexVector> pair_step(const SamplingPlan& plan, std::size_t j, std::vector<IndexVector> prev,
                                   std::vector<IndexVector> next, StageScorer& scorer, std::size_t keep,
                                   SupportIdTrace* trace) {
  if (j == 0 || j > plan.pairing_steps()) throw std::out_of_range("pair_step: unknown pairing step");
  const auto& assign = plan.assign();
  auto cands = pairing_candidates(std::move(prev), std::move(next), assign.N(), assign.d());
  auto scores = scorer.pairing(j, cands);
  auto order = sieve_order(cands.combined, scores, keep);
  std::vector<IndexVector> out;
  for (auto i : order) out.push_back(cands.combined[i]);
  record(trace, SidBlock::Role::Pairing, j, std::move(cands.combined), std::move(scores), order);
  return out;
}

void validate_support_config(const SamplingPlan& plan, const SupportIdConfig& cfg) {
  if (cfg.s == 0 || cfg.effective_keep() == 0) throw std::invalid_argument("support identification: keep must be >= 1");
  const auto& assign = plan.assign();
  for (const auto& cell : plan.partition()) {
    const std::size_t w = std::min(assign.d(), cell.size());
    if (space_cardinality(assign.N(), cell.size(), w) > BigInt(cfg.candidate_budget))
      throw std::invalid_argument("support identification: partition cell of size " +
                                  std::to_string(cell.size()) + " exceeds the candidate budget");
  }
}

std::vector<IndexVector> support_id_with(const SamplingPlan& plan, const SupportIdConfig& cfg,
                                         StageScorer& scorer, SupportIdTrace* trace) {
  validate_support_config(plan, cfg);
  const std::size_t keep = cfg.effective_keep();
  const auto& partition = plan.partition();
  std::vector<std::vector<IndexVector>> identified(partition.size());
  for (std::size_t j = 0; j < partition.size(); ++j) {
    auto cands = entry_candidates(plan.assign(), partition[j], cfg.candidate_budget);
    identified[j] = entry_identify(plan, j, cands, scorer, keep, trace);
  }
  auto current = std::move(identified[0]);
  for (std::size_t j = 1; j < partition.size(); ++j)
    current = pair_step(plan, j, std::move(current), std::move(identified[j]), scorer, keep, trace);
  std::sort(current.begin(), current.end());
  return current;
}

std::vector<IndexVector> support_id(const std::vector<Eigen::MatrixXcd>& v_sid, const SamplingPlan& plan,
                                    const SupportIdConfig& cfg, SupportIdTrace* trace) {
  EstimatorScorer scorer(plan, v_sid);
  return support_id_with(plan, cfg, scorer, trace);
}

void write_trace_csv(const SupportIdTrace& trace, std::ostream& out, std::size_t top) {
  out << "stage,role,rank,index,score\n";
  for (const auto& st : trace.stages) {
    const char* role = st.role == SidBlock::Role::EntryId ? "entry" : "pairing";
    const std::size_t n = std::min(top, st.kept.size());
    for (std::size_t r = 0; r < n; ++r)
      out << st.stage << ',' << role << ',' << r << ",\"" << to_string(st.kept[r]) << "\","
          << st.kept_scores[r] << '\n';
  }
}

}  // namespace bopb
