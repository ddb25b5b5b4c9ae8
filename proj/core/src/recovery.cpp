#include "bopb/recovery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

namespace bopb {

namespace {

void check_finite(const Eigen::VectorXcd& x, const char* what) {
  if (!x.allFinite()) throw NumericalFailure(std::string("least squares: non-finite ") + what);
}

std::vector<IndexVector> merged(std::vector<IndexVector> a, const std::vector<IndexVector>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

void RecoveryConfig::validate() const {
  if (s < 1) throw std::invalid_argument("recovery: s must be >= 1");
  if (kappa < 1) throw std::invalid_argument("recovery: kappa must be >= 1");
  if (cg_iters < 1) throw std::invalid_argument("recovery: cg_iters must be >= 1");
  if (stagnation_window < 2) throw std::invalid_argument("recovery: stagnation window must be >= 2");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::ResidualIncrease: return "residual_increase";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::SupportStagnation: return "support_stagnation";
  }
  return "unknown";
}

SparseCoefficients cg_restricted_ls(const SamplingPlan& plan, const std::vector<IndexVector>& omega,
                                    const Eigen::VectorXcd& y_ce, const SparseCoefficients& init,
                                    std::size_t iters) {
  if (static_cast<std::size_t>(y_ce.size()) != plan.m_ce())
    throw std::invalid_argument("cg_restricted_ls: y_ce length != m_CE");
  SparseCoefficients out;
  if (omega.empty()) return out;

  const CeOperator op(plan, omega);
  const double scale = 1.0 / std::sqrt(static_cast<double>(plan.m_ce()));
  Eigen::VectorXcd u(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) u(i) = init.get(omega[i]);

  Eigen::VectorXcd r = scale * (y_ce - op.apply(u));
  Eigen::VectorXcd z = scale * op.adjoint(r);
  Eigen::VectorXcd p = z;
  double zz = z.squaredNorm();
  for (std::size_t it = 0; it < iters && zz > 0.0; ++it) {
    const Eigen::VectorXcd w = scale * op.apply(p);
    const double ww = w.squaredNorm();
    if (ww == 0.0) break;
    const double alpha = zz / ww;
    u += alpha * p;
    r -= alpha * w;
    z = scale * op.adjoint(r);
    const double zz_next = z.squaredNorm();
    p = z + (zz_next / zz) * p;
    zz = zz_next;
    check_finite(u, "iterate");
  }
  check_finite(u, "iterate");
  for (std::size_t i = 0; i < omega.size(); ++i) out[omega[i]] = u(i);
  return out;
}

SparseCoefficients prune(const SparseCoefficients& b, std::size_t s) {
  std::vector<std::pair<const IndexVector*, Complex>> entries;
  for (const auto& [n, c] : b)
    if (c != Complex{}) entries.emplace_back(&n, c);
  const std::size_t k = std::min(s, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k), entries.end(),
                    [](const auto& x, const auto& y) {
                      const double nx = std::norm(x.second), ny = std::norm(y.second);
                      if (nx != ny) return nx > ny;
                      return *x.first < *y.first;
                    });
  SparseCoefficients out;
  for (std::size_t i = 0; i < k; ++i) out[*entries[i].first] = entries[i].second;
  return out;
}

RecoveryResult cosamp(const std::vector<Eigen::MatrixXcd>& y_sid, const Eigen::VectorXcd& y_ce,
                      const SamplingPlan& plan, const RecoveryConfig& cfg) {
  cfg.validate();
  if (y_sid.size() != plan.blocks().size())
    throw std::invalid_argument("cosamp: y_sid has the wrong number of blocks");
  for (std::size_t b = 0; b < y_sid.size(); ++b)
    if (static_cast<std::size_t>(y_sid[b].rows()) != plan.blocks()[b].m1 ||
        static_cast<std::size_t>(y_sid[b].cols()) != plan.blocks()[b].m2)
      throw std::invalid_argument("cosamp: y_sid block shape does not match the plan");
  if (static_cast<std::size_t>(y_ce.size()) != plan.m_ce())
    throw std::invalid_argument("cosamp: y_ce length != m_CE");

  const auto start = std::chrono::steady_clock::now();
  const auto sid_cfg = cfg.support_config();
  validate_support_config(plan, sid_cfg);

  RecoveryResult result;
  SparseCoefficients a;  // a^{k-1}
  std::vector<std::vector<IndexVector>> supports{{}};  // supp(a^0) = empty
  std::vector<Eigen::MatrixXcd> v_sid = y_sid;
  Eigen::VectorXcd v_ce = y_ce;
  bool warned = false;

  for (std::size_t k = 1;; ++k) {
    auto identified = support_id(v_sid, plan, sid_cfg);
    const auto omega = merged(identified, a.support());
    if (omega.size() > plan.m_ce() && !warned) {
      result.warnings.push_back("least-squares system is underdetermined: |Omega| = " +
                                std::to_string(omega.size()) + " > m_CE = " + std::to_string(plan.m_ce()));
      warned = true;
    }
    const auto b = cg_restricted_ls(plan, omega, y_ce, a, cfg.cg_iters);
    auto a_k = prune(b, cfg.s);

    const auto phi_sid = phi_apply_sid_all(plan, a_k);
    for (std::size_t i = 0; i < v_sid.size(); ++i) v_sid[i] = y_sid[i] - phi_sid[i];
    const Eigen::VectorXcd v_ce_old = std::move(v_ce);
    v_ce = y_ce - phi_apply_ce(plan, a_k);

    result.iterations = k;
    result.residual_history.push_back(v_ce.norm());
    result.identified.push_back(std::move(identified));
    supports.push_back(a_k.support());
    result.support_history.push_back(supports.back());
    result.iterates.push_back(a_k);

    // No predecessor residual exists at k = 1, so the increase test starts at k = 2.
    if (k > 1 && v_ce.squaredNorm() > v_ce_old.squaredNorm()) {
      result.stop_reason = StopReason::ResidualIncrease;
      result.coeffs = std::move(a);
      break;
    }
    const std::size_t window = cfg.stagnation_window;
    if (supports.size() >= window &&
        std::all_of(supports.end() - static_cast<std::ptrdiff_t>(window), supports.end(),
                    [&](const auto& sup) { return sup == supports.back(); })) {
      result.stop_reason = StopReason::SupportStagnation;
      result.coeffs = std::move(a_k);
      break;
    }
    if (k >= cfg.kappa) {
      result.stop_reason = StopReason::MaxIterations;
      result.coeffs = std::move(a_k);
      break;
    }
    a = std::move(a_k);
  }
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string result_to_json(const RecoveryResult& result) {
  using nlohmann::json;
  json j;
  j["coefficients"] = json::array();
  for (const auto& [n, c] : result.coeffs)
    j["coefficients"].push_back({{"index", to_string(n)}, {"re", c.real()}, {"im", c.imag()}});
  j["iterations"] = result.iterations;
  j["stop_reason"] = to_string(result.stop_reason);
  j["residual_history"] = result.residual_history;
  j["support_sizes"] = json::array();
  for (const auto& sup : result.support_history) j["support_sizes"].push_back(sup.size());
  j["wall_time_s"] = result.wall_time_s;
  j["warnings"] = result.warnings;
  return j.dump(2);
}

}  // namespace bopb
