#include "bopb/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "bopb/experiment.hpp"
#include "bopb/recovery.hpp"
#include "bopb/sampling.hpp"
#include "bopb/supportid.hpp"
#include "bopb/testbed.hpp"

namespace bopb {

namespace {

// All n in [N]^D with weight <= d, by odometer over the dense form.
std::vector<IndexVector> enumerate_space(std::size_t N, std::size_t D, std::size_t d) {
  std::vector<IndexVector> out;
  std::vector<std::uint32_t> dense(D, 0);
  for (;;) {
    const auto nz = static_cast<std::size_t>(std::count_if(dense.begin(), dense.end(), [](auto v) { return v != 0; }));
    if (nz <= d) out.push_back(IndexVector::from_dense(dense));
    std::size_t j = 0;
    while (j < D && ++dense[j] == N) dense[j++] = 0;
    if (j == D) break;
  }
  return out;
}

SparseCoefficients random_coeffs(std::span<const IndexVector> support, Rng& rng) {
  SparseCoefficients c;
  for (const auto& n : support) c[n] = Complex(standard_normal(rng), standard_normal(rng));
  return c;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

// Exact-sparse samples of a coefficient vector on a plan.
SampleSet exact_samples(const SamplingPlan& plan, const SparseCoefficients& c) {
  return {phi_apply_sid_all(plan, c), phi_apply_ce(plan, c)};
}

}  // namespace

PropertyCheck check_sieve_containment(std::uint64_t seed) {
  PropertyCheck r{"sieve_containment", true, {}};
  Rng rng(seed);
  std::size_t stages = 0;
  struct Case {
    std::string basis;
    std::size_t N, d, s;
  };
  const std::vector<Case> cases{{"F*5", 8, 5, 3}, {"C*4", 10, 2, 2}, {"L,F,C,F", 6, 3, 4}, {"F*6", 16, 6, 1}};
  for (const auto& cs : cases) {
    const auto assign = BasisAssignment::parse(cs.basis, cs.N, cs.d);
    for (int rep = 0; rep < 3; ++rep) {
      const auto plan = draw_plan(assign, singleton_partition(assign.dimension()), 3 * cs.s + 2, cs.s + 1,
                                  10 * cs.s, rng());
      // Sparse signal plus pure noise in the SID blocks: exercises both informative and flat scores.
      const auto sig = gen_trial(assign, cs.s, rng);
      auto v = phi_apply_sid_all(plan, sig.coeffs);
      if (rep == 2)
        for (auto& m : v)
          for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = Complex(standard_normal(rng), standard_normal(rng));
      SupportIdTrace trace;
      SupportIdConfig cfg{cs.s};
      const auto out = support_id(v, plan, cfg, &trace);
      if (out.size() > 2 * cs.s) {
        r.pass = false;
        r.detail = "final output larger than 2s";
      }
      for (const auto& st : trace.stages) {
        ++stages;
        const std::set<IndexVector> cand(st.candidates.begin(), st.candidates.end());
        if (st.kept.size() > 2 * cs.s || st.kept.size() > cand.size() ||
            !std::all_of(st.kept.begin(), st.kept.end(), [&](const auto& n) { return cand.count(n) != 0; })) {
          r.pass = false;
          r.detail = "stage " + std::to_string(st.stage) + " kept an index outside its candidates or too many";
        }
      }
    }
  }
  if (r.pass) r.detail = std::to_string(stages) + " stages checked";
  return r;
}

PropertyCheck check_single_atom_energy(std::uint64_t seed) {
  PropertyCheck r{"single_atom_energy", true, {}};
  Rng rng(seed);
  double worst = 0.0;
  const std::size_t D = 6, N = 16;
  const auto assign = BasisAssignment::uniform(BasisKind::Fourier, D, N, D);
  for (int rep = 0; rep < 5; ++rep) {
    const auto plan = draw_plan(assign, singleton_partition(D), 7, 5, 10, rng());
    const auto atom = gen_trial(assign, 1, rng).support().front();
    SparseCoefficients c;
    c[atom] = 1.0;
    const auto v = phi_apply_sid_all(plan, c);
    for (std::size_t b = 0; b < plan.blocks().size(); ++b) {
      const auto& blk = plan.blocks()[b];
      const double e = energy_estimate(v[b], blk, restrict(atom, blk.w_dims), assign);
      worst = std::max(worst, std::abs(e - 1.0));
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = "max |E - 1| = " + fmt(worst);
  return r;
}

PropertyCheck check_phi_dense(std::uint64_t seed) {
  PropertyCheck r{"phi_dense_oracle", true, {}};
  Rng rng(seed);
  const std::size_t N = 4, D = 3, d = 3;
  const auto cols = enumerate_space(N, D, d);
  double worst = 0.0;
  for (const std::string basis : {"F*3", "C*3", "L*3", "F,C,L", "L,L,F"}) {
    const auto assign = BasisAssignment::parse(basis, N, d);
    const auto plan = draw_plan(assign, singleton_partition(D), 4, 3, 9, rng());
    const auto c = random_coeffs(cols, rng);
    Eigen::VectorXcd x(cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) x(i) = c.get(cols[i]);

    auto dense = [&](const std::vector<std::vector<double>>& pts) {
      Eigen::MatrixXcd A(pts.size(), cols.size());
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t k = 0; k < cols.size(); ++k) A(i, k) = eval_product(assign, cols[k], pts[i]);
      return A;
    };
    for (std::size_t b = 0; b < plan.blocks().size(); ++b) {
      const auto& blk = plan.blocks()[b];
      std::vector<std::vector<double>> pts;
      for (std::size_t k = 0; k < blk.m2; ++k)
        for (std::size_t l = 0; l < blk.m1; ++l) pts.push_back(blk.point(l, k));  // column-major
      const Eigen::VectorXcd ref = dense(pts) * x;
      const Eigen::MatrixXcd got = phi_apply_sid(plan, b, c);
      worst = std::max(worst, (ref - got.reshaped()).cwiseAbs().maxCoeff());
    }
    std::vector<std::vector<double>> ce;
    for (std::size_t i = 0; i < plan.m_ce(); ++i) ce.emplace_back(plan.ce_node(i).begin(), plan.ce_node(i).end());
    const Eigen::MatrixXcd A = dense(ce);
    worst = std::max(worst, (A * x - phi_apply_ce(plan, c)).cwiseAbs().maxCoeff());

    Eigen::VectorXcd res(plan.m_ce());
    for (Eigen::Index i = 0; i < res.size(); ++i) res(i) = Complex(standard_normal(rng), standard_normal(rng));
    const Eigen::VectorXcd adj_ref = A.adjoint() * res;
    const auto adj = phi_adjoint_apply(plan, res, cols);
    for (std::size_t k = 0; k < cols.size(); ++k) worst = std::max(worst, std::abs(adj_ref(k) - adj.get(cols[k])));
  }
  r.pass = worst <= 1e-12;
  r.detail = "max abs deviation = " + fmt(worst);
  return r;
}

PropertyCheck check_heavy_set_expansion(std::uint64_t seed) {
  PropertyCheck r{"heavy_set_expansion", true, {}};
  Rng rng(seed);
  std::size_t checks = 0;
  for (std::size_t D = 2; D <= 4; ++D) {
    for (std::size_t N = 2; N <= 3; ++N) {
      for (std::size_t d = 1; d <= D; ++d) {
        const auto space = enumerate_space(N, D, d);
        for (int rep = 0; rep < 3; ++rep) {
          // Dense and sparse coefficient vectors.
          std::map<IndexVector, double> energy;
          for (const auto& n : space)
            if (rep == 0 || uniform01(rng) < 0.3) energy[n] = std::norm(Complex(standard_normal(rng), standard_normal(rng)));

          auto partial = [&](const DimensionSet& s) {
            std::map<IndexVector, double> out;
            for (const auto& [n, e] : energy) out[restrict(n, s)] += e;
            return out;
          };
          auto heavy = [](const std::map<IndexVector, double>& part, double tau2) {
            std::set<IndexVector> out;
            for (const auto& [n, e] : part)
              if (e >= tau2) out.insert(n);
            return out;
          };
          // Every ordered pair of disjoint nonempty subsets via base-3 labels.
          std::size_t labels = 1;
          for (std::size_t j = 0; j < D; ++j) labels *= 3;
          for (std::size_t code = 0; code < labels; ++code) {
            std::vector<std::uint32_t> s1, s2;
            for (std::size_t j = 0, c = code; j < D; ++j, c /= 3) {
              if (c % 3 == 1) s1.push_back(static_cast<std::uint32_t>(j));
              if (c % 3 == 2) s2.push_back(static_cast<std::uint32_t>(j));
            }
            if (s1.empty() || s2.empty()) continue;
            const DimensionSet S1(D, s1), S2(D, s2), U = S1.united(S2);
            const auto p1 = partial(S1), p2 = partial(S2), pu = partial(U);
            std::set<double> taus;
            for (const auto& [_, e] : pu) taus.insert(e);
            for (double tau2 : taus) {
              // Coarser partial sums are formed in a different order; allow for rounding.
              const auto h1 = heavy(p1, tau2 * (1 - 1e-12)), h2 = heavy(p2, tau2 * (1 - 1e-12));
              for (const auto& n : heavy(pu, tau2)) {
                ++checks;
                if (!h1.count(restrict(n, S1)) || !h2.count(restrict(n, S2)) ||
                    !(merge_disjoint(restrict(n, S1), restrict(n, S2)) == n)) {
                  r.pass = false;
                  r.detail = "counterexample " + to_string(n) + " at D=" + std::to_string(D);
                }
              }
            }
          }
        }
      }
    }
  }
  if (r.pass) r.detail = std::to_string(checks) + " memberships checked";
  return r;
}

PropertyCheck check_orthonormality(std::uint64_t seed, std::size_t samples) {
  PropertyCheck r{"mc_orthonormality", true, {}};
  Rng rng(seed);
  const std::size_t N = 6;
  double worst = 0.0;
  std::string where;
  for (auto kind : {BasisKind::Fourier, BasisKind::Chebyshev, BasisKind::LegendrePreconditioned}) {
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(N, N);
    Eigen::VectorXcd row(N);
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = sample_node(kind, rng);
      for (std::uint32_t n = 0; n < N; ++n) row(n) = eval_1d(kind, n, x, N);
      G.noalias() += row.conjugate() * row.transpose();
    }
    G /= static_cast<double>(samples);
    const double dev = (G - Eigen::MatrixXcd::Identity(N, N)).cwiseAbs().maxCoeff();
    if (dev > worst) {
      worst = dev;
      where = std::string(1, basis_letter(kind));
    }
  }
  r.pass = worst <= 5e-3;
  r.detail = "max |G - I| = " + fmt(worst) + " (" + where + ")";
  return r;
}

PropertyCheck check_determinism(std::uint64_t seed) {
  PropertyCheck r{"cosamp_determinism", true, {}};
  ExperimentConfig cfg;
  cfg.basis = "F,C,L,F,F,C";
  cfg.N = 16;
  cfg.D = {6};
  cfg.s = {4};
  cfg.m1_factors = {3.0};
  cfg.snr_db = 20.0;
  cfg.trials = 1;
  cfg.seed = seed;
  const auto point = expand_points(cfg).front();
  for (std::size_t t = 0; t < 3; ++t) {
    const auto a = run_trial(cfg, point, t), b = run_trial(cfg, point, t);
    const bool same = a.result.coeffs == b.result.coeffs && a.result.iterations == b.result.iterations &&
                      a.result.residual_history == b.result.residual_history &&
                      a.result.support_history == b.result.support_history &&
                      a.result.identified == b.result.identified;
    if (!same) {
      r.pass = false;
      r.detail = "trial " + std::to_string(t) + " differs between runs";
      return r;
    }
  }
  r.detail = "3 trials replayed bit-identically";
  return r;
}

PropertyCheck check_contraction(std::uint64_t seed, std::size_t trials) {
  PropertyCheck r{"noiseless_contraction", true, {}};
  const std::size_t D = 10, N = 64, s = 10;
  const auto assign = BasisAssignment::uniform(BasisKind::Fourier, D, N, D);
  RecoveryConfig rc;
  rc.s = s;
  std::size_t rounds = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    const auto sig = gen_trial(assign, s, rng);
    const auto plan = draw_plan(assign, singleton_partition(D), 3 * s, s, 50 * s, rng());
    const auto y = exact_samples(plan, sig.coeffs);
    const auto res = cosamp(y.sid, y.ce, plan, rc);
    const auto truth = sig.support();
    double prev_err = sig.coeffs.norm();  // a^0 = 0
    for (std::size_t k = 0; k < res.iterates.size(); ++k) {
      const double err = distance(sig.coeffs, res.iterates[k]);
      // Identified set merged with the previous support, as the least squares sees it.
      std::set<IndexVector> omega(res.identified[k].begin(), res.identified[k].end());
      if (k > 0) omega.insert(res.support_history[k - 1].begin(), res.support_history[k - 1].end());
      if (std::includes(omega.begin(), omega.end(), truth.begin(), truth.end())) {
        ++rounds;
        worst = std::max(worst, (err - 1e-8) / prev_err);
        if (err > 0.5 * prev_err + 1e-8) {
          r.pass = false;
          r.detail = "trial " + std::to_string(t) + " round " + std::to_string(k + 1) + ": " + fmt(err) +
                     " > 0.5 * " + fmt(prev_err);
          return r;
        }
      }
      prev_err = err;
    }
  }
  if (rounds == 0) {
    r.pass = false;
    r.detail = "no round identified the full support";
    return r;
  }
  r.detail = std::to_string(rounds) + " rounds, worst ratio " + fmt(worst);
  return r;
}

std::vector<PropertyCheck> run_property_suite(std::uint64_t seed) {
  return {check_sieve_containment(seed),       check_single_atom_energy(seed + 1), check_phi_dense(seed + 2),
          check_heavy_set_expansion(seed + 3), check_orthonormality(seed + 4),     check_determinism(seed + 5),
          check_contraction(seed + 6)};
}

}  // namespace bopb
