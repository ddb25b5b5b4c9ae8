#ifndef BOPB_TESTBED_HPP_
#define BOPB_TESTBED_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bopb/bases.hpp"
#include "bopb/coefficients.hpp"
#include "bopb/index.hpp"
#include "bopb/recovery.hpp"
#include "bopb/sampling.hpp"

namespace bopb {

// ---- random helpers (replayable across standard libraries) ----

/// Uniform integer in [0, n) by rejection on raw draws.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);
/// Standard normal via the polar method on uniform01.
double standard_normal(Rng& rng);
/// splitmix64 finalizer of (seed, stream); used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// ---- exactly sparse trial signals ----

struct TrialSignal {
  BasisAssignment assign;
  SparseCoefficients coeffs;  // support in ascending order, values +-1

  std::vector<IndexVector> support() const { return coeffs.support(); }
  /// sum_n c_n prod_j phi_{j,n_j}(xi) in the function-space basis.
  Complex operator()(std::span<const double> xi) const;
};

/// s distinct indices drawn uniformly from I_{N,d}, coefficients fair +-1.
/// Throws std::invalid_argument if s exceeds |I_{N,d}|.
TrialSignal gen_trial(const BasisAssignment& assign, std::size_t s, Rng& rng);

// ---- noise ----

constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

/// y + sigma (||y|| / ||g||) g over all SID and CE entries jointly, sigma = 10^{-snr_db/20}.
/// g is complex standard Gaussian (variance 1/2 per part) or real when `real_noise`.
/// An infinite snr_db returns the samples unchanged.
SampleSet add_noise(const SampleSet& samples, double snr_db, Rng& rng, bool real_noise = false);

// ---- univariate B-spline factors ----

enum class Factor1D { N2, N4, N6, B3, B5 };

std::string_view factor_name(Factor1D f);
bool is_periodic(Factor1D f);

/// C_m normalizing the periodic B-spline of order m in {2,4,6} to unit L2 norm.
double periodic_bspline_constant(int m);
/// C_m sinc(pi n/m)^m (-1)^n.
double periodic_bspline_coeff(int m, long n);
/// N_m(x) on [0,1).
double periodic_bspline(int m, double x);
/// B3 or B5 on [-1,1]; throws std::domain_error outside.
double cheb_bspline(Factor1D which, double x);
/// Chebyshev coefficient <B, T_n> w.r.t. the arcsine measure (Gauss-Chebyshev, 4096 nodes).
double cheb_bspline_coeff(Factor1D which, std::uint32_t n);
/// Legendre coefficient <B, Lbar_n> w.r.t. dx/2 (exact piecewise Gauss-Legendre).
double legendre_bspline_coeff(Factor1D which, std::uint32_t n);
/// Coefficients for n = 0..count-1 in one pass.
std::vector<double> cheb_bspline_coeffs(Factor1D which, std::size_t count);
std::vector<double> legendre_bspline_coeffs(Factor1D which, std::size_t count);

/// Value of a 1-D factor in its own coordinate.
double eval_factor(Factor1D f, double x);
/// Coefficient of the factor at basis index n for a dim of the given kind.
double factor_coeff(Factor1D f, BasisKind kind, std::uint32_t n, std::size_t N);
/// <f, g> in the dim's measure (uniform on [0,1) for Fourier, arcsine for
/// Chebyshev, dx/2 for preconditioned Legendre).
double factor_inner(Factor1D f, Factor1D g, BasisKind kind);
/// Integral of the factor in the dim's measure.
double factor_mean(Factor1D f, BasisKind kind);

// ---- test functions ----

struct TestTerm {
  std::vector<std::pair<std::uint32_t, Factor1D>> factors;  // sorted by dim
};

/// Sum of separable products of 1-D B-spline factors, bound to a basis assignment.
class TestFunction {
 public:
  /// `periodic10`, `chebleg7`, or `mixed10`. Throws std::invalid_argument for
  /// unknown names or a basis incompatible with the function's factors.
  static TestFunction make(std::string_view name, const BasisAssignment& assign);

  const std::string& name() const { return name_; }
  const BasisAssignment& assign() const { return assign_; }
  std::span<const TestTerm> terms() const { return terms_; }
  static std::string default_basis(std::string_view name);

  /// f(xi), throwing std::domain_error outside the domain.
  double operator()(std::span<const double> xi) const;
  double eval_term(std::size_t t, std::span<const double> xi) const;

  /// The function's coefficient at n in the assignment's (weighted) basis.
  double true_coefficient(const IndexVector& n) const;
  /// ||f||^2 in the product measure.
  double squared_norm() const { return squared_norm_; }

 private:
  TestFunction() = default;

  std::string name_;
  BasisAssignment assign_;
  std::vector<TestTerm> terms_;
  // coeff_[t][i][n]: coefficient of the i-th factor of term t at basis index n.
  std::vector<std::vector<std::vector<double>>> coeff_;
  double squared_norm_ = 0.0;
};

/// sqrt(||f||^2 - sum_{n in supp a} |f_n|^2 + sum_{n in supp a} |a_n - f_n|^2) / ||f||.
double relative_l2_error(const SparseCoefficients& a, const TestFunction& f);

/// supp(a) equals the trial's support exactly.
bool success(const SparseCoefficients& a, const TrialSignal& trial);

/// ||a - c|| / ||c||.
double relative_coefficient_error(const SparseCoefficients& a, const SparseCoefficients& c);

}  // namespace bopb

#endif  // BOPB_TESTBED_HPP_
