#ifndef BOPB_BASES_HPP_
#define BOPB_BASES_HPP_

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bopb/index.hpp"

namespace bopb {

using Complex = std::complex<double>;
using Rng = std::mt19937_64;

/// Uniform double in [0,1) from the top 53 bits of one draw (replayable
/// across standard libraries, unlike std::uniform_real_distribution).
double uniform01(Rng& rng);

enum class BasisKind { Fourier, Chebyshev, LegendrePreconditioned };

char basis_letter(BasisKind kind);

/// Per-dimension basis kinds plus the search-space parameters N and d.
class BasisAssignment {
 public:
  BasisAssignment() = default;
  /// Throws std::invalid_argument if N < 2, d outside [1, D], or kinds empty.
  BasisAssignment(std::vector<BasisKind> kinds, std::size_t N, std::size_t d);

  /// Compact form, e.g. `C,L,F*8`: comma separated letters with optional `*count`.
  static BasisAssignment parse(std::string_view layout, std::size_t N, std::size_t d);
  static BasisAssignment uniform(BasisKind kind, std::size_t D, std::size_t N, std::size_t d);
  /// Chebyshev on dims 0, floor(D/2), D-2; preconditioned Legendre on 1,
  /// floor(D/2)-1, D-1; Fourier elsewhere. Requires D >= 6.
  static BasisAssignment mixed_layout(std::size_t D, std::size_t N, std::size_t d);

  std::size_t dimension() const { return kinds_.size(); }
  std::size_t N() const { return N_; }
  std::size_t d() const { return d_; }
  BasisKind kind(std::size_t dim) const { return kinds_[dim]; }
  std::span<const BasisKind> kinds() const { return kinds_; }
  /// Dimensions carrying the preconditioned Legendre basis.
  std::span<const std::uint32_t> legendre_dims() const { return legendre_dims_; }

  /// Whether x lies in the per-dimension domain ([0,1) Fourier, [-1,1] otherwise).
  bool in_domain(std::size_t dim, double x) const;

  std::string to_string() const;

 private:
  std::vector<BasisKind> kinds_;
  std::vector<std::uint32_t> legendre_dims_;
  std::size_t N_ = 0;
  std::size_t d_ = 0;
};

/// Index-to-frequency map for Fourier dimensions: n for n <= N/2, n - N beyond.
long fourier_frequency(std::uint32_t n, std::size_t N);

/// sqrt(2n+1) P_n(x), orthonormal for dx/2 on [-1,1].
double legendre_normalized(std::uint32_t n, double x);

/// Measurement-space 1-D basis function: e^{2 pi i w(n) x}, sqrt(2) cos(n arccos x)
/// (1 for n = 0), or Q_n(x) = sqrt(pi/2) (1-x^2)^{1/4} Lbar_n(x).
/// Throws std::domain_error for x outside the domain, std::out_of_range for n >= N.
Complex eval_1d(BasisKind kind, std::uint32_t n, double x, std::size_t N);

/// Function-space 1-D basis: identical to eval_1d except that preconditioned
/// Legendre dims use the plain orthonormal Legendre polynomial Lbar_n. Samples of
/// a function built from these, multiplied by sample_weight(), expand in eval_1d.
Complex eval_function_1d(BasisKind kind, std::uint32_t n, double x, std::size_t N);

/// T_n(xi) over all D dimensions. Cost O(weight(n) + #Legendre dims).
Complex eval_product(const BasisAssignment& assign, const IndexVector& n,
                     std::span<const double> xi);

/// T_{S;n}(w) = prod_{j in S} T_{j;n_j}(w_j); `w` holds coordinates for the dims
/// of S in increasing order.
Complex eval_restricted(const BasisAssignment& assign, const IndexVector& n,
                        const DimensionSet& s, std::span<const double> w);

/// Function-space analogue of eval_product.
Complex eval_function_product(const BasisAssignment& assign, const IndexVector& n,
                              std::span<const double> xi);

/// Draw from mu_j: uniform on [0,1) for Fourier, Chebyshev (arcsine) law otherwise.
double sample_node(BasisKind kind, Rng& rng);

/// prod over Legendre dims of sqrt(pi/2) (1 - xi_j^2)^{1/4}; 1 if none.
double sample_weight(const BasisAssignment& assign, std::span<const double> xi);

struct BosConstants {
  double K = 1.0;
  std::vector<double> per_dim_max;   // K_j
  std::vector<double> per_dim_zero;  // K^0_j
};

BosConstants bos_constants(const BasisAssignment& assign);

namespace detail {
// Unchecked hot-path variants.
Complex basis_value(BasisKind kind, std::uint32_t n, double x, std::size_t N);
double legendre_weight(double x);
}  // namespace detail

}  // namespace bopb

#endif  // BOPB_BASES_HPP_
