#include "bopb/bases.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bopb {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const double kSqrtHalfPi = std::sqrt(std::numbers::pi / 2.0);

BasisKind kind_from_letter(char c) {
  switch (c) {
    case 'F': case 'f': return BasisKind::Fourier;
    case 'C': case 'c': return BasisKind::Chebyshev;
    case 'L': case 'l': return BasisKind::LegendrePreconditioned;
    default: throw std::invalid_argument(std::string("unknown basis letter '") + c + "'");
  }
}

void check_domain(BasisKind kind, double x) {
  if (kind == BasisKind::Fourier) {
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("Fourier node outside [0,1)");
  } else if (!(x >= -1.0 && x <= 1.0)) {
    throw std::domain_error("node outside [-1,1]");
  }
}

}  // namespace

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

char basis_letter(BasisKind kind) {
  switch (kind) {
    case BasisKind::Fourier: return 'F';
    case BasisKind::Chebyshev: return 'C';
    case BasisKind::LegendrePreconditioned: return 'L';
  }
  return '?';
}

BasisAssignment::BasisAssignment(std::vector<BasisKind> kinds, std::size_t N, std::size_t d)
    : kinds_(std::move(kinds)), N_(N), d_(d) {
  if (kinds_.empty()) throw std::invalid_argument("basis assignment needs at least one dimension");
  if (N_ < 2) throw std::invalid_argument("basis assignment: N must be >= 2");
  if (d_ < 1 || d_ > kinds_.size())
    throw std::invalid_argument("basis assignment: d must lie in [1, D]");
  for (std::size_t j = 0; j < kinds_.size(); ++j)
    if (kinds_[j] == BasisKind::LegendrePreconditioned)
      legendre_dims_.push_back(static_cast<std::uint32_t>(j));
}

BasisAssignment BasisAssignment::parse(std::string_view layout, std::size_t N, std::size_t d) {
  std::vector<BasisKind> kinds;
  while (!layout.empty()) {
    auto comma = layout.find(',');
    auto item = layout.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw std::invalid_argument("basis string: empty item");
    const BasisKind kind = kind_from_letter(item.front());
    std::size_t count = 1;
    if (item.size() > 1) {
      if (item[1] != '*' || item.size() < 3)
        throw std::invalid_argument("basis string: malformed item '" + std::string(item) + "'");
      auto digits = item.substr(2);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), count);
      if (ec != std::errc() || ptr != digits.data() + digits.size() || count == 0)
        throw std::invalid_argument("basis string: bad repeat count in '" + std::string(item) + "'");
    }
    kinds.insert(kinds.end(), count, kind);
    if (comma == std::string_view::npos) break;
    layout.remove_prefix(comma + 1);
    if (layout.empty()) throw std::invalid_argument("basis string: trailing comma");
  }
  return BasisAssignment(std::move(kinds), N, d);
}

BasisAssignment BasisAssignment::uniform(BasisKind kind, std::size_t D, std::size_t N,
                                         std::size_t d) {
  return BasisAssignment(std::vector<BasisKind>(D, kind), N, d);
}

BasisAssignment BasisAssignment::mixed_layout(std::size_t D, std::size_t N, std::size_t d) {
  if (D < 6) throw std::invalid_argument("mixed layout needs D >= 6");
  std::vector<BasisKind> kinds(D, BasisKind::Fourier);
  for (std::size_t j : {std::size_t{0}, D / 2, D - 2}) kinds[j] = BasisKind::Chebyshev;
  for (std::size_t j : {std::size_t{1}, D / 2 - 1, D - 1})
    kinds[j] = BasisKind::LegendrePreconditioned;
  return BasisAssignment(std::move(kinds), N, d);
}

bool BasisAssignment::in_domain(std::size_t dim, double x) const {
  if (kinds_[dim] == BasisKind::Fourier) return x >= 0.0 && x < 1.0;
  return x >= -1.0 && x <= 1.0;
}

std::string BasisAssignment::to_string() const {
  std::string out;
  std::size_t i = 0;
  while (i < kinds_.size()) {
    std::size_t run = 1;
    while (i + run < kinds_.size() && kinds_[i + run] == kinds_[i]) ++run;
    if (!out.empty()) out += ',';
    out += basis_letter(kinds_[i]);
    if (run > 1) out += '*' + std::to_string(run);
    i += run;
  }
  return out;
}

long fourier_frequency(std::uint32_t n, std::size_t N) {
  const long nn = static_cast<long>(n);
  const long NN = static_cast<long>(N);
  return nn <= NN / 2 ? nn : nn - NN;
}

double legendre_normalized(std::uint32_t n, double x) {
  if (n == 0) return 1.0;
  double p_prev = 1.0;
  double p = x;
  for (std::uint32_t k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = p_next;
  }
  return std::sqrt(2.0 * n + 1.0) * p;
}

namespace detail {

double legendre_weight(double x) {
  return kSqrtHalfPi * std::sqrt(std::sqrt(std::max(0.0, 1.0 - x * x)));
}

Complex basis_value(BasisKind kind, std::uint32_t n, double x, std::size_t N) {
  switch (kind) {
    case BasisKind::Fourier: {
      if (n == 0) return {1.0, 0.0};
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(fourier_frequency(n, N)) * x;
      return {std::cos(phase), std::sin(phase)};
    }
    case BasisKind::Chebyshev:
      if (n == 0) return {1.0, 0.0};
      return {kSqrt2 * std::cos(n * std::acos(x)), 0.0};
    case BasisKind::LegendrePreconditioned:
      return {legendre_weight(x) * legendre_normalized(n, x), 0.0};
  }
  return {};
}

}  // namespace detail

Complex eval_1d(BasisKind kind, std::uint32_t n, double x, std::size_t N) {
  if (n >= N) throw std::out_of_range("eval_1d: index n >= N");
  check_domain(kind, x);
  return detail::basis_value(kind, n, x, N);
}

Complex eval_function_1d(BasisKind kind, std::uint32_t n, double x, std::size_t N) {
  if (kind != BasisKind::LegendrePreconditioned) return eval_1d(kind, n, x, N);
  if (n >= N) throw std::out_of_range("eval_function_1d: index n >= N");
  check_domain(kind, x);
  return {legendre_normalized(n, x), 0.0};
}

Complex eval_product(const BasisAssignment& assign, const IndexVector& n,
                     std::span<const double> xi) {
  if (xi.size() != assign.dimension() || n.ambient() != assign.dimension())
    throw std::invalid_argument("eval_product: dimension mismatch");
  Complex value{1.0, 0.0};
  for (const auto& e : n.entries()) value *= eval_1d(assign.kind(e.dim), e.value, xi[e.dim], assign.N());
  // Q_0 != 1 on preconditioned dimensions, so those with n_j = 0 still contribute.
  for (auto j : assign.legendre_dims())
    if (n.at(j) == 0) value *= eval_1d(BasisKind::LegendrePreconditioned, 0, xi[j], assign.N());
  return value;
}

Complex eval_restricted(const BasisAssignment& assign, const IndexVector& n,
                        const DimensionSet& s, std::span<const double> w) {
  if (w.size() != s.size() || n.ambient() != assign.dimension() || s.ambient() != assign.dimension())
    throw std::invalid_argument("eval_restricted: dimension mismatch");
  Complex value{1.0, 0.0};
  auto dims = s.dims();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto v = n.at(dims[i]);
    const auto kind = assign.kind(dims[i]);
    if (v == 0 && kind != BasisKind::LegendrePreconditioned) continue;
    value *= eval_1d(kind, v, w[i], assign.N());
  }
  return value;
}

Complex eval_function_product(const BasisAssignment& assign, const IndexVector& n,
                              std::span<const double> xi) {
  if (xi.size() != assign.dimension() || n.ambient() != assign.dimension())
    throw std::invalid_argument("eval_function_product: dimension mismatch");
  Complex value{1.0, 0.0};
  for (const auto& e : n.entries())
    value *= eval_function_1d(assign.kind(e.dim), e.value, xi[e.dim], assign.N());
  return value;
}

double sample_node(BasisKind kind, Rng& rng) {
  const double u = uniform01(rng);
  if (kind == BasisKind::Fourier) return u;
  return std::cos(std::numbers::pi * u);
}

double sample_weight(const BasisAssignment& assign, std::span<const double> xi) {
  double w = 1.0;
  for (auto j : assign.legendre_dims()) {
    if (std::abs(xi[j]) > 1.0) throw std::domain_error("sample_weight: |xi_j| > 1");
    w *= detail::legendre_weight(xi[j]);
  }
  return w;
}

BosConstants bos_constants(const BasisAssignment& assign) {
  BosConstants c;
  const std::size_t D = assign.dimension();
  c.per_dim_max.resize(D);
  c.per_dim_zero.resize(D);
  for (std::size_t j = 0; j < D; ++j) {
    switch (assign.kind(j)) {
      case BasisKind::Fourier: c.per_dim_max[j] = 1.0; c.per_dim_zero[j] = 1.0; break;
      case BasisKind::Chebyshev: c.per_dim_max[j] = kSqrt2; c.per_dim_zero[j] = 1.0; break;
      case BasisKind::LegendrePreconditioned:
        c.per_dim_max[j] = std::sqrt(3.0);
        c.per_dim_zero[j] = kSqrtHalfPi;
        break;
    }
  }
  // Weight <= d: the d dims with the largest ratio K_j / K^0_j take their max,
  // all others their zero-index bound.
  std::vector<double> gain(D);
  double base = 1.0;
  for (std::size_t j = 0; j < D; ++j) {
    base *= c.per_dim_zero[j];
    gain[j] = c.per_dim_max[j] / c.per_dim_zero[j];
  }
  std::sort(gain.begin(), gain.end(), std::greater<>());
  c.K = base;
  for (std::size_t j = 0; j < assign.d(); ++j) c.K *= std::max(1.0, gain[j]);
  return c;
}

}  // namespace bopb
