#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "bopb/testbed.hpp"

namespace bopb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kGaussChebyshevNodes = 4096;
constexpr long kSeriesCutoff = 10000;

int order_of(Factor1D f) {
  switch (f) {
    case Factor1D::N2: return 2;
    case Factor1D::N4: return 4;
    case Factor1D::N6: return 6;
    default: throw std::invalid_argument("not a periodic B-spline factor");
  }
}

void check_order(int m) {
  if (m != 2 && m != 4 && m != 6) throw std::invalid_argument("periodic B-spline order must be 2, 4 or 6");
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// Cardinal B-spline of order m supported on [0, m].
double cardinal_bspline(int m, double t) {
  if (t <= 0.0 || t >= m) return 0.0;
  double sum = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= m; ++j) {
    if (t > j) sum += (j % 2 == 0 ? 1.0 : -1.0) * binom * std::pow(t - j, m - 1);
    binom = binom * (m - j) / (j + 1);
  }
  return sum / std::tgamma(static_cast<double>(m));
}

// Breakpoint of the piecewise definition.
double breakpoint(Factor1D which) { return which == Factor1D::B3 ? -0.5 : 0.5; }

// Nodes and weights of an n-point Gauss-Legendre rule on [-1,1].
struct Rule {
  std::vector<double> x, w;
};

Rule gauss_legendre(unsigned n) {
  Rule r;
  for (double z : boost::math::legendre_p_zeros<double>(static_cast<int>(n))) {
    const double dp = boost::math::legendre_p_prime<double>(static_cast<int>(n), z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.x.push_back(z);
    r.w.push_back(w);
    if (z != 0.0) {
      r.x.push_back(-z);
      r.w.push_back(w);
    }
  }
  return r;
}

// (1/pi) int_0^pi f(cos t) g(cos t) dt, split where the pieces change so each part is smooth.
template <class F>
double arcsine_integral(F&& h, double brk) {
  using boost::math::quadrature::gauss;
  const double tb = std::acos(brk);
  auto in_theta = [&](double t) { return h(std::cos(t)); };
  return (gauss<double, 30>::integrate(in_theta, 0.0, tb) + gauss<double, 30>::integrate(in_theta, tb, kPi)) /
         kPi;
}

// (1/2) int_{-1}^{1} h(x) dx for piecewise polynomials of low degree.
template <class F>
double half_lebesgue_integral(F&& h, double brk) {
  using boost::math::quadrature::gauss;
  return 0.5 * (gauss<double, 10>::integrate(h, -1.0, brk) + gauss<double, 10>::integrate(h, brk, 1.0));
}

}  // namespace

std::string_view factor_name(Factor1D f) {
  switch (f) {
    case Factor1D::N2: return "N2";
    case Factor1D::N4: return "N4";
    case Factor1D::N6: return "N6";
    case Factor1D::B3: return "B3";
    case Factor1D::B5: return "B5";
  }
  return "?";
}

bool is_periodic(Factor1D f) { return f == Factor1D::N2 || f == Factor1D::N4 || f == Factor1D::N6; }

double periodic_bspline_constant(int m) {
  check_order(m);
  static const std::array<double, 3> table = [] {
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) {
      const int mm = 2 * (i + 1);
      double sum = 1.0;
      for (long k = 1; k <= kSeriesCutoff; ++k) sum += 2.0 * std::pow(sinc(kPi * k / mm), 2 * mm);
      out[i] = 1.0 / std::sqrt(sum);
    }
    return out;
  }();
  return table[m / 2 - 1];
}

double periodic_bspline_coeff(int m, long n) {
  const double c = periodic_bspline_constant(m);
  if (n != 0 && n % m == 0) return 0.0;
  return c * std::pow(sinc(kPi * static_cast<double>(n) / m), m) * (n % 2 == 0 ? 1.0 : -1.0);
}

double periodic_bspline(int m, double x) {
  check_order(m);
  if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("periodic B-spline argument outside [0,1)");
  // Periodizing M_m(m x) gives Fourier coefficients sinc(pi n/m)^m (-1)^n / m; on [0,1)
  // only the unshifted copy is nonzero.
  return periodic_bspline_constant(m) * m * cardinal_bspline(m, m * x);
}

double cheb_bspline(Factor1D which, double x) {
  if (!(x >= -1.0 && x <= 1.0)) throw std::domain_error("B-spline argument outside [-1,1]");
  switch (which) {
    case Factor1D::B3:
      if (x <= -0.5) return -x * x / 4.0 - 3.0 * x / 4.0 + 3.0 / 16.0;
      return x * x / 8.0 - 3.0 * x / 8.0 + 9.0 / 32.0;
    case Factor1D::B5: {
      if (x <= 0.5) {
        const double x2 = x * x;
        return 155.0 / 1536.0 - 5.0 * x / 32.0 + 5.0 * x2 / 64.0 - x2 * x2 / 96.0;
      }
      const double u = 2.0 * x - 5.0;
      return u * u * u * u / 6144.0;
    }
    default: throw std::invalid_argument("not a Chebyshev-domain B-spline factor");
  }
}

std::vector<double> cheb_bspline_coeffs(Factor1D which, std::size_t count) {
  std::vector<double> out(count, 0.0);
  const int M = kGaussChebyshevNodes;
  for (int i = 0; i < M; ++i) {
    const double theta = (2.0 * i + 1.0) * kPi / (2.0 * M);
    const double b = cheb_bspline(which, std::cos(theta));
    if (count > 0) out[0] += b;
    for (std::size_t n = 1; n < count; ++n) out[n] += b * std::numbers::sqrt2 * std::cos(n * theta);
  }
  for (double& c : out) c /= M;
  return out;
}

double cheb_bspline_coeff(Factor1D which, std::uint32_t n) {
  const int M = kGaussChebyshevNodes;
  double sum = 0.0;
  for (int i = 0; i < M; ++i) {
    const double theta = (2.0 * i + 1.0) * kPi / (2.0 * M);
    sum += cheb_bspline(which, std::cos(theta)) * (n == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(n * theta));
  }
  return sum / M;
}

std::vector<double> legendre_bspline_coeffs(Factor1D which, std::size_t count) {
  std::vector<double> out(count, 0.0);
  if (count == 0) return out;
  // Integrand degree <= 4 + count - 1 on each piece.
  const Rule rule = gauss_legendre(static_cast<unsigned>(count / 2 + 4));
  const double brk = breakpoint(which);
  for (auto [lo, hi] : {std::pair{-1.0, brk}, std::pair{brk, 1.0}}) {
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double x = mid + half * rule.x[i];
      const double wb = 0.5 * half * rule.w[i] * cheb_bspline(which, x);
      double p_prev = 1.0, p = x;
      out[0] += wb;
      for (std::size_t n = 1; n < count; ++n) {
        out[n] += wb * std::sqrt(2.0 * n + 1.0) * p;
        const double p_next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
        p_prev = p;
        p = p_next;
      }
    }
  }
  return out;
}

double legendre_bspline_coeff(Factor1D which, std::uint32_t n) {
  return legendre_bspline_coeffs(which, n + 1).back();
}

double eval_factor(Factor1D f, double x) {
  return is_periodic(f) ? periodic_bspline(order_of(f), x) : cheb_bspline(f, x);
}

double factor_coeff(Factor1D f, BasisKind kind, std::uint32_t n, std::size_t N) {
  if (is_periodic(f) != (kind == BasisKind::Fourier))
    throw std::invalid_argument(std::string("factor ") + std::string(factor_name(f)) +
                                " does not fit a " + basis_letter(kind) + " dimension");
  switch (kind) {
    case BasisKind::Fourier: return periodic_bspline_coeff(order_of(f), fourier_frequency(n, N));
    case BasisKind::Chebyshev: return cheb_bspline_coeff(f, n);
    case BasisKind::LegendrePreconditioned: return legendre_bspline_coeff(f, n);
  }
  return 0.0;
}

double factor_inner(Factor1D f, Factor1D g, BasisKind kind) {
  if (is_periodic(f) != (kind == BasisKind::Fourier) || is_periodic(g) != (kind == BasisKind::Fourier))
    throw std::invalid_argument("factor_inner: factor does not fit the basis kind");
  if (kind == BasisKind::Fourier) {
    const int mf = order_of(f), mg = order_of(g);
    double sum = periodic_bspline_coeff(mf, 0) * periodic_bspline_coeff(mg, 0);
    for (long k = 1; k <= kSeriesCutoff; ++k)
      sum += 2.0 * periodic_bspline_coeff(mf, k) * periodic_bspline_coeff(mg, k);
    return sum;
  }
  auto h = [&](double x) { return cheb_bspline(f, x) * cheb_bspline(g, x); };
  using boost::math::quadrature::gauss;
  // Split at both breakpoints so every piece is a polynomial.
  if (kind == BasisKind::Chebyshev) {
    const double t1 = std::acos(0.5), t2 = std::acos(-0.5);
    auto ht = [&](double t) { return h(std::cos(t)); };
    return (gauss<double, 30>::integrate(ht, 0.0, t1) + gauss<double, 30>::integrate(ht, t1, t2) +
            gauss<double, 30>::integrate(ht, t2, kPi)) /
           kPi;
  }
  return 0.5 * (gauss<double, 10>::integrate(h, -1.0, -0.5) + gauss<double, 10>::integrate(h, -0.5, 0.5) +
                gauss<double, 10>::integrate(h, 0.5, 1.0));
}

double factor_mean(Factor1D f, BasisKind kind) {
  if (is_periodic(f) != (kind == BasisKind::Fourier))
    throw std::invalid_argument("factor_mean: factor does not fit the basis kind");
  switch (kind) {
    case BasisKind::Fourier: return periodic_bspline_coeff(order_of(f), 0);
    case BasisKind::Chebyshev:
      return arcsine_integral([&](double x) { return cheb_bspline(f, x); }, breakpoint(f));
    case BasisKind::LegendrePreconditioned:
      return half_lebesgue_integral([&](double x) { return cheb_bspline(f, x); }, breakpoint(f));
  }
  return 0.0;
}

}  // namespace bopb
