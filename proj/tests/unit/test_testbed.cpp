#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bopb/testbed.hpp"
#include "oracles.hpp"

using namespace bopb;

namespace {

constexpr double kPi = std::numbers::pi;

SampleSet random_samples(Rng& rng) {
  SampleSet s;
  for (int b = 0; b < 3; ++b) {
    Eigen::MatrixXcd m(4, 5);
    for (auto& v : m.reshaped()) v = Complex(standard_normal(rng), standard_normal(rng));
    s.sid.push_back(m);
  }
  s.ce.resize(17);
  for (auto& v : s.ce) v = Complex(standard_normal(rng), standard_normal(rng));
  return s;
}

double diff_squared_norm(const SampleSet& a, const SampleSet& b) {
  double sum = (a.ce - b.ce).squaredNorm();
  for (std::size_t i = 0; i < a.sid.size(); ++i) sum += (a.sid[i] - b.sid[i]).squaredNorm();
  return sum;
}

template <class F>
double integrate(F&& f, double lo, double hi) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-14);
}

// <B, sqrt2 T_n> in the arcsine measure, substituted to theta and split at the breakpoint.
double cheb_coeff_oracle(Factor1D which, std::uint32_t n, double brk) {
  auto h = [&](double t) { return cheb_bspline(which, std::cos(t)) * oracle::chebyshev(n, std::cos(t)); };
  const double tb = std::acos(brk);
  return (integrate(h, 0.0, tb) + integrate(h, tb, kPi)) / kPi;
}

double legendre_coeff_oracle(Factor1D which, std::uint32_t n, double brk) {
  auto h = [&](double x) { return cheb_bspline(which, x) * oracle::legendre(n, x); };
  return 0.5 * (integrate(h, -1.0, brk) + integrate(h, brk, 1.0));
}

double brk(Factor1D f) { return f == Factor1D::B3 ? -0.5 : 0.5; }

}  // namespace

// ---- trial signals ----

TEST(Testbed, GenTrialExhaustsTinySpace) {
  const auto assign = BasisAssignment::uniform(BasisKind::Fourier, 2, 2, 1);
  Rng rng(1);
  const auto t = gen_trial(assign, 3, rng);
  const std::vector<IndexVector> all{IndexVector(2), IndexVector(2, {{1, 1}}), IndexVector(2, {{0, 1}})};
  std::vector<IndexVector> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(t.support(), sorted);
  for (const auto& [n, c] : t.coeffs) EXPECT_TRUE(c == Complex(1.0) || c == Complex(-1.0));
  EXPECT_THROW(gen_trial(assign, 4, rng), std::invalid_argument);
}

TEST(Testbed, GenTrialUniformChiSquared) {
  const auto assign = BasisAssignment::uniform(BasisKind::Fourier, 3, 4, 2);
  const auto space = oracle::enumerate(4, 3, 2);
  std::map<IndexVector, std::size_t> counts;
  Rng rng(2024);
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) ++counts[gen_trial(assign, 1, rng).support().front()];
  ASSERT_EQ(counts.size(), space.size());
  const double expected = static_cast<double>(draws) / space.size();
  double chi2 = 0.0;
  for (const auto& n : space) {
    const double o = static_cast<double>(counts[n]);
    chi2 += (o - expected) * (o - expected) / expected;
  }
  boost::math::chi_squared dist(static_cast<double>(space.size() - 1));
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.01) << "chi2 = " << chi2;
}

TEST(Testbed, GenTrialReproducibleAndInSpace) {
  const auto assign = BasisAssignment::parse("F,C,L*3", 32, 3);
  Rng a(77), b(77);
  const auto ta = gen_trial(assign, 40, a), tb = gen_trial(assign, 40, b);
  EXPECT_EQ(ta.coeffs, tb.coeffs);
  EXPECT_EQ(ta.coeffs.size(), 40u);
  for (const auto& n : ta.support()) EXPECT_TRUE(in_space(n, 32, 3));
}

TEST(Testbed, GenTrialHugeSpace) {
  const auto assign = BasisAssignment::uniform(BasisKind::Fourier, 100, 200, 100);
  Rng rng(3);
  const auto t = gen_trial(assign, 50, rng);
  EXPECT_EQ(t.coeffs.size(), 50u);
}

// ---- noise ----

TEST(Testbed, NoiseInfiniteSnrIsIdentity) {
  Rng rng(1);
  const auto y = random_samples(rng);
  const auto out = add_noise(y, kNoiselessSnr, rng);
  EXPECT_EQ(diff_squared_norm(out, y), 0.0);
}

TEST(Testbed, NoiseHitsRequestedSnr) {
  Rng rng(2);
  const auto y = random_samples(rng);
  const double y2 = y.squared_norm();
  EXPECT_NEAR(diff_squared_norm(add_noise(y, 0.0, rng), y) / y2, 1.0, 1e-12);
  EXPECT_NEAR(diff_squared_norm(add_noise(y, 10.0, rng), y) / y2, 0.1, 1e-12);
  EXPECT_NEAR(diff_squared_norm(add_noise(y, 27.5, rng), y) / y2, std::pow(10.0, -2.75), 1e-12);
}

TEST(Testbed, RealNoiseFlag) {
  Rng rng(3);
  const auto y = random_samples(rng);
  const auto out = add_noise(y, 5.0, rng, true);
  EXPECT_EQ((out.ce - y.ce).imag().cwiseAbs().maxCoeff(), 0.0);
  for (std::size_t b = 0; b < y.sid.size(); ++b) EXPECT_EQ((out.sid[b] - y.sid[b]).imag().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Testbed, NoiseErrors) {
  Rng rng(4);
  SampleSet zero;
  zero.sid.push_back(Eigen::MatrixXcd::Zero(2, 2));
  zero.ce = Eigen::VectorXcd::Zero(3);
  EXPECT_THROW(add_noise(zero, 10.0, rng), std::invalid_argument);
  EXPECT_NO_THROW(add_noise(zero, kNoiselessSnr, rng));
  EXPECT_THROW(add_noise(random_samples(rng), std::nan(""), rng), std::invalid_argument);
}

// ---- periodic B-splines ----

TEST(Testbed, PeriodicBsplineUnitNorm) {
  for (int m : {2, 4, 6}) {
    double sum = 0.0;
    for (long n = -10000; n <= 10000; ++n) sum += std::pow(periodic_bspline_coeff(m, n), 2);
    EXPECT_NEAR(sum, 1.0, 1e-6) << m;
    EXPECT_EQ(periodic_bspline_coeff(m, 0), periodic_bspline_constant(m));
    for (long n = 1; n < 50; ++n) EXPECT_EQ(periodic_bspline_coeff(m, n), periodic_bspline_coeff(m, -n));

    // Independent check on the closed form: piecewise quadrature of N_m^2 and N_m.
    double l2 = 0.0, mean = 0.0;
    for (int k = 0; k < m; ++k) {
      const double lo = static_cast<double>(k) / m, hi = (k + 1.0) / m - 1e-15;
      l2 += integrate([&](double x) { return std::pow(periodic_bspline(m, x), 2); }, lo, hi);
      mean += integrate([&](double x) { return periodic_bspline(m, x); }, lo, hi);
    }
    EXPECT_NEAR(l2, 1.0, 1e-9) << m;
    EXPECT_NEAR(mean, periodic_bspline_constant(m), 1e-9) << m;
  }
  EXPECT_THROW(periodic_bspline_constant(3), std::invalid_argument);
  EXPECT_THROW(periodic_bspline(4, 1.0), std::domain_error);
}

TEST(Testbed, PeriodicBsplineMatchesSeriesResummation) {
  const std::map<int, double> tol{{2, 2e-3}, {4, 1e-8}, {6, 1e-10}};
  for (int m : {2, 4, 6})
    for (int i = 0; i < 50; ++i) {
      const double x = i / 50.0;
      double series = periodic_bspline_coeff(m, 0);
      for (long k = 1; k <= 1000; ++k) series += 2.0 * periodic_bspline_coeff(m, k) * std::cos(2 * kPi * k * x);
      ASSERT_NEAR(periodic_bspline(m, x), series, tol.at(m)) << m << ' ' << x;
    }
}

// ---- Chebyshev-domain B-splines ----

TEST(Testbed, ChebBsplinePieces) {
  EXPECT_NEAR(cheb_bspline(Factor1D::B3, -0.5), 0.5, 1e-15);
  EXPECT_NEAR(cheb_bspline(Factor1D::B3, -0.5 + 1e-12), 0.5, 1e-11);
  EXPECT_NEAR(cheb_bspline(Factor1D::B3, 1.0), 1.0 / 32, 1e-15);
  EXPECT_NEAR(cheb_bspline(Factor1D::B5, 0.5), 1.0 / 24, 1e-15);
  EXPECT_NEAR(cheb_bspline(Factor1D::B5, 0.5 + 1e-12), 1.0 / 24, 1e-11);
  EXPECT_NEAR(cheb_bspline(Factor1D::B5, 1.0), 81.0 / 6144, 1e-15);
  EXPECT_THROW(cheb_bspline(Factor1D::B3, 1.01), std::domain_error);
  EXPECT_THROW(cheb_bspline(Factor1D::N2, 0.0), std::invalid_argument);
}

TEST(Testbed, ChebCoefficientsMatchQuadratureOracle) {
  for (auto f : {Factor1D::B3, Factor1D::B5}) {
    const auto table = cheb_bspline_coeffs(f, 40);
    const auto ltable = legendre_bspline_coeffs(f, 40);
    for (std::uint32_t n = 0; n < 40; ++n) {
      EXPECT_NEAR(table[n], cheb_coeff_oracle(f, n, brk(f)), 1e-10) << factor_name(f) << ' ' << n;
      EXPECT_NEAR(table[n], cheb_bspline_coeff(f, n), 1e-15);
      EXPECT_NEAR(ltable[n], legendre_coeff_oracle(f, n, brk(f)), 1e-12) << factor_name(f) << ' ' << n;
      EXPECT_NEAR(ltable[n], legendre_bspline_coeff(f, n), 1e-14);
    }
  }
}

TEST(Testbed, ChebCoefficientDecay) {
  const auto b3 = cheb_bspline_coeffs(Factor1D::B3, 257);
  const auto b5 = cheb_bspline_coeffs(Factor1D::B5, 129);
  double c3 = 0.0, c5 = 0.0;
  for (std::size_t n = 8; n <= 64; ++n) {
    c3 = std::max(c3, std::abs(b3[n]) * std::pow(n, 3.0));
    c5 = std::max(c5, std::abs(b5[n]) * std::pow(n, 5.0));
  }
  for (std::size_t n = 65; n <= 256; ++n) EXPECT_LE(std::abs(b3[n]), 1.5 * c3 * std::pow(n, -3.0)) << n;
  for (std::size_t n = 65; n <= 128; ++n) EXPECT_LE(std::abs(b5[n]), 1.5 * c5 * std::pow(n, -5.0)) << n;
}

TEST(Testbed, ChebReconstructionFrom64Coefficients) {
  const auto c = cheb_bspline_coeffs(Factor1D::B3, 64);
  double worst = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = -1.0 + 2.0 * i / 1000.0;
    double sum = 0.0;
    for (std::uint32_t n = 0; n < 64; ++n) sum += c[n] * oracle::chebyshev(n, x);
    worst = std::max(worst, std::abs(sum - cheb_bspline(Factor1D::B3, x)));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Testbed, FactorInnerAndMean) {
  for (auto kind : {BasisKind::Chebyshev, BasisKind::LegendrePreconditioned})
    for (auto f : {Factor1D::B3, Factor1D::B5}) {
      const auto c = kind == BasisKind::Chebyshev ? cheb_bspline_coeffs(f, 200) : legendre_bspline_coeffs(f, 200);
      double parseval = 0.0;
      for (double v : c) parseval += v * v;
      EXPECT_NEAR(factor_inner(f, f, kind), parseval, 1e-8);
      EXPECT_NEAR(factor_mean(f, kind), c[0], 1e-12);
    }
  EXPECT_THROW(factor_mean(Factor1D::N2, BasisKind::Chebyshev), std::invalid_argument);
  EXPECT_THROW(factor_coeff(Factor1D::B3, BasisKind::Fourier, 0, 8), std::invalid_argument);
}

// ---- test functions ----

TEST(Testbed, TestFunctionConstruction) {
  EXPECT_THROW(TestFunction::make("nope", BasisAssignment::parse("F*10", 8, 10)), std::invalid_argument);
  EXPECT_THROW(TestFunction::make("periodic10", BasisAssignment::parse("F*9", 8, 9)), std::invalid_argument);
  EXPECT_THROW(TestFunction::make("periodic10", BasisAssignment::parse("C*10", 8, 10)), std::invalid_argument);
  EXPECT_NO_THROW(TestFunction::make("chebleg7", BasisAssignment::parse("L*7", 8, 7)));
  EXPECT_NO_THROW(TestFunction::make("chebleg7", BasisAssignment::parse("C,L,C,L,C,L,C", 8, 7)));
  EXPECT_EQ(TestFunction::default_basis("mixed10"), "C,F,C,C,C,F,F,C,F,F");
  // Every term's dims are disjoint.
  for (const std::string name : {"periodic10", "chebleg7", "mixed10"}) {
    const auto basis = TestFunction::default_basis(name);
    const auto a = BasisAssignment::parse(basis, 8, basis == "C*7" ? 7 : 10);
    const auto tf = TestFunction::make(name, a);
    std::set<std::uint32_t> used;
    for (const auto& t : tf.terms())
      for (const auto& [j, f] : t.factors) EXPECT_TRUE(used.insert(j).second) << name;
  }
}

TEST(Testbed, Periodic10AtOrigin) {
  const auto tf = TestFunction::make("periodic10", BasisAssignment::parse("F*10", 64, 10));
  const std::vector<double> zero(10, 0.0);
  const double expected = std::pow(periodic_bspline(2, 0.0), 3) + std::pow(periodic_bspline(4, 0.0), 4) +
                          std::pow(periodic_bspline(6, 0.0), 3);
  EXPECT_NEAR(tf(zero), expected, 1e-15);
  EXPECT_NEAR(tf(zero), 0.0, 1e-15);
  EXPECT_THROW(tf(std::vector<double>(10, 1.0)), std::domain_error);
}

TEST(Testbed, Mixed10TermDecomposition) {
  const auto tf = TestFunction::make("mixed10", BasisAssignment::parse("C,F,C,C,C,F,F,C,F,F", 16, 10));
  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> xi;
    for (std::size_t j = 0; j < 10; ++j) xi.push_back(sample_node(tf.assign().kind(j), rng));
    xi[0] = 1.0;
    EXPECT_NEAR(tf.eval_term(0, xi),
                cheb_bspline(Factor1D::B3, xi[2]) * periodic_bspline(4, xi[8]) / 32.0, 1e-15);
    double sum = 0.0;
    for (std::size_t t = 0; t < tf.terms().size(); ++t) sum += tf.eval_term(t, xi);
    EXPECT_NEAR(tf(xi), sum, 1e-15);
  }
}

TEST(Testbed, TrueCoefficientStructure) {
  const auto tf = TestFunction::make("periodic10", BasisAssignment::parse("F*10", 64, 10));
  const double C2 = periodic_bspline_constant(2), C4 = periodic_bspline_constant(4), C6 = periodic_bspline_constant(6);
  EXPECT_NEAR(tf.true_coefficient(IndexVector(10)), std::pow(C2, 3) + std::pow(C4, 4) + std::pow(C6, 3), 1e-15);
  // Dims 0 and 1 belong to different terms.
  EXPECT_EQ(tf.true_coefficient(IndexVector(10, {{0, 1}, {1, 1}})), 0.0);
  // A single entry on term 1's dim 4 at frequency -1.
  EXPECT_NEAR(tf.true_coefficient(IndexVector(10, {{4, 63}})),
              periodic_bspline_coeff(4, -1) * std::pow(C4, 3), 1e-15);
  EXPECT_THROW(tf.true_coefficient(IndexVector(10, {{4, 64}})), std::out_of_range);
  EXPECT_THROW(tf.true_coefficient(IndexVector(9)), std::invalid_argument);
}

TEST(Testbed, TrueCoefficientsMatchMonteCarloInnerProducts) {
  struct Case {
    std::string name, basis;
    std::size_t samples;
  };
  const Case cases[] = {{"chebleg7", "C*7", 1'000'000}, {"chebleg7", "L*7", 300'000}, {"periodic10", "F*10", 300'000},
                        {"mixed10", "C,F,C,C,C,F,F,C,F,F", 300'000}};
  const std::size_t N = 16;
  for (const auto& cs : cases) {
    const auto assign = BasisAssignment::parse(cs.basis, N, cs.basis == "C*7" || cs.basis == "L*7" ? 7 : 10);
    const auto tf = TestFunction::make(cs.name, assign);
    const std::size_t D = assign.dimension();
    Rng rng(99);
    // Indices inside one term at low frequencies, where coefficients are largest.
    std::vector<IndexVector> idx;
    while (idx.size() < 20) {
      const auto& t = tf.terms()[uniform_below(rng, tf.terms().size())];
      std::vector<Entry> e;
      for (const auto& [j, f] : t.factors) {
        const auto v = static_cast<std::uint32_t>(uniform_below(rng, 4));
        if (v != 0) e.push_back({j, assign.kind(j) == BasisKind::Fourier && v == 3 ? static_cast<std::uint32_t>(N - 1) : v});
      }
      idx.emplace_back(D, std::move(e));
    }
    std::vector<Complex> sum(idx.size()), sum2(idx.size());
    std::vector<double> xi(D);
    for (std::size_t i = 0; i < cs.samples; ++i) {
      for (std::size_t j = 0; j < D; ++j) xi[j] = sample_node(assign.kind(j), rng);
      const double fw = tf(xi) * sample_weight(assign, xi);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const Complex v = fw * std::conj(eval_product(assign, idx[k], xi));
        sum[k] += v;
        sum2[k] += Complex(v.real() * v.real(), v.imag() * v.imag());
      }
    }
    const double M = static_cast<double>(cs.samples);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Complex mean = sum[k] / M;
      const double se_re = std::sqrt(std::max(0.0, sum2[k].real() / M - mean.real() * mean.real()) / M);
      const double se_im = std::sqrt(std::max(0.0, sum2[k].imag() / M - mean.imag() * mean.imag()) / M);
      const double ref = tf.true_coefficient(idx[k]);
      EXPECT_LE(std::abs(mean.real() - ref), 3 * se_re + 1e-12) << cs.name << ' ' << cs.basis << ' ' << to_string(idx[k]);
      EXPECT_LE(std::abs(mean.imag()), 3 * se_im + 1e-12) << cs.name << ' ' << to_string(idx[k]);
    }
  }
}

TEST(Testbed, SquaredNormMatchesMonteCarloAndBoundsParseval) {
  const std::size_t M = 1'000'000;
  for (const std::string basis : {"F*10", "C*7", "L*7"}) {
    const std::string name = basis == "F*10" ? "periodic10" : "chebleg7";
    const std::size_t D = basis == "F*10" ? 10 : 7;
    const auto assign = BasisAssignment::parse(basis, 8, D);
    const auto tf = TestFunction::make(name, assign);
    Rng rng(5);
    double s1 = 0.0, s2 = 0.0;
    std::vector<double> xi(D);
    for (std::size_t i = 0; i < M; ++i) {
      for (std::size_t j = 0; j < D; ++j)
        xi[j] = basis == "L*7" ? 2.0 * uniform01(rng) - 1.0 : sample_node(assign.kind(j), rng);
      const double v = tf(xi) * tf(xi);
      s1 += v;
      s2 += v * v;
    }
    const double mean = s1 / M, se = std::sqrt((s2 / M - mean * mean) / M);
    EXPECT_NEAR(tf.squared_norm(), mean, 3 * se) << basis;

    // Parseval over a set of low-frequency indices inside the terms.
    std::set<IndexVector> idx;
    for (const auto& t : tf.terms()) {
      const std::size_t k = t.factors.size();
      std::size_t total = 1;
      for (std::size_t i = 0; i < k; ++i) total *= 8;
      for (std::size_t code = 0; code < total; ++code) {
        std::vector<Entry> e;
        std::size_t c = code;
        for (const auto& [j, f] : t.factors) {
          if (c % 8) e.push_back({j, static_cast<std::uint32_t>(c % 8)});
          c /= 8;
        }
        idx.emplace(D, std::move(e));
      }
    }
    double parseval = 0.0;
    for (const auto& n : idx) parseval += std::pow(tf.true_coefficient(n), 2);
    EXPECT_LE(parseval, tf.squared_norm() + 2 * se) << basis;
    EXPECT_GE(parseval, 0.9 * tf.squared_norm()) << basis;
  }
}

// ---- metrics ----

TEST(Testbed, RelativeL2Error) {
  const auto tf = TestFunction::make("periodic10", BasisAssignment::parse("F*10", 16, 10));
  EXPECT_NEAR(relative_l2_error({}, tf), 1.0, 1e-15);

  SparseCoefficients trunc;
  double captured = 0.0;
  for (const auto& n : {IndexVector(10), IndexVector(10, {{0, 1}}), IndexVector(10, {{1, 15}}),
                        IndexVector(10, {{3, 1}, {6, 1}})}) {
    trunc[n] = tf.true_coefficient(n);
    captured += std::pow(tf.true_coefficient(n), 2);
  }
  const double tail = std::sqrt((tf.squared_norm() - captured) / tf.squared_norm());
  EXPECT_NEAR(relative_l2_error(trunc, tf), tail, 1e-12);

  auto perturbed = trunc;
  perturbed[IndexVector(10)] += Complex(0.0, 0.1);
  EXPECT_NEAR(relative_l2_error(perturbed, tf), std::sqrt(tail * tail + 0.01 / tf.squared_norm()), 1e-12);
}

TEST(Testbed, SuccessIsSupportEquality) {
  const auto assign = BasisAssignment::uniform(BasisKind::Fourier, 4, 8, 4);
  Rng rng(8);
  const auto t = gen_trial(assign, 5, rng);
  SparseCoefficients a;
  for (const auto& n : t.support()) a[n] = Complex(0.3, 0.4);
  EXPECT_TRUE(success(a, t));
  a.erase(t.support().back());
  EXPECT_FALSE(success(a, t));
  const IndexVector stray(4, {{2, 7}, {3, 7}});
  a[stray] = 1.0;
  if (!t.coeffs.contains(stray)) {
    EXPECT_FALSE(success(a, t));
  }
  EXPECT_NEAR(relative_coefficient_error(t.coeffs, t.coeffs), 0.0, 0.0);
  EXPECT_THROW(relative_coefficient_error(t.coeffs, {}), std::invalid_argument);
}

TEST(Testbed, DeriveSeedIsStable) {
  EXPECT_EQ(derive_seed(1, 1), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(uniform_below(rng, 7), 7u);
  EXPECT_THROW(uniform_below(rng, 0), std::invalid_argument);
}
