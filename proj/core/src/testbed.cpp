#include "bopb/testbed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>

namespace bopb {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool fits(Factor1D f, BasisKind kind) { return is_periodic(f) == (kind == BasisKind::Fourier); }

}  // namespace

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: empty range");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % n;
  }
}

double standard_normal(Rng& rng) {
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

Complex TrialSignal::operator()(std::span<const double> xi) const {
  Complex sum{};
  for (const auto& [n, c] : coeffs) sum += c * eval_function_product(assign, n, xi);
  return sum;
}

TrialSignal gen_trial(const BasisAssignment& assign, std::size_t s, Rng& rng) {
  const std::size_t D = assign.dimension(), N = assign.N(), d = assign.d();
  if (BigInt(s) > space_cardinality(N, D, d))
    throw std::invalid_argument("gen_trial: s exceeds |I_{N,d}|");

  // P(weight = k) proportional to C(D,k) (N-1)^k, handled in log space.
  std::vector<double> logw(d + 1);
  for (std::size_t k = 0; k <= d; ++k)
    logw[k] = std::lgamma(D + 1.0) - std::lgamma(k + 1.0) - std::lgamma(D - k + 1.0) +
              static_cast<double>(k) * std::log(static_cast<double>(N - 1));
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> cum(d + 1);
  double total = 0.0;
  for (std::size_t k = 0; k <= d; ++k) cum[k] = total += std::exp(logw[k] - top);

  std::set<IndexVector> chosen;
  std::vector<std::uint32_t> dims(D);
  while (chosen.size() < s) {
    const double u = uniform01(rng) * total;
    const std::size_t k = std::min<std::size_t>(
        static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()), d);
    std::iota(dims.begin(), dims.end(), 0u);
    for (std::size_t i = 0; i < k; ++i) std::swap(dims[i], dims[i + uniform_below(rng, D - i)]);
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < k; ++i)
      entries.push_back({dims[i], static_cast<std::uint32_t>(1 + uniform_below(rng, N - 1))});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.dim < b.dim; });
    chosen.emplace(D, std::move(entries));
  }
  TrialSignal trial{assign, {}};
  for (const auto& n : chosen) trial.coeffs[n] = (rng() >> 63) ? 1.0 : -1.0;
  return trial;
}

SampleSet add_noise(const SampleSet& samples, double snr_db, Rng& rng, bool real_noise) {
  if (std::isinf(snr_db) && snr_db > 0) return samples;
  if (std::isnan(snr_db)) throw std::invalid_argument("add_noise: SNR is NaN");
  const double y_norm = std::sqrt(samples.squared_norm());
  if (y_norm == 0.0) throw std::invalid_argument("add_noise: all-zero samples with finite SNR");
  auto draw = [&]() -> Complex {
    if (real_noise) return {standard_normal(rng), 0.0};
    const double re = standard_normal(rng), im = standard_normal(rng);
    constexpr double h = std::numbers::sqrt2 / 2.0;
    return {re * h, im * h};
  };
  SampleSet g;
  for (const auto& m : samples.sid) {
    Eigen::MatrixXcd block(m.rows(), m.cols());
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      for (Eigen::Index l = 0; l < m.rows(); ++l) block(l, k) = draw();
    g.sid.push_back(std::move(block));
  }
  g.ce.resize(samples.ce.size());
  for (Eigen::Index i = 0; i < samples.ce.size(); ++i) g.ce(i) = draw();
  const double g_norm = std::sqrt(g.squared_norm());
  const double sigma = std::pow(10.0, -snr_db / 20.0);
  const double scale = sigma * y_norm / g_norm;
  SampleSet out = samples;
  for (std::size_t b = 0; b < out.sid.size(); ++b) out.sid[b] += scale * g.sid[b];
  out.ce += scale * g.ce;
  return out;
}

std::string TestFunction::default_basis(std::string_view name) {
  if (name == "periodic10") return "F*10";
  if (name == "chebleg7") return "C*7";
  if (name == "mixed10") return "C,F,C,C,C,F,F,C,F,F";
  throw std::invalid_argument("unknown test function '" + std::string(name) + "'");
}

TestFunction TestFunction::make(std::string_view name, const BasisAssignment& assign) {
  using F = Factor1D;
  auto term = [](std::initializer_list<std::pair<std::uint32_t, F>> f) {
    TestTerm t{{f.begin(), f.end()}};
    std::sort(t.factors.begin(), t.factors.end());
    return t;
  };
  TestFunction tf;
  std::size_t D = 0;
  if (name == "periodic10") {
    D = 10;
    tf.terms_ = {term({{0, F::N2}, {2, F::N2}, {7, F::N2}}),
                 term({{1, F::N4}, {4, F::N4}, {5, F::N4}, {9, F::N4}}),
                 term({{3, F::N6}, {6, F::N6}, {8, F::N6}})};
  } else if (name == "chebleg7") {
    D = 7;
    tf.terms_ = {term({{0, F::B3}, {2, F::B3}, {5, F::B3}}),
                 term({{1, F::B5}, {3, F::B5}, {4, F::B5}, {6, F::B5}})};
  } else if (name == "mixed10") {
    D = 10;
    tf.terms_ = {term({{0, F::B3}, {2, F::B3}, {8, F::N4}}),
                 term({{3, F::B5}, {4, F::B5}, {1, F::N2}, {6, F::N2}}),
                 term({{7, F::B3}, {5, F::N2}, {9, F::N2}})};
  } else {
    throw std::invalid_argument("unknown test function '" + std::string(name) + "'");
  }
  if (assign.dimension() != D)
    throw std::invalid_argument("test function " + std::string(name) + " needs D = " + std::to_string(D));
  for (const auto& t : tf.terms_)
    for (const auto& [j, f] : t.factors)
      if (!fits(f, assign.kind(j)))
        throw std::invalid_argument("test function " + std::string(name) + ": factor " +
                                    std::string(factor_name(f)) + " on dim " + std::to_string(j) +
                                    " does not fit basis " + basis_letter(assign.kind(j)));
  tf.name_ = std::string(name);
  tf.assign_ = assign;

  const std::size_t N = assign.N();
  std::map<std::pair<F, BasisKind>, std::vector<double>> tables;
  auto table = [&](F f, BasisKind kind) -> const std::vector<double>& {
    auto [it, inserted] = tables.try_emplace({f, kind});
    if (inserted) {
      switch (kind) {
        case BasisKind::Fourier:
          for (std::uint32_t n = 0; n < N; ++n) it->second.push_back(factor_coeff(f, kind, n, N));
          break;
        case BasisKind::Chebyshev: it->second = cheb_bspline_coeffs(f, N); break;
        case BasisKind::LegendrePreconditioned: it->second = legendre_bspline_coeffs(f, N); break;
      }
    }
    return it->second;
  };
  for (const auto& t : tf.terms_) {
    std::vector<std::vector<double>> per;
    for (const auto& [j, f] : t.factors) per.push_back(table(f, assign.kind(j)));
    tf.coeff_.push_back(std::move(per));
  }

  // <term_a, term_b> factorizes over dims.
  auto factor_on = [](const TestTerm& t, std::uint32_t j) -> std::optional<F> {
    for (const auto& [dim, f] : t.factors)
      if (dim == j) return f;
    return std::nullopt;
  };
  double norm2 = 0.0;
  for (const auto& a : tf.terms_) {
    for (const auto& b : tf.terms_) {
      double prod = 1.0;
      for (std::uint32_t j = 0; j < D; ++j) {
        const auto fa = factor_on(a, j), fb = factor_on(b, j);
        const auto kind = assign.kind(j);
        if (fa && fb) prod *= factor_inner(*fa, *fb, kind);
        else if (fa) prod *= factor_mean(*fa, kind);
        else if (fb) prod *= factor_mean(*fb, kind);
      }
      norm2 += prod;
    }
  }
  tf.squared_norm_ = norm2;
  return tf;
}

double TestFunction::eval_term(std::size_t t, std::span<const double> xi) const {
  if (xi.size() != assign_.dimension()) throw std::invalid_argument("test function: point has wrong dimension");
  double v = 1.0;
  for (const auto& [j, f] : terms_.at(t).factors) v *= eval_factor(f, xi[j]);
  return v;
}

double TestFunction::operator()(std::span<const double> xi) const {
  if (xi.size() != assign_.dimension()) throw std::invalid_argument("test function: point has wrong dimension");
  for (std::size_t j = 0; j < xi.size(); ++j)
    if (!assign_.in_domain(j, xi[j])) throw std::domain_error("test function: point outside the domain");
  double sum = 0.0;
  for (std::size_t t = 0; t < terms_.size(); ++t) sum += eval_term(t, xi);
  return sum;
}

double TestFunction::true_coefficient(const IndexVector& n) const {
  if (n.ambient() != assign_.dimension()) throw std::invalid_argument("true_coefficient: wrong dimension");
  double sum = 0.0;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& factors = terms_[t].factors;
    bool inside = true;
    for (const auto& e : n.entries()) {
      if (e.value >= assign_.N()) throw std::out_of_range("true_coefficient: index value >= N");
      inside = inside && std::any_of(factors.begin(), factors.end(),
                                     [&](const auto& fj) { return fj.first == e.dim; });
    }
    if (!inside) continue;
    double prod = 1.0;
    for (std::size_t i = 0; i < factors.size(); ++i) prod *= coeff_[t][i][n.at(factors[i].first)];
    sum += prod;
  }
  return sum;
}

double relative_l2_error(const SparseCoefficients& a, const TestFunction& f) {
  const double norm2 = f.squared_norm();
  if (norm2 <= 0.0) throw std::invalid_argument("relative_l2_error: ||f|| = 0");
  double err2 = norm2;
  for (const auto& [n, c] : a) {
    const double fn = f.true_coefficient(n);
    err2 += std::norm(c - fn) - fn * fn;
  }
  return std::sqrt(std::max(0.0, err2) / norm2);
}

bool success(const SparseCoefficients& a, const TrialSignal& trial) {
  if (a.size() != trial.coeffs.size()) return false;
  auto it = trial.coeffs.begin();
  for (const auto& [n, _] : a) {
    if (!(n == it->first)) return false;
    ++it;
  }
  return true;
}

double relative_coefficient_error(const SparseCoefficients& a, const SparseCoefficients& c) {
  const double cn = c.norm();
  if (cn == 0.0) throw std::invalid_argument("relative_coefficient_error: reference is zero");
  return distance(a, c) / cn;
}

}  // namespace bopb
