#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/special_functions/legendre.hpp>

namespace oracle {

using namespace bopb;

std::vector<IndexVector> enumerate(std::size_t N, std::size_t D, std::size_t d) {
  std::vector<IndexVector> out;
  std::vector<std::uint32_t> dense(D, 0);
  // Most significant digit first so the output is lexicographic.
  for (;;) {
    std::size_t nz = 0;
    for (auto v : dense) nz += v != 0;
    if (nz <= d) out.push_back(IndexVector::from_dense(dense));
    std::size_t j = D;
    while (j > 0 && ++dense[j - 1] == N) dense[--j] = 0;
    if (j == 0) break;
  }
  return out;
}

double chebyshev(std::uint32_t n, double x) {
  if (n == 0) return 1.0;
  double t0 = 1.0, t1 = x;
  for (std::uint32_t k = 1; k < n; ++k) {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return std::numbers::sqrt2 * t1;
}

double legendre(std::uint32_t n, double x) {
  return std::sqrt(2.0 * n + 1.0) * boost::math::legendre_p(static_cast<int>(n), x);
}

Complex basis_1d(BasisKind kind, std::uint32_t n, double x, std::size_t N) {
  switch (kind) {
    case BasisKind::Fourier: {
      const double w = n <= N / 2 ? static_cast<double>(n) : static_cast<double>(n) - static_cast<double>(N);
      return std::polar(1.0, 2.0 * std::numbers::pi * w * x);
    }
    case BasisKind::Chebyshev: return chebyshev(n, x);
    case BasisKind::LegendrePreconditioned:
      return std::sqrt(std::numbers::pi / 2.0) * std::pow(1.0 - x * x, 0.25) * legendre(n, x);
  }
  return 0.0;
}

Complex basis_product(const BasisAssignment& assign, const IndexVector& n, const std::vector<double>& xi) {
  Complex v = 1.0;
  for (std::size_t j = 0; j < assign.dimension(); ++j) v *= basis_1d(assign.kind(j), n.at(j), xi[j], assign.N());
  return v;
}

Eigen::MatrixXcd dense_phi(const BasisAssignment& assign, const std::vector<std::vector<double>>& points,
                           const std::vector<IndexVector>& columns) {
  Eigen::MatrixXcd A(points.size(), columns.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t k = 0; k < columns.size(); ++k) A(i, k) = basis_product(assign, columns[k], points[i]);
  return A;
}

std::vector<std::vector<double>> block_points(const SidBlock& block) {
  std::vector<std::vector<double>> pts;
  for (std::size_t k = 0; k < block.m2; ++k)
    for (std::size_t l = 0; l < block.m1; ++l) pts.push_back(block.point(l, k));
  return pts;
}

std::vector<std::vector<double>> ce_points(const SamplingPlan& plan) {
  std::vector<std::vector<double>> pts;
  for (std::size_t i = 0; i < plan.m_ce(); ++i) pts.emplace_back(plan.ce_node(i).begin(), plan.ce_node(i).end());
  return pts;
}

std::map<IndexVector, double> partial_energy(const SparseCoefficients& c, const DimensionSet& s) {
  std::map<IndexVector, double> out;
  for (const auto& [n, v] : c) {
    std::vector<std::uint32_t> dense = n.dense();
    for (std::size_t j = 0; j < dense.size(); ++j)
      if (!s.contains(static_cast<std::uint32_t>(j))) dense[j] = 0;
    out[IndexVector::from_dense(dense)] += std::norm(v);
  }
  return out;
}

ExactEnergyScorer::ExactEnergyScorer(const SamplingPlan& plan, SparseCoefficients coeffs)
    : plan_(plan), coeffs_(std::move(coeffs)) {}

std::vector<double> ExactEnergyScorer::entry(std::size_t j, std::span<const IndexVector> candidates) {
  const auto e = partial_energy(coeffs_, plan_.partition()[j]);
  std::vector<double> out;
  for (const auto& n : candidates) out.push_back(e.count(n) ? e.at(n) : 0.0);
  return out;
}

std::vector<double> ExactEnergyScorer::pairing(std::size_t j, const PairingCandidates& candidates) {
  const auto e = partial_energy(coeffs_, plan_.pairing_block(j).w_dims);
  std::vector<double> out;
  for (const auto& n : candidates.combined) out.push_back(e.count(n) ? e.at(n) : 0.0);
  return out;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("bopb-test-" + tag + "-" + std::to_string(rng()));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
