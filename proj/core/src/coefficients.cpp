#include "bopb/coefficients.hpp"

#include <cmath>

namespace bopb {

std::complex<double> SparseCoefficients::get(const IndexVector& n) const {
  auto it = values_.find(n);
  return it == values_.end() ? std::complex<double>{} : it->second;
}

std::vector<IndexVector> SparseCoefficients::support() const {
  std::vector<IndexVector> out;
  out.reserve(values_.size());
  for (const auto& [n, _] : values_) out.push_back(n);
  return out;
}

double SparseCoefficients::norm() const {
  double sum = 0.0;
  for (const auto& [_, c] : values_) sum += std::norm(c);
  return std::sqrt(sum);
}

SparseCoefficients SparseCoefficients::restricted_to(const std::vector<IndexVector>& omega) const {
  SparseCoefficients out;
  for (const auto& n : omega) {
    auto it = values_.find(n);
    if (it != values_.end()) out.values_.emplace(n, it->second);
  }
  return out;
}

double distance(const SparseCoefficients& a, const SparseCoefficients& b) {
  double sum = 0.0;
  for (const auto& [n, c] : a) sum += std::norm(c - b.get(n));
  for (const auto& [n, c] : b)
    if (!a.contains(n)) sum += std::norm(c);
  return std::sqrt(sum);
}

}  // namespace bopb
