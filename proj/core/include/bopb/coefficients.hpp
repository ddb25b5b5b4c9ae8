#ifndef BOPB_COEFFICIENTS_HPP_
#define BOPB_COEFFICIENTS_HPP_

#include <complex>
#include <map>
#include <vector>

#include "bopb/index.hpp"

namespace bopb {

/// Sparse coefficient vector over I_{N,d}, ordered by index.
class SparseCoefficients {
 public:
  using Map = std::map<IndexVector, std::complex<double>>;
  using const_iterator = Map::const_iterator;

  SparseCoefficients() = default;

  std::complex<double>& operator[](const IndexVector& n) { return values_[n]; }
  std::complex<double> get(const IndexVector& n) const;
  bool contains(const IndexVector& n) const { return values_.count(n) != 0; }
  void erase(const IndexVector& n) { values_.erase(n); }

  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  const_iterator begin() const { return values_.begin(); }
  const_iterator end() const { return values_.end(); }

  /// Indices in lexicographic order.
  std::vector<IndexVector> support() const;
  double norm() const;

  /// Copy restricted to the given index set.
  SparseCoefficients restricted_to(const std::vector<IndexVector>& omega) const;

  friend bool operator==(const SparseCoefficients&, const SparseCoefficients&) = default;

 private:
  Map values_;
};

/// ||a - b||_2 over the union of supports.
double distance(const SparseCoefficients& a, const SparseCoefficients& b);

}  // namespace bopb

#endif  // BOPB_COEFFICIENTS_HPP_
