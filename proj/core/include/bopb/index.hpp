#ifndef BOPB_INDEX_HPP_
#define BOPB_INDEX_HPP_

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bopb {

/// One nonzero coordinate of a multi-index.
struct Entry {
  std::uint32_t dim = 0;
  std::uint32_t value = 0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

/// Sparse multi-index n in [N]^D. Only nonzero coordinates are stored, sorted
/// by dimension. The bound n_j < N and the weight bound are checked by
/// in_space(), not by the type.
class IndexVector {
 public:
  IndexVector() = default;
  explicit IndexVector(std::size_t ambient) : ambient_(ambient) {}
  /// Throws std::invalid_argument if dims are unsorted, duplicated, out of
  /// range, or a stored value is 0.
  IndexVector(std::size_t ambient, std::vector<Entry> entries);

  /// Builds from a dense vector (zeros dropped).
  static IndexVector from_dense(std::span<const std::uint32_t> dense);

  std::size_t ambient() const { return ambient_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t weight() const { return entries_.size(); }
  bool is_zero() const { return entries_.empty(); }

  /// Value at dimension `dim` (0 when absent).
  std::uint32_t at(std::size_t dim) const;
  std::vector<std::uint32_t> dense() const;

  friend bool operator==(const IndexVector&, const IndexVector&) = default;
  /// Lexicographic order of the dense expansions (absent = 0).
  friend std::strong_ordering operator<=>(const IndexVector& a, const IndexVector& b);

 private:
  std::size_t ambient_ = 0;
  std::vector<Entry> entries_;
};

/// Sorted subset S of [D].
class DimensionSet {
 public:
  DimensionSet() = default;
  explicit DimensionSet(std::size_t ambient) : ambient_(ambient) {}
  /// Sorts and validates; throws std::invalid_argument on duplicates or dims >= D.
  DimensionSet(std::size_t ambient, std::vector<std::uint32_t> dims);

  static DimensionSet all(std::size_t ambient);
  static DimensionSet prefix(std::size_t ambient, std::size_t count);
  static DimensionSet singleton(std::size_t ambient, std::uint32_t dim);

  std::size_t ambient() const { return ambient_; }
  std::span<const std::uint32_t> dims() const { return dims_; }
  std::size_t size() const { return dims_.size(); }
  bool empty() const { return dims_.empty(); }
  bool contains(std::uint32_t dim) const;

  DimensionSet complement() const;
  DimensionSet united(const DimensionSet& other) const;
  bool disjoint(const DimensionSet& other) const;

  friend bool operator==(const DimensionSet&, const DimensionSet&) = default;

 private:
  std::size_t ambient_ = 0;
  std::vector<std::uint32_t> dims_;
};

using BigInt = boost::multiprecision::cpp_int;

/// ||n||_0.
std::size_t weight(const IndexVector& n);

/// n_S: keeps coordinates in S, zeroes the rest.
IndexVector restrict(const IndexVector& n, const DimensionSet& s);

/// n + m for indices supported on the disjoint sets sa and sb.
IndexVector combine(const IndexVector& a, const IndexVector& b, const DimensionSet& sa,
                    const DimensionSet& sb);

/// Disjoint merge without the set-level checks; throws only if supports overlap.
IndexVector merge_disjoint(const IndexVector& a, const IndexVector& b);

/// True iff every value < N and weight <= d.
bool in_space(const IndexVector& n, std::size_t N, std::size_t d);

/// |I_{N,d}| = sum_{k<=d} C(D,k) (N-1)^k.
BigInt space_cardinality(std::size_t N, std::size_t D, std::size_t d);

/// `j0:v0,j1:v1,...`; the zero index serializes as the empty string.
std::string to_string(const IndexVector& n);
IndexVector parse_index(std::string_view text, std::size_t ambient);

}  // namespace bopb

#endif  // BOPB_INDEX_HPP_
