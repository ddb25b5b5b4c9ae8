#include "bopb/index.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace bopb {

IndexVector::IndexVector(std::size_t ambient, std::vector<Entry> entries)
    : ambient_(ambient), entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.dim >= ambient_) throw std::invalid_argument("IndexVector: dimension out of range");
    if (e.value == 0) throw std::invalid_argument("IndexVector: zero value stored explicitly");
    if (i > 0 && entries_[i - 1].dim >= e.dim)
      throw std::invalid_argument("IndexVector: dimensions must be strictly increasing");
  }
}

IndexVector IndexVector::from_dense(std::span<const std::uint32_t> dense) {
  std::vector<Entry> entries;
  for (std::size_t j = 0; j < dense.size(); ++j)
    if (dense[j] != 0) entries.push_back({static_cast<std::uint32_t>(j), dense[j]});
  IndexVector n(dense.size());
  n.entries_ = std::move(entries);
  return n;
}

std::uint32_t IndexVector::at(std::size_t dim) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), dim,
                             [](const Entry& e, std::size_t d) { return e.dim < d; });
  return (it != entries_.end() && it->dim == dim) ? it->value : 0;
}

std::vector<std::uint32_t> IndexVector::dense() const {
  std::vector<std::uint32_t> out(ambient_, 0);
  for (const auto& e : entries_) out[e.dim] = e.value;
  return out;
}

std::strong_ordering operator<=>(const IndexVector& a, const IndexVector& b) {
  if (auto c = a.ambient_ <=> b.ambient_; c != 0) return c;
  // Walk both entry lists; the first dimension where the dense values differ decides.
  std::size_t i = 0, k = 0;
  while (i < a.entries_.size() || k < b.entries_.size()) {
    const std::uint32_t da = i < a.entries_.size() ? a.entries_[i].dim : UINT32_MAX;
    const std::uint32_t db = k < b.entries_.size() ? b.entries_[k].dim : UINT32_MAX;
    if (da == db) {
      if (auto c = a.entries_[i].value <=> b.entries_[k].value; c != 0) return c;
      ++i;
      ++k;
    } else if (da < db) {
      return std::strong_ordering::greater;  // a has a nonzero where b has 0
    } else {
      return std::strong_ordering::less;
    }
  }
  return std::strong_ordering::equal;
}

DimensionSet::DimensionSet(std::size_t ambient, std::vector<std::uint32_t> dims)
    : ambient_(ambient), dims_(std::move(dims)) {
  std::sort(dims_.begin(), dims_.end());
  if (std::adjacent_find(dims_.begin(), dims_.end()) != dims_.end())
    throw std::invalid_argument("DimensionSet: duplicate dimension");
  if (!dims_.empty() && dims_.back() >= ambient_)
    throw std::invalid_argument("DimensionSet: dimension out of range");
}

DimensionSet DimensionSet::all(std::size_t ambient) { return prefix(ambient, ambient); }

DimensionSet DimensionSet::prefix(std::size_t ambient, std::size_t count) {
  std::vector<std::uint32_t> dims(count);
  for (std::size_t j = 0; j < count; ++j) dims[j] = static_cast<std::uint32_t>(j);
  return DimensionSet(ambient, std::move(dims));
}

DimensionSet DimensionSet::singleton(std::size_t ambient, std::uint32_t dim) {
  return DimensionSet(ambient, {dim});
}

bool DimensionSet::contains(std::uint32_t dim) const {
  return std::binary_search(dims_.begin(), dims_.end(), dim);
}

DimensionSet DimensionSet::complement() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t j = 0; j < ambient_; ++j)
    if (!contains(j)) out.push_back(j);
  DimensionSet c(ambient_);
  c.dims_ = std::move(out);
  return c;
}

DimensionSet DimensionSet::united(const DimensionSet& other) const {
  if (ambient_ != other.ambient_) throw std::invalid_argument("DimensionSet: ambient mismatch");
  std::vector<std::uint32_t> out;
  std::set_union(dims_.begin(), dims_.end(), other.dims_.begin(), other.dims_.end(),
                 std::back_inserter(out));
  DimensionSet u(ambient_);
  u.dims_ = std::move(out);
  return u;
}

bool DimensionSet::disjoint(const DimensionSet& other) const {
  std::size_t i = 0, k = 0;
  while (i < dims_.size() && k < other.dims_.size()) {
    if (dims_[i] == other.dims_[k]) return false;
    if (dims_[i] < other.dims_[k]) ++i; else ++k;
  }
  return true;
}

std::size_t weight(const IndexVector& n) { return n.weight(); }

IndexVector restrict(const IndexVector& n, const DimensionSet& s) {
  if (n.ambient() != s.ambient()) throw std::invalid_argument("restrict: dimension mismatch");
  std::vector<Entry> kept;
  for (const auto& e : n.entries())
    if (s.contains(e.dim)) kept.push_back(e);
  return IndexVector(n.ambient(), std::move(kept));
}

IndexVector merge_disjoint(const IndexVector& a, const IndexVector& b) {
  if (a.ambient() != b.ambient()) throw std::invalid_argument("combine: dimension mismatch");
  std::vector<Entry> merged;
  merged.reserve(a.weight() + b.weight());
  auto ea = a.entries();
  auto eb = b.entries();
  std::size_t i = 0, k = 0;
  while (i < ea.size() || k < eb.size()) {
    if (k == eb.size() || (i < ea.size() && ea[i].dim < eb[k].dim)) {
      merged.push_back(ea[i++]);
    } else if (i == ea.size() || eb[k].dim < ea[i].dim) {
      merged.push_back(eb[k++]);
    } else {
      throw std::invalid_argument("combine: supports overlap");
    }
  }
  return IndexVector(a.ambient(), std::move(merged));
}

IndexVector combine(const IndexVector& a, const IndexVector& b, const DimensionSet& sa,
                    const DimensionSet& sb) {
  if (!sa.disjoint(sb)) throw std::invalid_argument("combine: coordinate sets overlap");
  for (const auto& e : a.entries())
    if (!sa.contains(e.dim)) throw std::invalid_argument("combine: supp(a) not inside Sa");
  for (const auto& e : b.entries())
    if (!sb.contains(e.dim)) throw std::invalid_argument("combine: supp(b) not inside Sb");
  return merge_disjoint(a, b);
}

bool in_space(const IndexVector& n, std::size_t N, std::size_t d) {
  if (n.weight() > d) return false;
  return std::all_of(n.entries().begin(), n.entries().end(),
                     [N](const Entry& e) { return e.value < N; });
}

BigInt space_cardinality(std::size_t N, std::size_t D, std::size_t d) {
  if (N < 1) throw std::invalid_argument("space_cardinality: N must be >= 1");
  if (d > D) throw std::invalid_argument("space_cardinality: d must be <= D");
  BigInt total = 0;
  BigInt binom = 1;  // C(D, k)
  BigInt power = 1;  // (N-1)^k
  for (std::size_t k = 0; k <= d; ++k) {
    total += binom * power;
    binom = binom * (D - k) / (k + 1);
    power *= (N - 1);
  }
  return total;
}

std::string to_string(const IndexVector& n) {
  std::string out;
  for (const auto& e : n.entries()) {
    if (!out.empty()) out += ',';
    out += std::to_string(e.dim);
    out += ':';
    out += std::to_string(e.value);
  }
  return out;
}

IndexVector parse_index(std::string_view text, std::size_t ambient) {
  std::vector<Entry> entries;
  auto parse_u32 = [](std::string_view s) {
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw std::invalid_argument("parse_index: malformed integer '" + std::string(s) + "'");
    return v;
  };
  while (!text.empty()) {
    auto comma = text.find(',');
    auto item = text.substr(0, comma);
    auto colon = item.find(':');
    if (colon == std::string_view::npos)
      throw std::invalid_argument("parse_index: expected dim:value");
    entries.push_back({parse_u32(item.substr(0, colon)), parse_u32(item.substr(colon + 1))});
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return IndexVector(ambient, std::move(entries));
}

}  // namespace bopb
