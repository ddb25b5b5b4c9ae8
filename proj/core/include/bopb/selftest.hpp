#ifndef BOPB_SELFTEST_HPP_
#define BOPB_SELFTEST_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace bopb {

struct PropertyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Every sieve output is a subset of its candidates and has at most 2s elements.
PropertyCheck check_sieve_containment(std::uint64_t seed);
/// Single Fourier atom: the estimator returns 1 on every block for the matching partial index.
PropertyCheck check_single_atom_energy(std::uint64_t seed);
/// Phi applies agree with a dense matrix built entry by entry (D=3, N=4, d=3).
PropertyCheck check_phi_dense(std::uint64_t seed);
/// Energetic partial indices over S1 u S2 are sums of energetic indices over S1 and S2.
PropertyCheck check_heavy_set_expansion(std::uint64_t seed);
/// Monte-Carlo Gram matrices of the three 1-D bases are within 5e-3 of the identity.
PropertyCheck check_orthonormality(std::uint64_t seed, std::size_t samples = 4'000'000);
/// Two runs of the same seeded trial produce identical iterates.
PropertyCheck check_determinism(std::uint64_t seed);
/// Noiseless: ||x - a^k|| <= 0.5 ||x - a^{k-1}|| + 1e-8 whenever the identified set
/// merged with supp(a^{k-1}) covers supp(x).
PropertyCheck check_contraction(std::uint64_t seed, std::size_t trials = 5);

std::vector<PropertyCheck> run_property_suite(std::uint64_t seed = 20240601);

}  // namespace bopb

#endif  // BOPB_SELFTEST_HPP_
