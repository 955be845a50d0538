#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pspin {

/// Largest supported interaction order.
inline constexpr int kMaxOrder = 6;

std::uint64_t factorial(int n);

/// Exact binomial coefficient; throws ShapeError on 64-bit overflow.
std::uint64_t binomial(int n, int k);

/// Number of non-decreasing multi-indices of length p over [N]: C(N+p-1, p).
std::uint64_t canonical_count(int n, int p);

/// p! / |{i_1..i_p}|!, where |.|! is the product of the factorials of the
/// frequency counts. Independent of the order of `idx`.
std::uint64_t multiplicity(std::span<const int> idx);

/// Number of distinct values in `idx`.
int distinct_count(std::span<const int> idx);

/// Ranks non-decreasing multi-indices (0-based) in colexicographic order.
///
/// With c_k = i_k + k the tuple becomes a strictly increasing combination and
/// rank = sum_k C(c_k, k+1). The rank of a tuple does not depend on N, so a
/// tensor over [n] is a prefix of the same tensor over [N] for n < N.
class CanonicalIndexer {
 public:
  CanonicalIndexer(int n, int p);

  int dim() const noexcept { return n_; }
  int order() const noexcept { return p_; }
  std::uint64_t size() const noexcept { return size_; }

  /// Rank of an already sorted (non-decreasing) index tuple. O(p).
  std::uint64_t rank(std::span<const int> sorted) const;

  /// Rank of an arbitrary permutation of a canonical tuple.
  std::uint64_t rank_any(std::span<const int> idx) const;

  void unrank(std::uint64_t r, std::span<int> out) const;

  /// Steps `idx` to the next tuple in colex order; false once past the end.
  static bool advance(std::span<int> idx, int n) noexcept;

 private:
  std::uint64_t choose(int m, int j) const noexcept { return table_[static_cast<std::size_t>(m) * (p_ + 1) + j]; }

  int n_;
  int p_;
  std::uint64_t size_;
  std::vector<std::uint64_t> table_;
};

}  // namespace pspin
