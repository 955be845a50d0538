#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "pspin/multi_index.hpp"

namespace pspin {

/// Order-p symmetric tensor over [N]^p stored by canonical (non-decreasing)
/// multi-index. Entry lookup accepts any permutation of a canonical index.
class SymmetricTensor {
 public:
  SymmetricTensor(int p, int n);
  SymmetricTensor(int p, int n, std::vector<double> entries);

  int order() const noexcept { return indexer_.order(); }
  int dim() const noexcept { return indexer_.dim(); }
  std::uint64_t size() const noexcept { return indexer_.size(); }
  const CanonicalIndexer& indexer() const noexcept { return indexer_; }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> entries() noexcept { return entries_; }

  /// Lookup by any permutation of a 0-based index tuple.
  double at(std::span<const int> idx) const;
  void set(std::span<const int> idx, double value);

  /// Multiplicity of the canonical class of `idx` after a range check.
  std::uint64_t multiplicity(std::span<const int> idx) const;

  double sup_norm() const noexcept;

  /// Calls f(idx, rank, value) for every canonical entry in rank order.
  template <class F>
  void for_each_canonical(F&& f) const {
    std::vector<int> idx(static_cast<std::size_t>(order()), 0);
    std::uint64_t r = 0;
    do {
      f(std::span<const int>(idx), r, entries_[r]);
      ++r;
    } while (CanonicalIndexer::advance(idx, dim()));
  }

  /// Full symmetric matrix (p == 2 only).
  Eigen::MatrixXd to_dense_matrix() const;

  /// Row-major dense array of all N^p entries; refuses more than 2^24 entries.
  std::vector<double> to_dense() const;

  SymmetricTensor& operator+=(const SymmetricTensor& other);
  SymmetricTensor& operator-=(const SymmetricTensor& other);
  SymmetricTensor& operator*=(double c) noexcept;

  friend SymmetricTensor operator+(SymmetricTensor a, const SymmetricTensor& b) { return a += b; }
  friend SymmetricTensor operator-(SymmetricTensor a, const SymmetricTensor& b) { return a -= b; }
  friend SymmetricTensor operator*(double c, SymmetricTensor a) { return a *= c; }
  friend SymmetricTensor operator-(SymmetricTensor a) { return a *= -1.0; }

 private:
  void check_same_shape(const SymmetricTensor& other) const;

  CanonicalIndexer indexer_;
  std::vector<double> entries_;
};

}  // namespace pspin
