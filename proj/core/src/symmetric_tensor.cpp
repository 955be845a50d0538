#include "pspin/symmetric_tensor.hpp"

#include <algorithm>
#include <cmath>

#include "pspin/errors.hpp"

namespace pspin {

SymmetricTensor::SymmetricTensor(int p, int n) : indexer_(n, p), entries_(indexer_.size(), 0.0) {}

SymmetricTensor::SymmetricTensor(int p, int n, std::vector<double> entries)
    : indexer_(n, p), entries_(std::move(entries)) {
  if (entries_.size() != indexer_.size()) throw ShapeError("entry count does not match C(N+p-1, p)");
}

double SymmetricTensor::at(std::span<const int> idx) const { return entries_[indexer_.rank_any(idx)]; }

void SymmetricTensor::set(std::span<const int> idx, double value) { entries_[indexer_.rank_any(idx)] = value; }

std::uint64_t SymmetricTensor::multiplicity(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != order()) throw ShapeError("index length does not match tensor order");
  for (int i : idx) {
    if (i < 0 || i >= dim()) throw ShapeError("index out of range");
  }
  return pspin::multiplicity(idx);
}

double SymmetricTensor::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : entries_) m = std::max(m, std::abs(v));
  return m;
}

Eigen::MatrixXd SymmetricTensor::to_dense_matrix() const {
  if (order() != 2) throw ShapeError("to_dense_matrix requires an order-2 tensor");
  const int n = dim();
  Eigen::MatrixXd a(n, n);
  std::size_t r = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i, ++r) {
      a(i, j) = entries_[r];
      a(j, i) = entries_[r];
    }
  }
  return a;
}

std::vector<double> SymmetricTensor::to_dense() const {
  const int p = order();
  const int n = dim();
  const double total = std::pow(static_cast<double>(n), p);
  if (total > static_cast<double>(1 << 24)) throw ShapeError("to_dense: tensor too large");
  std::vector<double> dense(static_cast<std::size_t>(total));
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  for (std::size_t flat = 0; flat < dense.size(); ++flat) {
    std::size_t rem = flat;
    for (int k = p - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(rem % n);
      rem /= n;
    }
    dense[flat] = at(idx);
  }
  return dense;
}

void SymmetricTensor::check_same_shape(const SymmetricTensor& other) const {
  if (other.order() != order() || other.dim() != dim()) throw ShapeError("tensor shapes differ");
}

SymmetricTensor& SymmetricTensor::operator+=(const SymmetricTensor& other) {
  check_same_shape(other);
  for (std::size_t r = 0; r < entries_.size(); ++r) entries_[r] += other.entries_[r];
  return *this;
}

SymmetricTensor& SymmetricTensor::operator-=(const SymmetricTensor& other) {
  check_same_shape(other);
  for (std::size_t r = 0; r < entries_.size(); ++r) entries_[r] -= other.entries_[r];
  return *this;
}

SymmetricTensor& SymmetricTensor::operator*=(double c) noexcept {
  for (double& v : entries_) v *= c;
  return *this;
}

}  // namespace pspin
