#include "pspin/multi_index.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>
#include <string>

#include "pspin/errors.hpp"

namespace pspin {

std::uint64_t factorial(int n) {
  if (n < 0 || n > 20) throw DomainError("factorial: argument out of range");
  std::uint64_t f = 1;
  for (int k = 2; k <= n; ++k) f *= static_cast<std::uint64_t>(k);
  return f;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t acc = 1;
  for (int j = 1; j <= k; ++j) {
    // acc * (n - k + j) is divisible by j; cancel the common factor first.
    const auto g = std::gcd(acc, static_cast<std::uint64_t>(j));
    acc /= g;
    const auto factor = static_cast<std::uint64_t>(n - k + j) / (static_cast<std::uint64_t>(j) / g);
    if (acc > std::numeric_limits<std::uint64_t>::max() / factor) {
      throw ShapeError("binomial(" + std::to_string(n) + ", " + std::to_string(k) + ") overflows");
    }
    acc *= factor;
  }
  return acc;
}

std::uint64_t canonical_count(int n, int p) {
  if (n < 1 || p < 1) throw ShapeError("canonical_count: need n >= 1 and p >= 1");
  return binomial(n + p - 1, p);
}

std::uint64_t multiplicity(std::span<const int> idx) {
  const int p = static_cast<int>(idx.size());
  if (p < 1 || p > 20) throw ShapeError("multiplicity: index length out of range");
  std::array<int, 20> sorted{};
  std::copy(idx.begin(), idx.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.begin() + p);
  std::uint64_t denom = 1;
  int run = 1;
  for (int k = 1; k <= p; ++k) {
    if (k < p && sorted[k] == sorted[k - 1]) {
      ++run;
    } else {
      denom *= factorial(run);
      run = 1;
    }
  }
  return factorial(p) / denom;
}

int distinct_count(std::span<const int> idx) {
  std::vector<int> v(idx.begin(), idx.end());
  std::sort(v.begin(), v.end());
  return static_cast<int>(std::unique(v.begin(), v.end()) - v.begin());
}

CanonicalIndexer::CanonicalIndexer(int n, int p) : n_(n), p_(p) {
  if (n < 1) throw ShapeError("tensor dimension must be >= 1");
  if (p < 1 || p > kMaxOrder) throw ShapeError("tensor order must be in [1, 6]");
  size_ = canonical_count(n, p);
  if (size_ > (std::uint64_t{1} << 34)) throw ShapeError("tensor too large for dense canonical storage");
  const int rows = n + p;
  table_.assign(static_cast<std::size_t>(rows + 1) * (p + 1), 0);
  for (int m = 0; m <= rows; ++m) {
    for (int j = 0; j <= p; ++j) table_[static_cast<std::size_t>(m) * (p + 1) + j] = binomial(m, j);
  }
}

std::uint64_t CanonicalIndexer::rank(std::span<const int> sorted) const {
  if (static_cast<int>(sorted.size()) != p_) throw ShapeError("index length does not match tensor order");
  std::uint64_t r = 0;
  for (int k = 0; k < p_; ++k) {
    const int i = sorted[k];
    if (i < 0 || i >= n_) throw ShapeError("index out of range");
    if (k > 0 && i < sorted[k - 1]) throw ShapeError("rank: index tuple is not sorted");
    r += choose(i + k, k + 1);
  }
  return r;
}

std::uint64_t CanonicalIndexer::rank_any(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != p_) throw ShapeError("index length does not match tensor order");
  std::array<int, kMaxOrder> sorted{};
  std::copy(idx.begin(), idx.end(), sorted.begin());
  std::sort(sorted.begin(), sorted.begin() + p_);
  return rank(std::span<const int>(sorted.data(), static_cast<std::size_t>(p_)));
}

void CanonicalIndexer::unrank(std::uint64_t r, std::span<int> out) const {
  if (static_cast<int>(out.size()) != p_) throw ShapeError("index length does not match tensor order");
  if (r >= size_) throw ShapeError("rank out of range");
  for (int k = p_ - 1; k >= 0; --k) {
    // largest c with C(c, k+1) <= r
    int lo = k, hi = n_ - 1 + k;
    while (lo < hi) {
      int mid = (lo + hi + 1) / 2;
      if (choose(mid, k + 1) <= r) lo = mid; else hi = mid - 1;
    }
    r -= choose(lo, k + 1);
    out[k] = lo - k;
  }
}

bool CanonicalIndexer::advance(std::span<int> idx, int n) noexcept {
  const int p = static_cast<int>(idx.size());
  for (int k = 0; k < p; ++k) {
    const int limit = (k + 1 < p) ? idx[k + 1] : n - 1;
    if (idx[k] < limit) {
      ++idx[k];
      for (int j = 0; j < k; ++j) idx[j] = 0;
      return true;
    }
  }
  return false;
}

}  // namespace pspin
