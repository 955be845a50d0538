#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "pspin/errors.hpp"
#include "pspin/multi_index.hpp"

using namespace pspin;

namespace {

// All non-decreasing tuples of length p over [n] by nested enumeration of [n]^p.
std::vector<std::vector<int>> brute_canonical(int n, int p) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  while (true) {
    if (std::is_sorted(idx.begin(), idx.end())) out.push_back(idx);
    int k = 0;
    while (k < p && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == p) break;
  }
  return out;
}

}  // namespace

TEST_SUITE("multi_index") {
  TEST_CASE("binomial matches Pascal's triangle") {
    std::vector<std::vector<std::uint64_t>> pascal(61);
    for (int n = 0; n <= 60; ++n) {
      pascal[n].assign(static_cast<std::size_t>(n) + 1, 1);
      for (int k = 1; k < n; ++k) pascal[n][k] = pascal[n - 1][k - 1] + pascal[n - 1][k];
      for (int k = 0; k <= n; ++k) CHECK(binomial(n, k) == pascal[n][k]);
    }
    CHECK(binomial(5, 7) == 0);
    CHECK_THROWS_AS(binomial(200, 100), ShapeError);
  }

  TEST_CASE("canonical count and colex ranks agree with enumeration") {
    for (int p = 1; p <= 4; ++p) {
      for (int n = 1; n <= 6; ++n) {
        const auto tuples = brute_canonical(n, p);
        CanonicalIndexer ix(n, p);
        REQUIRE(ix.size() == tuples.size());
        CHECK(canonical_count(n, p) == tuples.size());
        std::set<std::uint64_t> ranks;
        for (const auto& t : tuples) {
          const auto r = ix.rank(t);
          ranks.insert(r);
          std::vector<int> back(static_cast<std::size_t>(p));
          ix.unrank(r, back);
          CHECK(back == t);
        }
        CHECK(ranks.size() == tuples.size());
        CHECK(*ranks.rbegin() == tuples.size() - 1);
      }
    }
  }

  TEST_CASE("advance visits ranks in order and ranks ignore permutation") {
    CanonicalIndexer ix(5, 3);
    std::vector<int> idx(3, 0);
    std::uint64_t expected = 0;
    do {
      CHECK(ix.rank(idx) == expected++);
      auto perm = idx;
      std::reverse(perm.begin(), perm.end());
      CHECK(ix.rank_any(perm) == ix.rank(idx));
    } while (CanonicalIndexer::advance(idx, 5));
    CHECK(expected == ix.size());
  }

  TEST_CASE("ranks are independent of the dimension") {
    CanonicalIndexer small(4, 3), large(9, 3);
    std::vector<int> idx(3, 0);
    do {
      CHECK(small.rank(idx) == large.rank(idx));
    } while (CanonicalIndexer::advance(idx, 4));
  }

  TEST_CASE("multiplicity counts distinct permutations") {
    for (const auto& t : brute_canonical(4, 4)) {
      auto perm = t;
      std::uint64_t count = 0;
      do {
        ++count;
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(multiplicity(t) == count);
      CHECK(distinct_count(t) == static_cast<int>(std::set<int>(t.begin(), t.end()).size()));
    }
  }
}
