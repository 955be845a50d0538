#include <doctest.h>

#include <cmath>
#include <numeric>

#include "pspin/domain.hpp"
#include "pspin/errors.hpp"
#include "pspin/mixture.hpp"
#include "pspin/rng.hpp"

using namespace pspin;

TEST_SUITE("mixture_domain") {
  TEST_CASE("xi and its derivatives against finite differences") {
    const MixtureSpec mix({0.3, 1.0, 0.5, 0.2});
    CHECK(mix.max_order() == 4);
    CHECK(mix.active_orders() == std::vector<int>{1, 2, 3, 4});
    CHECK(mix.xi(1.0) == doctest::Approx(0.09 + 1.0 + 0.25 + 0.04));
    const double h = 1e-5;
    for (double t : {-0.7, 0.1, 0.6, 1.0}) {
      CHECK(mix.xi_prime(t) == doctest::Approx((mix.xi(t + h) - mix.xi(t - h)) / (2 * h)).epsilon(1e-8));
      CHECK(mix.xi_second(t) ==
            doctest::Approx((mix.xi_prime(t + h) - mix.xi_prime(t - h)) / (2 * h)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(xi_eval(mix, 1.5, 0), DomainError);
    CHECK(mix.scaled(2.0).xi(0.5) == doctest::Approx(4.0 * mix.xi(0.5)));
    CHECK(MixtureSpec::pure(3, 2.0).gamma(3) == 2.0);
    CHECK(MixtureSpec::pure(3, 2.0).gamma(5) == 0.0);
  }

  TEST_CASE("retraction lands on each domain") {
    CounterRng rng(5);
    const auto part = SpeciesPartition::contiguous({3, 7}, {0.3, 0.7}, {{0.0, 0.0}, {0.0, 1.0, 1.0, 0.0}});
    for (const auto& d : {DomainSpec::l2(), DomainSpec::lq(3.0), DomainSpec::lq(20.0), DomainSpec::product(part)}) {
      auto x = sample_domain(d, 10, rng);
      CHECK(constraint_residual(d, x) < 1e-12);
      for (auto& v : x) v *= 1.7;
      CHECK(constraint_residual(d, x) > 1e-3);
      retract(d, x);
      CHECK(constraint_residual(d, x) < 1e-12);
    }
  }

  TEST_CASE("product domain blocks have radius sqrt(lambda_s N)") {
    const auto part = SpeciesPartition::contiguous({4, 6}, {0.4, 0.6}, {{0.0, 0.0}, {0.0, 1.0, 1.0, 0.0}});
    CounterRng rng(1);
    const auto x = sample_domain(DomainSpec::product(part), 10, rng);
    for (int s = 0; s < 2; ++s) {
      double r2 = 0.0;
      for (int i : part.block(s)) r2 += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      CHECK(r2 == doctest::Approx(part.weight(s) * 10));
    }
    const int idx[2] = {0, 9};
    CHECK(part.coupling_for_indices(idx) == 1.0);
    const int same[2] = {0, 1};
    CHECK(part.coupling_for_indices(same) == 0.0);
  }

  TEST_CASE("invalid domains are refused") {
    CHECK_THROWS(DomainSpec::lq(2.0));
    CHECK_THROWS(DomainSpec::lq(1.5));
    CHECK_THROWS(SpeciesPartition({0, 2, 1}, {0.5, 0.5}, {{0.0, 0.0}}));
    CHECK_THROWS(SpeciesPartition({0, 1, 1}, {0.5, 0.6}, {{0.0, 0.0}}));
    CHECK_THROWS(SpeciesPartition::contiguous({2, 2}, {0.5, 0.5}, {{0.0, 0.0}, {0.0, 1.0, 2.0, 0.0}}));
  }
}
