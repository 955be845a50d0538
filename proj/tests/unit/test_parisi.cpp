#include <doctest.h>

#include <cmath>

#include "pspin/errors.hpp"
#include "pspin/free_energy.hpp"
#include "pspin/parisi.hpp"
#include "pspin/rng.hpp"

using namespace pspin;

namespace {

// Midpoint Riemann sums over 10^6 cells, with x_hat accumulated from q = 1 downwards.
double riemann_functional(const RSBProfile& prof, const MixtureSpec& mix, double beta) {
  const int cells = 1000000;
  const double h = 1.0 / cells;
  std::vector<double> xhat(static_cast<std::size_t>(cells) + 1, 0.0);
  for (int k = cells - 1; k >= 0; --k) xhat[k] = xhat[k + 1] + prof.x((k + 0.5) * h) * h;
  const double b2 = beta * beta;
  double second = 0.0, entropy = 0.0;
  for (int k = 0; k < cells; ++k) {
    const double q = (k + 0.5) * h;
    const double xh = 0.5 * (xhat[k] + xhat[k + 1]);
    second += b2 * mix.xi_second(q) * xh * h;
    if (q < prof.q_hat()) entropy += h / xh;
  }
  const double first = b2 * mix.xi_prime(0.0) * xhat[0];
  return 0.5 * (first + second + entropy + std::log(1 - prof.q_hat())) / beta;
}

RSBProfile random_profile(CounterRng& rng, int k) {
  std::vector<double> q, m;
  double qs = 0.0, ms = 0.0;
  for (int i = 0; i < k; ++i) {
    qs += (0.95 - qs) * rng.uniform() * 0.7;
    ms += (1.0 - ms) * rng.uniform() * 0.8;
    q.push_back(qs);
    m.push_back(ms);
  }
  return {q, m};
}

}  // namespace

TEST_SUITE("parisi") {
  TEST_CASE("constant profile gives the annealed value") {
    for (double beta : {0.3, 1.0, 4.0}) {
      for (const auto& mix : {MixtureSpec({0.0, 1.0}), MixtureSpec({0.5, 0.8, 0.3})}) {
        const auto v = cs_functional(RSBProfile::constant_one(), mix, beta);
        CHECK(v.value == doctest::Approx(annealed_bound(mix, beta)).epsilon(1e-15));
        CHECK(cs_functional_quadrature(RSBProfile::constant_one(), mix, beta).value ==
              doctest::Approx(v.value).epsilon(1e-8));
      }
    }
    CHECK(cs_functional(RSBProfile::constant_one(), MixtureSpec({0.0, 1.0}), 1.0).value == 0.5);
  }

  TEST_CASE("closed form agrees with quadrature on random profiles") {
    CounterRng rng(4);
    const MixtureSpec mix({0.2, 1.0, 0.6, 0.3});
    for (int trial = 0; trial < 40; ++trial) {
      const auto prof = random_profile(rng, 1 + trial % 4);
      const double beta = 0.2 + 5 * rng.uniform();
      const auto a = cs_functional(prof, mix, beta);
      const auto b = cs_functional_quadrature(prof, mix, beta);
      CHECK(a.value == doctest::Approx(b.value).epsilon(1e-8));
      for (int t = 0; t < 4; ++t) CHECK(a.terms[t] == doctest::Approx(b.terms[t]).epsilon(1e-8).scale(1.0));
    }
  }

  TEST_CASE("two-atom profile against a Riemann sum") {
    const RSBProfile prof({0.3, 0.8}, {0.25, 0.6});
    const MixtureSpec mix({0.0, 1.0, 0.5});
    const double beta = 2.0;
    CHECK(cs_functional(prof, mix, beta).value == doctest::Approx(riemann_functional(prof, mix, beta)).epsilon(1e-8));
  }

  TEST_CASE("profile invariants are enforced") {
    CHECK_THROWS(RSBProfile({0.5, 0.4}, {0.1, 0.2}));
    CHECK_THROWS(RSBProfile({0.2, 0.4}, {0.3, 0.2}));
    CHECK_THROWS(RSBProfile({0.2, 1.0}, {0.1, 0.2}));
    CHECK_THROWS(RSBProfile({0.2}, {1.5}));
    CHECK_THROWS(RSBProfile({0.2}, {0.1, 0.2}));
    const RSBProfile p({0.2, 0.5}, {0.1, 0.4});
    CHECK(p.x(0.0) == 0.1);
    CHECK(p.x(0.2) == 0.4);
    CHECK(p.x(0.5) == 1.0);
    CHECK(p.x_hat(0.0) == doctest::Approx(0.02 + 0.12 + 0.5));
  }

  TEST_CASE("entropy terms alone are non-negative") {
    CounterRng rng(8);
    const MixtureSpec tiny({0.0, 1e-9});
    for (int trial = 0; trial < 50; ++trial) {
      const auto v = cs_functional(random_profile(rng, 1 + trial % 3), tiny, 1.0);
      CHECK(v.terms[2] + v.terms[3] >= -1e-14);
    }
  }

  TEST_CASE("replica-symmetric regime minimizes at the annealed value") {
    const MixtureSpec mix({0.0, 1.0});
    const auto r = minimize_cs(mix, 0.5, 3);
    CHECK(r.value.value <= 0.25 + 1e-6);
    double scan = 1e300;
    for (int i = 0; i < 200; ++i) {
      for (int j = 0; j <= 50; ++j) {
        const double q = 0.995 * i / 200.0;
        if (q == 0.0) continue;
        scan = std::min(scan, cs_functional(RSBProfile({q}, {j / 50.0}), mix, 0.5).value);
      }
    }
    CHECK(r.value.value <= std::min(scan, 0.25) + 1e-9);
  }

  TEST_CASE("minimized value is non-increasing in the atom count and bounds every profile") {
    const auto mix = MixtureSpec::pure(4);
    const double beta = 4.0;
    const auto one = minimize_cs(mix, beta, 1);
    const auto three = minimize_cs(mix, beta, 3);
    CHECK(three.value.value <= one.value.value + 1e-12);
    CounterRng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      CHECK(cs_functional(random_profile(rng, 1 + trial % 3), mix, beta).value >= three.value.value - 1e-9);
    }
  }

  TEST_CASE("homogeneity under xi -> c^2 xi at matched beta c") {
    const MixtureSpec mix({0.0, 1.0, 0.5});
    const RSBProfile prof({0.3, 0.7}, {0.2, 0.5});
    const double c = 1.7, beta = 1.3;
    CHECK(cs_functional(prof, mix.scaled(c), beta).value ==
          doctest::Approx(c * cs_functional(prof, mix, c * beta).value).epsilon(1e-13));
    const std::vector<double> betas{25, 50, 100, 200};
    const auto base = gs_prediction(mix, betas, 2);
    std::vector<double> scaled_betas;
    for (double b : betas) scaled_betas.push_back(b / c);
    const auto scaled = gs_prediction(mix.scaled(c), scaled_betas, 2);
    CHECK(scaled.prediction == doctest::Approx(c * base.prediction).epsilon(1e-6));
  }

  TEST_CASE("zero-temperature extrapolation for the spherical 2-spin model") {
    // The top eigenvalue of the order-2 disorder divided by sqrt(N) tends to sqrt(2).
    const auto pred = gs_prediction(MixtureSpec({0.0, 1.0}), {100, 200, 400, 800}, 3);
    CHECK_FALSE(pred.flagged);
    CHECK(pred.prediction == doctest::Approx(std::sqrt(2.0)).epsilon(0.005));
    for (std::size_t k = 1; k < pred.values.size(); ++k) CHECK(pred.values[k] >= pred.values[k - 1]);
    CHECK_THROWS(gs_prediction(MixtureSpec({0.0, 1.0}), {10, 20}, 2));
    CHECK_THROWS(gs_prediction(MixtureSpec({0.0, 1.0}), {10, 5, 20}, 2));
  }
}
