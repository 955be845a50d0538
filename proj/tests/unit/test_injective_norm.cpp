#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "pspin/disorder.hpp"
#include "pspin/injective_norm.hpp"

using namespace pspin;

TEST_SUITE("injective_norm") {
  TEST_CASE("order two reduces to the spectral norm") {
    const auto t = sample_tensor(2, 12, DisorderSpec::gaussian(), 3);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.to_dense_matrix());
    const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
    const auto r = injective_norm(t, 20, 1);
    CHECK(r.value == doctest::Approx(spectral).epsilon(1e-9));
    CHECK(r.diagonal_value == doctest::Approx(spectral).epsilon(1e-9));
  }

  TEST_CASE("order one is the Euclidean norm") {
    const auto t = sample_tensor(1, 7, DisorderSpec::uniform(), 2);
    double norm = 0.0;
    for (double v : t.entries()) norm += v * v;
    CHECK(injective_norm(t, 3, 1).value == doctest::Approx(std::sqrt(norm)));
  }

  TEST_CASE("diagonal maximum on the circle matches a fine grid") {
    const auto t = sample_tensor(3, 2, DisorderSpec::gaussian(), 8);
    double grid = 0.0;
    const int points = 200000;
    for (int k = 0; k < points; ++k) {
      const double th = 2 * std::numbers::pi * k / points;
      const double c = std::cos(th), s = std::sin(th);
      const int i000[3] = {0, 0, 0}, i001[3] = {0, 0, 1}, i011[3] = {0, 1, 1}, i111[3] = {1, 1, 1};
      const double f = t.at(i000) * c * c * c + 3 * t.at(i001) * c * c * s + 3 * t.at(i011) * c * s * s +
                       t.at(i111) * s * s * s;
      grid = std::max(grid, std::abs(f));
    }
    const auto r = injective_norm(t, 50, 4);
    CHECK(r.diagonal_value == doctest::Approx(grid).epsilon(1e-8));
    CHECK(r.diagonal_value >= grid - 1e-12);
  }

  TEST_CASE("symmetric tensors attain the injective norm on the diagonal") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto t = sample_tensor(3, 4, DisorderSpec::rademacher(), 50 + s);
      const auto r = injective_norm(t, 100, s);
      CHECK(r.converged);
      CHECK(std::abs(r.value - r.diagonal_value) <= 1e-6 * r.value);
      double norm = 0.0;
      for (double v : r.diagonal_witness) norm += v * v;
      CHECK(norm == doctest::Approx(1.0));
    }
  }
}
