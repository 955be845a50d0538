#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "pspin/disorder.hpp"
#include "pspin/errors.hpp"
#include "pspin/ground_state.hpp"
#include "pspin/hamiltonian.hpp"

using namespace pspin;

TEST_SUITE("ground_state") {
  TEST_CASE("p = 2 ground state equals gamma sqrt(N) times the top eigenvalue") {
    const int n = 150;
    const std::vector<SymmetricTensor> ts{sample_tensor(2, n, DisorderSpec::gaussian(), 5)};
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ts[0].to_dense_matrix());
    const double lmax = es.eigenvalues().maxCoeff();
    const auto gs = solve_gs(ts, MixtureSpec({0.0, 1.5}), DomainSpec::l2(), GsSolverConfig{}, 3);
    CHECK(gs.converged);
    CHECK(gs.argmax.feasible());
    CHECK(gs.value == doctest::Approx(1.5 * std::sqrt(n) * lmax).epsilon(1e-9));
    const auto oracle = eigen_oracle_p2(ts[0]);
    CHECK(oracle.converged);
    CHECK(oracle.lambda_max == doctest::Approx(lmax).epsilon(1e-11));
  }

  TEST_CASE("Lanczos top eigenpair against a dense solver") {
    for (std::uint64_t s = 0; s < 3; ++s) {
      const auto t = sample_tensor(2, 200, DisorderSpec::student_t(3), s);
      const Eigen::MatrixXd a = t.to_dense_matrix();
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
      const auto r = top_eigenpair(a, 1e-12, 20000, s);
      CHECK(r.lambda_max == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-11));
      const Eigen::Map<const Eigen::VectorXd> v(r.eigenvector.data(), 200);
      CHECK((a * v - r.lambda_max * v).norm() < 1e-8 * std::abs(r.lambda_max));
    }
  }

  TEST_CASE("top singular value against a dense SVD") {
    const auto t = sample_tensor(2, 60, DisorderSpec::gaussian(), 2);
    const Eigen::MatrixXd b = t.to_dense_matrix().block(0, 20, 20, 40);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
    const auto r = top_singular_value(b);
    CHECK(r.converged);
    CHECK(r.sigma_max == doctest::Approx(svd.singularValues()(0)).epsilon(1e-11));
  }

  TEST_CASE("mixed model on the circle matches a fine grid") {
    const int n = 2;
    const MixtureSpec mix({0.3, 1.0, 0.8, 0.5});
    std::vector<SymmetricTensor> ts;
    for (int p = 1; p <= 4; ++p) ts.push_back(sample_tensor(p, n, DisorderSpec::gaussian(), 40 + p));
    const Hamiltonian h(ts, mix);
    double grid = -1e300;
    const int points = 400000;
    for (int k = 0; k < points; ++k) {
      const double th = 2 * std::numbers::pi * k / points;
      const double x[2] = {std::sqrt(2.0) * std::cos(th), std::sqrt(2.0) * std::sin(th)};
      grid = std::max(grid, h.value(x));
    }
    GsSolverConfig cfg;
    cfg.restarts = 20;
    const auto gs = solve_gs(h, cfg, 7);
    CHECK(gs.value >= grid - 1e-9);
    CHECK(gs.value == doctest::Approx(grid).epsilon(1e-8));
  }

  TEST_CASE("solutions stay on non-Euclidean domains") {
    const int n = 40;
    const std::vector<SymmetricTensor> ts{sample_tensor(2, n, DisorderSpec::gaussian(), 1)};
    const auto lq = solve_gs(ts, MixtureSpec({0.0, 1.0}), DomainSpec::lq(3.0), GsSolverConfig{}, 1);
    CHECK(lq.argmax.feasible(1e-9));
    const auto part = SpeciesPartition::contiguous({15, 25}, {15.0 / 40, 25.0 / 40}, {{0.0, 0.0}, {0.0, 1.0, 1.0, 0.0}});
    const auto prod = solve_gs(ts, MixtureSpec({0.0, 1.0}), DomainSpec::product(part), GsSolverConfig{}, 1);
    CHECK(prod.argmax.feasible(1e-9));

    const std::vector<SymmetricTensor> with_field{sample_tensor(1, n, DisorderSpec::gaussian(), 2), ts[0]};
    CHECK_THROWS_AS(solve_gs(with_field, MixtureSpec({1.0, 1.0}), DomainSpec::lq(3.0), GsSolverConfig{}, 1),
                    ContractViolation);
  }

  TEST_CASE("results are deterministic and independent of the restart split") {
    const std::vector<SymmetricTensor> ts{sample_tensor(3, 25, DisorderSpec::gaussian(), 9)};
    GsSolverConfig cfg;
    cfg.restarts = 4;
    const auto a = solve_gs(ts, MixtureSpec::pure(3), DomainSpec::l2(), cfg, 11);
    const auto b = solve_gs(ts, MixtureSpec::pure(3), DomainSpec::l2(), cfg, 11);
    CHECK(a.value == b.value);
    CHECK(a.restart_values == b.restart_values);
    CHECK(a.value == *std::max_element(a.restart_values.begin(), a.restart_values.end()));
  }

  TEST_CASE("invalid solver configuration") {
    GsSolverConfig cfg;
    cfg.restarts = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.backtrack = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("bridge check at low temperature") {
    const MixtureSpec mix = MixtureSpec::pure(2);
    FreeEnergyEstimate fe;
    fe.value = 1.30;
    fe.std_error = 0.001;
    GsResult gs;
    gs.value = 1.40 * 100;
    gs.argmax.coords.assign(100, 1.0);
    const auto check = gs_bridge_check(mix, 10.0, fe, gs, 1.41 * 100);
    CHECK(check.lower_ok);
    CHECK(check.gap == doctest::Approx(0.10));
    CHECK(check.bound == doctest::Approx(std::log(2 + 2 * 10.0 * 1.41)));
    CHECK(check.upper_ok);
    CHECK_THROWS_AS(gs_bridge_check(mix, 0.5, fe, gs, 141.0), ContractViolation);
  }
}
