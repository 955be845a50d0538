#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pspin/mixture.hpp"

namespace pspin {

/// Right-continuous step function x on [0, 1]: x = m_i on [q_{i-1}, q_i) with
/// q_0 = 0, and x = 1 on [q_hat, 1] where q_hat = q_k (0 when k = 0).
class RSBProfile {
 public:
  RSBProfile() = default;
  RSBProfile(std::vector<double> breakpoints, std::vector<double> values);

  /// x == 1 on [0, 1].
  static RSBProfile constant_one() { return {}; }

  int atoms() const noexcept { return static_cast<int>(q_.size()); }
  double q_hat() const noexcept { return q_.empty() ? 0.0 : q_.back(); }
  const std::vector<double>& breakpoints() const noexcept { return q_; }
  const std::vector<double>& values() const noexcept { return m_; }

  double x(double q) const;
  /// x_hat(q) = int_q^1 x(s) ds.
  double x_hat(double q) const;

 private:
  std::vector<double> q_;
  std::vector<double> m_;
};

struct ParisiValue {
  /// Per-site value P(x; beta^2 xi) / beta.
  double value = 0.0;
  /// The four summands inside the braces, in beta^2 xi units:
  /// xi_b'(0) x_hat(0), int xi_b'' x_hat, int_0^{q_hat} dq / x_hat, log(1 - q_hat).
  std::array<double, 4> terms{};
};

/// Closed-form evaluation: x_hat is piecewise linear, so each piece contributes
/// [xi' x_hat] + m [xi] to the second term and a logarithm to the third.
ParisiValue cs_functional(const RSBProfile& profile, const MixtureSpec& mix, double beta);

/// Same functional by adaptive Gauss-Kronrod quadrature on each piece.
ParisiValue cs_functional_quadrature(const RSBProfile& profile, const MixtureSpec& mix, double beta);

struct MinimizeConfig {
  int starts = 6;
  int max_evaluations = 400000;
  double step_tolerance = 1e-11;
  std::uint64_t seed = 0;
};

struct MinimizeResult {
  ParisiValue value;
  RSBProfile profile;
  bool converged = true;
  int evaluations = 0;
};

/// Compass search over k-atom profiles, parameterized on [0, 1]^{2k} by
/// stick-breaking increments of the breakpoints and of the values. Atom
/// counts 1..k are optimized in turn, each seeded by the previous optimum, so
/// the result is non-increasing in k. Ties go to the smaller q_hat.
MinimizeResult minimize_cs(const MixtureSpec& mix, double beta, int atoms, const MinimizeConfig& config = {});

struct GsPrediction {
  double prediction = 0.0;
  std::vector<double> betas;
  std::vector<double> values;
  /// Values failed to be non-decreasing in beta, or a minimization did not converge.
  bool flagged = false;
};

/// Linear extrapolation in 1/beta through the last three minimized values.
GsPrediction gs_prediction(const MixtureSpec& mix, const std::vector<double>& betas, int atoms,
                           const MinimizeConfig& config = {});

}  // namespace pspin
