#pragma once

#include <span>
#include <vector>

namespace pspin {

/// Mixture coefficients gamma_1..gamma_P defining xi(t) = sum_p gamma_p^2 t^p.
class MixtureSpec {
 public:
  explicit MixtureSpec(std::vector<double> gammas);

  /// Pure p-spin model: gamma_p = gamma, all others zero.
  static MixtureSpec pure(int p, double gamma = 1.0);

  int max_order() const noexcept { return static_cast<int>(gammas_.size()); }

  /// gamma_p for 1 <= p <= P; zero beyond P.
  double gamma(int p) const noexcept;
  std::span<const double> gammas() const noexcept { return gammas_; }

  /// Orders with gamma_p > 0, ascending.
  std::vector<int> active_orders() const;

  // Unchecked evaluations, valid for any real t.
  double xi(double t) const noexcept;
  double xi_prime(double t) const noexcept;
  double xi_second(double t) const noexcept;

  /// The mixture with every gamma_p multiplied by c (so xi -> c^2 xi).
  MixtureSpec scaled(double c) const;

 private:
  std::vector<double> gammas_;
};

/// xi(t), xi'(t) or xi''(t) for order 0, 1, 2. Throws DomainError for |t| > 1.
double xi_eval(const MixtureSpec& mix, double t, int order);

}  // namespace pspin
