#include "pspin/mixture.hpp"

#include <algorithm>
#include <cmath>

#include "pspin/errors.hpp"

namespace pspin {

MixtureSpec::MixtureSpec(std::vector<double> gammas) : gammas_(std::move(gammas)) {
  if (gammas_.empty()) throw ConfigError("mixture needs at least one coefficient");
  bool any_positive = false;
  for (double g : gammas_) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("mixture coefficients must be finite and >= 0");
    any_positive = any_positive || g > 0.0;
  }
  if (!any_positive) throw ConfigError("mixture needs at least one positive coefficient");
}

MixtureSpec MixtureSpec::pure(int p, double gamma) {
  if (p < 1) throw ConfigError("pure mixture order must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(p), 0.0);
  g.back() = gamma;
  return MixtureSpec(std::move(g));
}

double MixtureSpec::gamma(int p) const noexcept {
  if (p < 1 || p > max_order()) return 0.0;
  return gammas_[static_cast<std::size_t>(p - 1)];
}

std::vector<int> MixtureSpec::active_orders() const {
  std::vector<int> out;
  for (int p = 1; p <= max_order(); ++p) {
    if (gamma(p) > 0.0) out.push_back(p);
  }
  return out;
}

double MixtureSpec::xi(double t) const noexcept {
  double s = 0.0;
  for (int p = max_order(); p >= 1; --p) s = (s + gamma(p) * gamma(p)) * t;
  return s;
}

double MixtureSpec::xi_prime(double t) const noexcept {
  double s = 0.0;
  for (int p = 1; p <= max_order(); ++p) s += p * gamma(p) * gamma(p) * std::pow(t, p - 1);
  return s;
}

double MixtureSpec::xi_second(double t) const noexcept {
  double s = 0.0;
  for (int p = 2; p <= max_order(); ++p) s += p * (p - 1) * gamma(p) * gamma(p) * std::pow(t, p - 2);
  return s;
}

MixtureSpec MixtureSpec::scaled(double c) const {
  std::vector<double> g = gammas_;
  for (double& v : g) v *= c;
  return MixtureSpec(std::move(g));
}

double xi_eval(const MixtureSpec& mix, double t, int order) {
  if (!(std::abs(t) <= 1.0)) throw DomainError("xi_eval: |t| must be <= 1");
  switch (order) {
    case 0: return mix.xi(t);
    case 1: return mix.xi_prime(t);
    case 2: return mix.xi_second(t);
    default: throw DomainError("xi_eval: derivative order must be 0, 1 or 2");
  }
}

}  // namespace pspin
