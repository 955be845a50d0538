#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pspin/rng.hpp"
#include "pspin/symmetric_tensor.hpp"

namespace pspin {

enum class Family { gaussian, rademacher, uniform, student_t, two_point };

/// A range of absolute values {x : lo (<|<=) |x| (<|<=) hi}.
struct AbsRange {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = true;

  bool contains(double a) const noexcept {
    return (lo_closed ? a >= lo : a > lo) && (hi_closed ? a <= hi : a < hi);
  }
  AbsRange scaled(double f) const noexcept { return {lo * f, hi * f, lo_closed, hi_closed}; }
};

/// Base law of the disorder entries, standardized to mean 0 and variance 1.
///
/// `two_point(eps, scale)` puts mass (1-eps)/2 on each of +-1 and eps/2 on
/// each of +-scale, then divides by the standard deviation.
class DisorderSpec {
 public:
  static DisorderSpec gaussian() { return DisorderSpec(Family::gaussian); }
  static DisorderSpec rademacher() { return DisorderSpec(Family::rademacher); }
  static DisorderSpec uniform() { return DisorderSpec(Family::uniform); }
  static DisorderSpec student_t(double nu);
  static DisorderSpec two_point(double eps_mass, double scale);

  /// "gaussian", "rademacher", "uniform", "student_t:3.0", "two_point:0.01:10".
  static DisorderSpec parse(std::string_view text);
  std::string to_string() const;

  Family family() const noexcept { return family_; }
  double nu() const noexcept { return nu_; }
  double eps_mass() const noexcept { return eps_; }
  double contamination_scale() const noexcept { return scale_; }

  /// One standardized draw.
  double draw(CounterRng& rng) const;

  /// E|X|^m, or nullopt when infinite.
  std::optional<double> abs_moment(double m) const;

  /// P[|X| >= s].
  double tail_probability(double s) const;

  /// E[X^k 1{|X| in range}] for k = 1, 2.
  double partial_moment(int k, const AbsRange& range) const;

  /// Standard deviation of the unstandardized law (1 for the bounded families).
  double raw_scale() const noexcept;

  bool operator==(const DisorderSpec&) const = default;

 private:
  explicit DisorderSpec(Family f) : family_(f) {}

  Family family_;
  double nu_ = 0.0;
  double eps_ = 0.0;
  double scale_ = 0.0;
};

/// Independent canonical entries J = sqrt(|{i}|!/p!) X with X drawn from the
/// standardized law. Entry r uses the stream (seed, p, r), so the result is
/// independent of thread count and tensors over [n] are prefixes of those over [N].
SymmetricTensor sample_tensor(int p, int n, const DisorderSpec& spec, std::uint64_t seed);

struct MomentReport {
  /// (order, E|X|^order) for orders 1..2p and 2p+eps; nullopt = infinite.
  std::vector<std::pair<double, std::optional<double>>> abs_moments;
  /// (s, s^{2p} P[|X| >= s]) for s = 2^k.
  std::vector<std::pair<double, double>> tail_decay;
  bool moment_2p_finite = false;
  bool ce_bounds_hold = false;
  /// E|X|^{2p+eps} when finite, +inf otherwise.
  double ce_constant = 0.0;
  bool lee_yin_holds = false;
  /// Empty when every condition holds, else names the first violated moment.
  std::string violation;
};

MomentReport moment_report(const DisorderSpec& spec, int p, double eps);

}  // namespace pspin
