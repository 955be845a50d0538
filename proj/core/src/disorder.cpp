#include "pspin/disorder.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "pspin/errors.hpp"
#include "pspin/parallel.hpp"

namespace pspin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_number(std::string_view s, std::string_view whole) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError("bad number '" + std::string(s) + "' in distribution '" + std::string(whole) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  std::string s = os.str();
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

double normal_upper(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Integral of g over [lo, hi] with hi possibly infinite.
template <class G>
double integrate(G&& g, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, lo, hi, 20, 1e-13);
}

struct Atom {
  double abs_value;
  double mass;
};

}  // namespace

DisorderSpec DisorderSpec::student_t(double nu) {
  if (!(nu > 2.0) || !std::isfinite(nu)) throw ConfigError("student_t needs finite nu > 2 for unit variance");
  DisorderSpec d(Family::student_t);
  d.nu_ = nu;
  return d;
}

DisorderSpec DisorderSpec::two_point(double eps_mass, double scale) {
  if (!(eps_mass > 0.0 && eps_mass < 1.0)) throw ConfigError("two_point mass must lie in (0, 1)");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("two_point scale must be positive");
  DisorderSpec d(Family::two_point);
  d.eps_ = eps_mass;
  d.scale_ = scale;
  return d;
}

DisorderSpec DisorderSpec::parse(std::string_view text) {
  auto parts = split(text, ':');
  const auto name = parts[0];
  auto expect = [&](std::size_t n) {
    if (parts.size() != n) throw ConfigError("distribution '" + std::string(text) + "' has the wrong number of fields");
  };
  if (name == "gaussian") {
    expect(1);
    return gaussian();
  }
  if (name == "rademacher") {
    expect(1);
    return rademacher();
  }
  if (name == "uniform") {
    expect(1);
    return uniform();
  }
  if (name == "student_t") {
    expect(2);
    return student_t(parse_number(parts[1], text));
  }
  if (name == "two_point") {
    expect(3);
    return two_point(parse_number(parts[1], text), parse_number(parts[2], text));
  }
  throw ConfigError("unknown distribution '" + std::string(text) + "'");
}

std::string DisorderSpec::to_string() const {
  switch (family_) {
    case Family::gaussian: return "gaussian";
    case Family::rademacher: return "rademacher";
    case Family::uniform: return "uniform";
    case Family::student_t: return "student_t:" + format_number(nu_);
    case Family::two_point: return "two_point:" + format_number(eps_) + ":" + format_number(scale_);
  }
  return {};
}

double DisorderSpec::raw_scale() const noexcept {
  switch (family_) {
    case Family::student_t: return std::sqrt(nu_ / (nu_ - 2.0));
    case Family::two_point: return std::sqrt(1.0 - eps_ + eps_ * scale_ * scale_);
    default: return 1.0;
  }
}

double DisorderSpec::draw(CounterRng& rng) const {
  switch (family_) {
    case Family::gaussian: {
      std::normal_distribution<double> normal;
      return normal(rng);
    }
    case Family::rademacher:
      return (rng() >> 63) ? 1.0 : -1.0;
    case Family::uniform:
      return (2.0 * rng.uniform() - 1.0) * std::sqrt(3.0);
    case Family::student_t: {
      std::student_t_distribution<double> t(nu_);
      return t(rng) / raw_scale();
    }
    case Family::two_point: {
      const double mag = rng.uniform() < eps_ ? scale_ : 1.0;
      const double sign = (rng() >> 63) ? 1.0 : -1.0;
      return sign * mag / raw_scale();
    }
  }
  return 0.0;
}

std::optional<double> DisorderSpec::abs_moment(double m) const {
  if (m < 0.0) throw DomainError("moment order must be non-negative");
  switch (family_) {
    case Family::gaussian:
      return std::pow(2.0, m / 2.0) * std::tgamma((m + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
    case Family::rademacher:
      return 1.0;
    case Family::uniform:
      return std::pow(std::sqrt(3.0), m) / (m + 1.0);
    case Family::two_point: {
      const double s = raw_scale();
      return (1.0 - eps_) * std::pow(1.0 / s, m) + eps_ * std::pow(scale_ / s, m);
    }
    case Family::student_t: {
      if (m >= nu_) return std::nullopt;
      // E|T|^m = nu^{m/2} Gamma((m+1)/2) Gamma((nu-m)/2) / (sqrt(pi) Gamma(nu/2)).
      const double log_raw = 0.5 * m * std::log(nu_) + std::lgamma(0.5 * (m + 1.0)) + std::lgamma(0.5 * (nu_ - m)) -
                             std::lgamma(0.5 * nu_) - 0.5 * std::log(std::numbers::pi);
      return std::exp(log_raw - m * std::log(raw_scale()));
    }
  }
  return std::nullopt;
}

double DisorderSpec::tail_probability(double s) const {
  if (s <= 0.0) return 1.0;
  switch (family_) {
    case Family::gaussian:
      return 2.0 * normal_upper(s);
    case Family::rademacher:
      return s <= 1.0 ? 1.0 : 0.0;
    case Family::uniform:
      return std::max(0.0, 1.0 - s / std::sqrt(3.0));
    case Family::two_point: {
      const double r = raw_scale();
      double p = 0.0;
      if (1.0 / r >= s) p += 1.0 - eps_;
      if (scale_ / r >= s) p += eps_;
      return p;
    }
    case Family::student_t: {
      const boost::math::students_t_distribution<double> law(nu_);
      return 2.0 * boost::math::cdf(boost::math::complement(law, s * raw_scale()));
    }
  }
  return 0.0;
}

double DisorderSpec::partial_moment(int k, const AbsRange& range) const {
  if (k != 1 && k != 2) throw DomainError("partial_moment supports k = 1, 2");
  // Every supported law is symmetric, so odd truncated moments vanish.
  if (k == 1) return 0.0;
  const double lo = std::max(0.0, range.lo);
  const double hi = range.hi;
  if (!(hi >= lo)) return 0.0;

  auto atoms_sum = [&](std::initializer_list<Atom> atoms) {
    double acc = 0.0;
    for (const auto& a : atoms) {
      if (range.contains(a.abs_value)) acc += a.mass * a.abs_value * a.abs_value;
    }
    return acc;
  };

  switch (family_) {
    case Family::gaussian: {
      const double a_term = lo * normal_pdf(lo);
      const double b_term = std::isinf(hi) ? 0.0 : hi * normal_pdf(hi);
      const double mass = normal_upper(lo) - (std::isinf(hi) ? 0.0 : normal_upper(hi));
      return 2.0 * (a_term - b_term + mass);
    }
    case Family::rademacher:
      return atoms_sum({{1.0, 1.0}});
    case Family::uniform: {
      const double r3 = std::sqrt(3.0);
      const double a = std::min(lo, r3);
      const double b = std::min(hi, r3);
      return (b * b * b - a * a * a) / (3.0 * r3);
    }
    case Family::two_point: {
      const double r = raw_scale();
      return atoms_sum({{1.0 / r, 1.0 - eps_}, {scale_ / r, eps_}});
    }
    case Family::student_t: {
      const boost::math::students_t_distribution<double> law(nu_);
      const double s = raw_scale();
      auto g = [&](double u) { return u * u * boost::math::pdf(law, u); };
      return 2.0 * integrate(g, lo * s, std::isinf(hi) ? kInf : hi * s) / (s * s);
    }
  }
  return 0.0;
}

SymmetricTensor sample_tensor(int p, int n, const DisorderSpec& spec, std::uint64_t seed) {
  SymmetricTensor t(p, n);
  const auto total = t.size();
  constexpr std::uint64_t kChunk = 1u << 15;
  const std::size_t chunks = static_cast<std::size_t>((total + kChunk - 1) / kChunk);
  auto entries = t.entries();
  const auto& indexer = t.indexer();
  const std::uint64_t order_tag = static_cast<std::uint64_t>(p);

  // Standard deviation per multiplicity value; multiplicities divide p!.
  const std::uint64_t pf = factorial(p);
  std::vector<double> sd(pf + 1, 0.0);
  for (std::uint64_t m = 1; m <= pf; ++m) sd[m] = std::sqrt(1.0 / static_cast<double>(m));

  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(total, begin + kChunk);
    std::vector<int> idx(static_cast<std::size_t>(p));
    indexer.unrank(begin, idx);
    for (std::uint64_t r = begin; r < end; ++r) {
      CounterRng rng(derive_stream(seed, {tag(Purpose::disorder), order_tag, r}));
      entries[r] = sd[multiplicity(idx)] * spec.draw(rng);
      CanonicalIndexer::advance(idx, n);
    }
  });
  return t;
}

MomentReport moment_report(const DisorderSpec& spec, int p, double eps) {
  if (p < 1 || p > kMaxOrder) throw ShapeError("order out of range");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  MomentReport rep;
  for (int m = 1; m <= 2 * p; ++m) rep.abs_moments.emplace_back(m, spec.abs_moment(m));
  const double ce_order = 2.0 * p + eps;
  const auto ce = spec.abs_moment(ce_order);
  rep.abs_moments.emplace_back(ce_order, ce);

  for (int k = 0; k <= 20; ++k) {
    const double s = std::ldexp(1.0, k);
    rep.tail_decay.emplace_back(s, std::pow(s, 2.0 * p) * spec.tail_probability(s));
  }

  rep.moment_2p_finite = rep.abs_moments[static_cast<std::size_t>(2 * p - 1)].second.has_value();
  rep.ce_bounds_hold = ce.has_value();
  rep.ce_constant = ce.value_or(kInf);
  // Polynomial tails s^{-nu} are the only heavy tails among the families.
  rep.lee_yin_holds = spec.family() != Family::student_t || spec.nu() > 2.0 * p;

  if (!rep.moment_2p_finite) {
    rep.violation = "E|X|^" + std::to_string(2 * p) + " is infinite";
  } else if (!rep.lee_yin_holds) {
    rep.violation = "s^" + std::to_string(2 * p) + " P[|X| >= s] does not vanish";
  } else if (!rep.ce_bounds_hold) {
    rep.violation = "E|X|^" + format_number(ce_order) + " is infinite";
  }
  return rep;
}

}  // namespace pspin
