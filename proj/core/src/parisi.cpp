#include "pspin/parisi.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "pspin/errors.hpp"
#include "pspin/parallel.hpp"
#include "pspin/rng.hpp"

namespace pspin {
namespace {

constexpr double kMaxQ = 1.0 - 1e-12;

struct Piece {
  double a, b, m;
};

// Pieces of [0, 1] including the final x = 1 piece; zero-width pieces are kept.
std::vector<Piece> pieces_of(const std::vector<double>& q, const std::vector<double>& m) {
  std::vector<Piece> out;
  double left = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    out.push_back({left, q[i], m[i]});
    left = q[i];
  }
  out.push_back({left, 1.0, 1.0});
  return out;
}

ParisiValue evaluate(const std::vector<Piece>& pieces, const MixtureSpec& mix, double beta) {
  if (!(beta > 0.0)) throw DomainError("cs_functional needs beta > 0");
  const double b2 = beta * beta;
  const double q_hat = pieces.back().a;
  if (!(q_hat < 1.0)) throw DomainError("degenerate profile: q_hat must be < 1");

  // x_hat at the right end of each piece, filled from the right.
  std::vector<double> right(pieces.size());
  double acc = 0.0;
  for (std::size_t i = pieces.size(); i-- > 0;) {
    right[i] = acc;
    acc += pieces[i].m * (pieces[i].b - pieces[i].a);
  }
  const double x_hat0 = acc;

  ParisiValue v;
  v.terms[0] = b2 * mix.xi_prime(0.0) * x_hat0;
  double second = 0.0, third = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    const double w = p.b - p.a;
    if (w <= 0.0) continue;
    const double xb = right[i];
    const double xa = xb + p.m * w;
    second += mix.xi_prime(p.b) * xb - mix.xi_prime(p.a) * xa + p.m * (mix.xi(p.b) - mix.xi(p.a));
    if (i + 1 < pieces.size()) {
      if (!(xb > 0.0)) throw DomainError("degenerate profile: x_hat vanishes before q_hat");
      third += p.m > 0.0 ? std::log1p(p.m * w / xb) / p.m : w / xb;
    }
  }
  v.terms[1] = b2 * second;
  v.terms[2] = third;
  v.terms[3] = std::log1p(-q_hat);
  v.value = 0.5 * (v.terms[0] + v.terms[1] + v.terms[2] + v.terms[3]) / beta;
  if (!std::isfinite(v.value)) throw NumericError("non-finite Crisanti-Sommers value");
  return v;
}

struct Params {
  std::vector<double> q;
  std::vector<double> m;
};

// Stick-breaking map from [0, 1]^{2k} to breakpoints and values.
Params decode(const std::vector<double>& z, int k) {
  Params p;
  double q = 0.0, m = 0.0;
  for (int i = 0; i < k; ++i) {
    q += z[static_cast<std::size_t>(i)] * (kMaxQ - q);
    m += z[static_cast<std::size_t>(k + i)] * (1.0 - m);
    p.q.push_back(q);
    p.m.push_back(m);
  }
  return p;
}

RSBProfile compress(const Params& p) {
  std::vector<double> q, m;
  double left = 0.0;
  for (std::size_t i = 0; i < p.q.size(); ++i) {
    if (p.q[i] <= left) continue;
    if (!m.empty() && m.back() == p.m[i]) {
      q.back() = p.q[i];
    } else {
      q.push_back(p.q[i]);
      m.push_back(p.m[i]);
    }
    left = p.q[i];
  }
  // A trailing piece with x = 1 merges into [q_hat, 1].
  while (!m.empty() && m.back() >= 1.0) {
    m.pop_back();
    q.pop_back();
  }
  return RSBProfile(std::move(q), std::move(m));
}

struct SearchResult {
  std::vector<double> z;
  double value;
  double q_hat;
  bool converged;
  int evaluations;
};

SearchResult compass(std::vector<double> z, int k, const MixtureSpec& mix, double beta, const MinimizeConfig& cfg) {
  int evals = 0;
  auto f = [&](const std::vector<double>& zz) {
    ++evals;
    const auto p = decode(zz, k);
    return evaluate(pieces_of(p.q, p.m), mix, beta).value;
  };
  double best = f(z);
  double h = 0.25;
  while (h > cfg.step_tolerance && evals < cfg.max_evaluations) {
    bool improved = false;
    for (std::size_t c = 0; c < z.size(); ++c) {
      for (double dir : {1.0, -1.0}) {
        const double old = z[c];
        const double cand = std::clamp(old + dir * h, 0.0, 1.0);
        if (cand == old) continue;
        z[c] = cand;
        const double v = f(z);
        if (v < best) {
          best = v;
          improved = true;
          break;
        }
        z[c] = old;
      }
    }
    if (!improved) h *= 0.5;
  }
  const auto p = decode(z, k);
  return {z, best, p.q.empty() ? 0.0 : p.q.back(), h <= cfg.step_tolerance, evals};
}

// Re-expresses j-atom parameters with k >= j atoms by appending zero-width pieces.
std::vector<double> embed(const std::vector<double>& z, int k) {
  const int j = static_cast<int>(z.size()) / 2;
  std::vector<double> e(z.begin(), z.begin() + j);
  e.insert(e.end(), static_cast<std::size_t>(k - j), 0.0);
  e.insert(e.end(), z.begin() + j, z.end());
  e.insert(e.end(), static_cast<std::size_t>(k - j), 0.5);
  return e;
}

bool better(const SearchResult& a, const SearchResult& b) {
  const double tie = 1e-12 * std::max(1.0, std::abs(b.value));
  if (a.value < b.value - tie) return true;
  if (a.value > b.value + tie) return false;
  return a.q_hat < b.q_hat;
}

}  // namespace

RSBProfile::RSBProfile(std::vector<double> breakpoints, std::vector<double> values)
    : q_(std::move(breakpoints)), m_(std::move(values)) {
  if (q_.size() != m_.size()) throw DomainError("profile needs one value per breakpoint");
  double left = 0.0, prev_m = 0.0;
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (!(q_[i] > left)) throw DomainError("profile breakpoints must be strictly increasing from 0");
    if (!(m_[i] >= prev_m && m_[i] <= 1.0)) throw DomainError("profile values must be non-decreasing in [0, 1]");
    left = q_[i];
    prev_m = m_[i];
  }
  if (!(q_hat() < 1.0)) throw DomainError("profile needs q_hat < 1");
}

double RSBProfile::x(double q) const {
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (q < q_[i]) return m_[i];
  }
  return 1.0;
}

double RSBProfile::x_hat(double q) const {
  double acc = 0.0;
  for (const auto& p : pieces_of(q_, m_)) {
    const double lo = std::max(p.a, q);
    if (p.b > lo) acc += p.m * (p.b - lo);
  }
  return acc;
}

ParisiValue cs_functional(const RSBProfile& profile, const MixtureSpec& mix, double beta) {
  return evaluate(pieces_of(profile.breakpoints(), profile.values()), mix, beta);
}

ParisiValue cs_functional_quadrature(const RSBProfile& profile, const MixtureSpec& mix, double beta) {
  if (!(beta > 0.0)) throw DomainError("cs_functional needs beta > 0");
  using boost::math::quadrature::gauss_kronrod;
  const double b2 = beta * beta;
  const double q_hat = profile.q_hat();
  ParisiValue v;
  v.terms[0] = b2 * mix.xi_prime(0.0) * profile.x_hat(0.0);
  double second = 0.0, third = 0.0;
  for (const auto& p : pieces_of(profile.breakpoints(), profile.values())) {
    if (!(p.b > p.a)) continue;
    second += gauss_kronrod<double, 31>::integrate(
        [&](double q) { return mix.xi_second(q) * profile.x_hat(q); }, p.a, p.b, 15, 1e-14);
    if (p.a < q_hat) {
      third += gauss_kronrod<double, 31>::integrate([&](double q) { return 1.0 / profile.x_hat(q); }, p.a, p.b, 15,
                                                    1e-14);
    }
  }
  v.terms[1] = b2 * second;
  v.terms[2] = third;
  v.terms[3] = std::log1p(-q_hat);
  v.value = 0.5 * (v.terms[0] + v.terms[1] + v.terms[2] + v.terms[3]) / beta;
  return v;
}

MinimizeResult minimize_cs(const MixtureSpec& mix, double beta, int atoms, const MinimizeConfig& config) {
  if (atoms < 1) throw ConfigError("minimize_cs needs at least one atom");
  if (!(beta > 0.0)) throw DomainError("minimize_cs needs beta > 0");
  if (config.starts < 1) throw ConfigError("minimize_cs needs at least one start");

  MinimizeResult out;
  SearchResult best{};
  for (int k = 1; k <= atoms; ++k) {
    std::vector<std::vector<double>> starts;
    if (k > 1) starts.push_back(embed(best.z, k));
    std::vector<double> rs(static_cast<std::size_t>(2 * k), 0.0);
    rs[0] = 0.5;
    starts.push_back(rs);
    starts.push_back(std::vector<double>(static_cast<std::size_t>(2 * k), 0.5));
    CounterRng rng(derive_stream(config.seed, {tag(Purpose::parisi), static_cast<std::uint64_t>(k)}));
    while (static_cast<int>(starts.size()) < config.starts + (k > 1 ? 1 : 0)) {
      std::vector<double> z(static_cast<std::size_t>(2 * k));
      for (auto& v : z) v = rng.uniform();
      starts.push_back(std::move(z));
    }

    std::vector<SearchResult> results(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) { results[s] = compass(starts[s], k, mix, beta, config); });
    SearchResult round = results.front();
    for (const auto& r : results) {
      out.evaluations += r.evaluations;
      if (better(r, round)) round = r;
    }
    out.converged = out.converged && round.converged;
    if (k == 1 || better(round, best)) best = round;
  }
  const int k = static_cast<int>(best.z.size()) / 2;
  out.profile = compress(decode(best.z, k));
  out.value = cs_functional(out.profile, mix, beta);
  return out;
}

GsPrediction gs_prediction(const MixtureSpec& mix, const std::vector<double>& betas, int atoms,
                           const MinimizeConfig& config) {
  if (betas.size() < 3) throw ConfigError("gs_prediction needs at least three inverse temperatures");
  for (std::size_t i = 1; i < betas.size(); ++i) {
    if (!(betas[i] > betas[i - 1])) throw ConfigError("gs_prediction needs an increasing beta sequence");
  }
  GsPrediction g;
  g.betas = betas;
  for (double b : betas) {
    const auto r = minimize_cs(mix, b, atoms, config);
    if (!r.converged) g.flagged = true;
    g.values.push_back(r.value.value);
  }
  for (std::size_t i = 1; i < g.values.size(); ++i) {
    if (g.values[i] < g.values[i - 1] - 1e-9) g.flagged = true;
  }
  // Least squares y = c0 + c1 / beta over the last three points.
  const std::size_t n = betas.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = n - 3; i < n; ++i) {
    const double x = 1.0 / betas[i];
    sx += x;
    sy += g.values[i];
    sxx += x * x;
    sxy += x * g.values[i];
  }
  const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  g.prediction = (sy - slope * sx) / 3.0;
  return g;
}

}  // namespace pspin
