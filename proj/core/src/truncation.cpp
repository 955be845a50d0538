#include "pspin/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "pspin/errors.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/rng.hpp"

namespace pspin {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSlack = 1e-12;

std::set<std::uint64_t> multiplicity_classes(int p) {
  std::set<std::uint64_t> out;
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  do {
    out.insert(multiplicity(idx));
  } while (CanonicalIndexer::advance(idx, p));
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("truncation parameters: " + what);
}

}  // namespace

TruncationParams TruncationParams::make(int n, double M, double M1, double eta, double delta) {
  require(n >= 2, "N must be at least 2");
  const double nd = n;
  const double quarter = std::pow(nd, 0.25);
  const double lower = 1.0 / quarter;
  require(eta >= lower * (1 - kSlack), "eta below N^{-1/4}");
  require(eta <= delta * (1 + kSlack), "eta exceeds delta");
  require(delta <= 1.0 + kSlack, "delta exceeds 1");
  require(M >= 1.0 - kSlack && M <= quarter * (1 + kSlack), "M outside [1, N^{1/4}]");
  require(M1 >= 1.0 - kSlack && M1 <= quarter * (1 + kSlack), "M1 outside [1, N^{1/4}]");

  TruncationParams tp;
  tp.n = n;
  tp.M = M;
  tp.M1 = M1;
  tp.delta = delta;
  const double root = std::sqrt(nd);
  int levels = std::max(0, static_cast<int>(std::lround(std::log2(eta * root / M))));
  auto eta_at = [&](int l) { return M * std::ldexp(1.0, l) / root; };
  while (levels > 0 && eta_at(levels) > delta * (1 + kSlack)) --levels;
  while (eta_at(levels) < lower * (1 - kSlack) && eta_at(levels + 1) <= delta * (1 + kSlack)) ++levels;
  const double eff = eta_at(levels);
  require(eff <= delta * (1 + kSlack) && eff >= lower * (1 - kSlack),
          "no dyadic level places eta inside [N^{-1/4}, delta]");
  tp.levels = levels;
  tp.eta = std::min(eff, delta);
  return tp;
}

TruncationParams TruncationParams::defaults(int n, int max_order, double eps) {
  if (max_order < 1) throw ShapeError("max order must be positive");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  const double nd = n;
  const double e = 1.0 / (4.0 * max_order);
  return make(n, std::pow(nd, e), std::pow(nd, e), std::pow(nd, -e), std::pow(nd, -eps * e));
}

TruncationParams TruncationParams::bai_yin(int n, int max_order) {
  if (max_order < 1) throw ShapeError("max order must be positive");
  const double nd = n;
  const double e = 1.0 / (4.0 * max_order);
  const double M = std::pow(nd, e);
  const double eta = std::pow(nd, -e);
  const double log_n = std::log(nd);
  const double delta = std::clamp(1.0 / log_n, eta, 1.0);
  const double M1 = std::clamp(log_n, 1.0, std::pow(nd, 0.25));
  return make(n, M, M1, eta, delta);
}

double TruncationParams::sqrt_n() const { return std::sqrt(static_cast<double>(n)); }

AbsRange TruncationParams::small_range(int p) const { return {0.0, small_threshold(p), true, true}; }

AbsRange TruncationParams::scale_range(int j) const {
  if (j < 0 || j > levels) throw DomainError("scale level out of range");
  if (j == 0) return {M / 2.0, M, false, false};
  return {M * std::ldexp(1.0, j - 1), M * std::ldexp(1.0, j), true, false};
}

// eta * sqrt(N) equals M * 2^levels by construction; using the product keeps
// the scale and large ranges adjacent in floating point.
AbsRange TruncationParams::large_range() const {
  const double lo = M * std::ldexp(1.0, levels);
  return {lo, std::max(delta * sqrt_n(), lo), true, true};
}

AbsRange TruncationParams::tail_range(int p) const {
  if (p == 1) return {small_threshold(1), kInf, false, true};
  return {large_range().hi, kInf, false, true};
}

SymmetricTensor TruncationDecomposition::reconstruct() const {
  SymmetricTensor out = small;
  for (const auto& s : scale) out += s;
  out += large;
  out += tail;
  return out;
}

TruncationDecomposition truncate(const SymmetricTensor& J, const TruncationParams& params, const DisorderSpec& spec) {
  if (J.dim() != params.n) throw ShapeError("tensor dimension differs from truncation N");
  const int p = J.order();
  const int n = J.dim();
  const int levels = params.levels;

  TruncationDecomposition d{SymmetricTensor(p, n), {}, SymmetricTensor(p, n), SymmetricTensor(p, n), {}, params};
  d.scale.assign(static_cast<std::size_t>(levels + 1), SymmetricTensor(p, n));

  // Piece 0 = small, 1..levels+1 = scale(j), levels+2 = large, levels+3 = tail.
  const int pieces = levels + 4;
  std::vector<AbsRange> ranges;
  ranges.push_back(params.small_range(p));
  for (int j = 0; j <= levels; ++j) ranges.push_back(params.scale_range(j));
  ranges.push_back(params.large_range());
  ranges.push_back(params.tail_range(p));
  if (p == 1) {
    for (int k = 1; k < pieces - 1; ++k) ranges[static_cast<std::size_t>(k)] = {1.0, 0.0, false, false};
  }

  std::map<std::uint64_t, std::vector<double>> constants;
  for (auto m : multiplicity_classes(p)) {
    const double sd = std::sqrt(1.0 / static_cast<double>(m));
    std::vector<double> c(static_cast<std::size_t>(pieces));
    for (int k = 0; k < pieces; ++k) {
      const auto& r = ranges[static_cast<std::size_t>(k)];
      c[static_cast<std::size_t>(k)] = r.hi < r.lo ? 0.0 : sd * spec.partial_moment(1, r.scaled(1.0 / sd));
    }
    RecenterConstants rc;
    rc.multiplicity = m;
    rc.small = c[0];
    rc.scale.assign(c.begin() + 1, c.begin() + 1 + levels + 1);
    rc.large = c[static_cast<std::size_t>(levels + 2)];
    rc.tail = c[static_cast<std::size_t>(levels + 3)];
    d.recenter.push_back(rc);
    constants.emplace(m, std::move(c));
  }

  auto piece = [&](int k) -> SymmetricTensor& {
    if (k == 0) return d.small;
    if (k <= levels + 1) return d.scale[static_cast<std::size_t>(k - 1)];
    if (k == levels + 2) return d.large;
    return d.tail;
  };
  std::vector<std::span<double>> out;
  for (int k = 0; k < pieces; ++k) out.push_back(piece(k).entries());

  J.for_each_canonical([&](std::span<const int> idx, std::uint64_t r, double v) {
    const auto& c = constants.at(multiplicity(idx));
    const double a = std::abs(v);
    int hit = -1;
    for (int k = 0; k < pieces; ++k) {
      if (ranges[static_cast<std::size_t>(k)].contains(a)) {
        hit = k;
        break;
      }
    }
    if (hit < 0) throw InvariantError("entry escaped every truncation range");
    for (int k = 0; k < pieces; ++k) out[static_cast<std::size_t>(k)][r] = (k == hit ? v : 0.0) - c[static_cast<std::size_t>(k)];
  });
  return d;
}

std::vector<SmallPieceVariance> small_piece_variances(int p, const DisorderSpec& spec, const TruncationParams& params) {
  std::vector<SmallPieceVariance> out;
  for (auto m : multiplicity_classes(p)) {
    const double t = 1.0 / static_cast<double>(m);
    const double sd = std::sqrt(t);
    const AbsRange inside = params.small_range(p).scaled(1.0 / sd);
    const AbsRange outside{inside.hi, kInf, false, true};
    const double mean = spec.partial_moment(1, inside);
    const double second = spec.partial_moment(2, inside);
    SmallPieceVariance v;
    v.multiplicity = m;
    v.target = t;
    v.variance = t * (second - mean * mean);
    v.delta_tilde = 2.0 * spec.partial_moment(2, outside);
    v.topup_constant = std::sqrt(std::max(0.0, t - v.variance));
    out.push_back(v);
  }
  return out;
}

SymmetricTensor variance_topup(const SymmetricTensor& small, const DisorderSpec& spec, const TruncationParams& params,
                               std::uint64_t seed) {
  if (small.dim() != params.n) throw ShapeError("tensor dimension differs from truncation N");
  const int p = small.order();
  std::map<std::uint64_t, double> c;
  for (const auto& v : small_piece_variances(p, spec, params)) c.emplace(v.multiplicity, v.topup_constant);

  SymmetricTensor out = small;
  auto e = out.entries();
  small.for_each_canonical([&](std::span<const int> idx, std::uint64_t r, double) {
    CounterRng rng(derive_stream(seed, {tag(Purpose::topup), static_cast<std::uint64_t>(p), r}));
    const double sign = (rng() >> 63) ? 1.0 : -1.0;
    e[r] += c.at(multiplicity(idx)) * sign;
  });
  return out;
}

std::optional<ProbeResult> localized_probe(const SymmetricTensor& J, const MixtureSpec& mix, double threshold) {
  const int p = J.order();
  const int n = J.dim();
  double best = -1.0;
  std::vector<int> best_idx;
  J.for_each_canonical([&](std::span<const int> idx, std::uint64_t, double v) {
    const double a = std::abs(v);
    if (a < threshold || a <= best) return;
    bool has_odd = false;
    for (std::size_t k = 0; k < idx.size();) {
      std::size_t run = 1;
      while (k + run < idx.size() && idx[k + run] == idx[k]) ++run;
      if (run % 2 == 1) has_odd = true;
      k += run;
    }
    if (!has_odd && v * mix.gamma(p) <= 0.0) return;
    best = a;
    best_idx.assign(idx.begin(), idx.end());
  });
  if (best < 0.0) return std::nullopt;

  std::vector<int> support;
  std::vector<int> counts;
  for (int i : best_idx) {
    if (!support.empty() && support.back() == i) {
      ++counts.back();
    } else {
      support.push_back(i);
      counts.push_back(1);
    }
  }
  const double nd = n;
  const double mag = std::sqrt(nd / static_cast<double>(support.size()));
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int i : support) x[static_cast<std::size_t>(i)] = mag;
  const double entry = J.at(best_idx);
  if (entry * mix.gamma(p) < 0.0) {
    for (std::size_t k = 0; k < support.size(); ++k) {
      if (counts[k] % 2 == 1) {
        x[static_cast<std::size_t>(support[k])] = -mag;
        break;
      }
    }
  }
  const double value = mix.gamma(p) * std::pow(nd, -(p - 1) / 2.0) * full_contraction(J, x);
  return ProbeResult{SpinConfiguration{std::move(x), DomainSpec::l2()}, value / nd, std::move(support), entry};
}

}  // namespace pspin
