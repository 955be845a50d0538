#include "pspin/injective_norm.hpp"

#include <cmath>
#include <random>

#include "pspin/errors.hpp"
#include "pspin/rng.hpp"

namespace pspin {
namespace {

double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Contracts every mode except `skip` of the dense row-major tensor.
std::vector<double> contract_except(const std::vector<double>& dense, int p, int n,
                                    const std::vector<const std::vector<double>*>& vecs, int skip) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  std::vector<int> idx(static_cast<std::size_t>(p), 0);
  for (std::size_t flat = 0; flat < dense.size(); ++flat) {
    double w = dense[flat];
    if (w != 0.0) {
      for (int m = 0; m < p; ++m) {
        if (m != skip) w *= (*vecs[static_cast<std::size_t>(m)])[static_cast<std::size_t>(idx[static_cast<std::size_t>(m)])];
      }
      out[static_cast<std::size_t>(idx[static_cast<std::size_t>(skip)])] += w;
    }
    for (int m = p - 1; m >= 0; --m) {
      if (++idx[static_cast<std::size_t>(m)] < n) break;
      idx[static_cast<std::size_t>(m)] = 0;
    }
  }
  return out;
}

std::vector<double> random_unit(int n, CounterRng& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = normal(rng);
  const double s = norm(v);
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace

InjectiveNormResult injective_norm(const SymmetricTensor& t, int restarts, std::uint64_t seed, double tol,
                                   int max_iters) {
  if (restarts < 1) throw ConfigError("injective_norm needs at least one restart");
  const int p = t.order();
  const int n = t.dim();
  const auto dense = t.to_dense();
  InjectiveNormResult res;
  res.value = -1.0;
  res.diagonal_value = -1.0;

  if (p == 1) {
    std::vector<double> v(dense.begin(), dense.end());
    const double s = norm(v);
    res.value = res.diagonal_value = s;
    if (s > 0) {
      for (auto& x : v) x /= s;
    } else {
      v.assign(static_cast<std::size_t>(n), 0.0);
      v[0] = 1.0;
    }
    res.witness = {v};
    res.diagonal_witness = v;
    return res;
  }

  double frob = 0.0;
  for (double x : dense) frob += x * x;
  frob = std::sqrt(frob);
  const double shift = (p - 1) * frob;

  for (int r = 0; r < restarts; ++r) {
    CounterRng rng(derive_stream(seed, {tag(Purpose::injective), static_cast<std::uint64_t>(r)}));

    // Alternating maximization over independent unit vectors.
    std::vector<std::vector<double>> xs;
    for (int m = 0; m < p; ++m) xs.push_back(random_unit(n, rng));
    std::vector<const std::vector<double>*> ptrs;
    for (auto& x : xs) ptrs.push_back(&x);
    double value = 0.0;
    bool done = false;
    for (int it = 0; it < max_iters && !done; ++it) {
      const double before = value;
      for (int m = 0; m < p; ++m) {
        auto v = contract_except(dense, p, n, ptrs, m);
        const double s = norm(v);
        if (s == 0.0) {
          value = 0.0;
          done = true;
          break;
        }
        for (auto& x : v) x /= s;
        xs[static_cast<std::size_t>(m)] = std::move(v);
        value = s;
      }
      if (it > 0 && std::abs(value - before) <= tol * std::max(1.0, std::abs(value))) done = true;
    }
    if (!done) res.converged = false;
    if (value > res.value) {
      res.value = value;
      res.witness = xs;
    }

    // Shifted symmetric power iteration for max <+-T, x^p>.
    const auto start = random_unit(n, rng);
    for (double sign : {1.0, -1.0}) {
      std::vector<double> x = start;
      std::vector<const std::vector<double>*> same(static_cast<std::size_t>(p), &x);
      double f = 0.0;
      bool ok = false;
      for (int it = 0; it < max_iters; ++it) {
        auto g = contract_except(dense, p, n, same, 0);
        double fx = 0.0;
        for (int i = 0; i < n; ++i) fx += sign * g[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = sign * g[static_cast<std::size_t>(i)] + shift * x[static_cast<std::size_t>(i)];
        const double s = norm(g);
        if (s == 0.0) {
          ok = true;
          f = 0.0;
          break;
        }
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = g[static_cast<std::size_t>(i)] / s;
        if (it > 0 && std::abs(fx - f) <= tol * std::max(1.0, std::abs(fx))) {
          f = fx;
          ok = true;
          break;
        }
        f = fx;
      }
      if (!ok) res.converged = false;
      {
        const auto g = contract_except(dense, p, n, same, 0);
        f = 0.0;
        for (int i = 0; i < n; ++i) f += sign * g[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      }
      if (f > res.diagonal_value) {
        res.diagonal_value = f;
        res.diagonal_witness = x;
      }
    }
  }
  res.value = std::max(res.value, 0.0);
  res.diagonal_value = std::max(res.diagonal_value, 0.0);
  return res;
}

}  // namespace pspin
