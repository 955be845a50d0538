#include "pspin/hamiltonian.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "pspin/errors.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

double order3_accumulate(const SymmetricTensor& t, std::span<const double> x, double scale, std::span<double> grad) {
  const int n = t.dim();
  const double* e = t.entries().data();
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  std::size_t r = 0;
  for (int k = 0; k < n; ++k) {
    const double xk = x[k];
    for (int j = 0; j <= k; ++j) {
      const double xj = x[j];
      const double xjk = xj * xk;
      const double m = (j == k) ? 3.0 : 6.0;
      double acc = 0.0;
      for (int i = 0; i < j; ++i) {
        const double w = m * e[r + i];
        u[i] += w * xjk;
        acc += w * x[i];
      }
      r += static_cast<std::size_t>(j);
      const double w = ((j == k) ? 1.0 : 3.0) * e[r++];
      u[j] += w * xjk;
      acc += w * xj;
      u[j] += acc * xk;
      u[k] += acc * xj;
    }
  }
  double dot = 0.0;
  for (int i = 0; i < n; ++i) {
    grad[i] += scale * u[i];
    dot += u[i] * x[i];
  }
  return scale * dot / 3.0;
}

double generic_accumulate(const SymmetricTensor& t, std::span<const double> x, double scale, std::span<double> grad) {
  const int p = t.order();
  const int n = t.dim();
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  double prefix[kMaxOrder + 1];
  double suffix[kMaxOrder + 1];
  t.for_each_canonical([&](std::span<const int> idx, std::uint64_t, double v) {
    if (v == 0.0) return;
    const double w = v * static_cast<double>(multiplicity(idx));
    prefix[0] = 1.0;
    for (int l = 0; l < p; ++l) prefix[l + 1] = prefix[l] * x[idx[l]];
    suffix[p] = 1.0;
    for (int l = p - 1; l >= 0; --l) suffix[l] = suffix[l + 1] * x[idx[l]];
    for (int l = 0; l < p; ++l) u[idx[l]] += w * prefix[l] * suffix[l + 1];
  });
  double dot = 0.0;
  for (int i = 0; i < n; ++i) {
    grad[i] += scale * u[i];
    dot += u[i] * x[i];
  }
  return scale * dot / p;
}

SymmetricTensor species_scaled(const SymmetricTensor& t, const SpeciesPartition& part) {
  SymmetricTensor out(t.order(), t.dim());
  auto dst = out.entries();
  t.for_each_canonical([&](std::span<const int> idx, std::uint64_t r, double v) {
    dst[r] = v * part.coupling_for_indices(idx);
  });
  return out;
}

}  // namespace

double contract_accumulate(const SymmetricTensor& t, std::span<const double> x, double scale,
                           std::span<double> grad) {
  if (static_cast<int>(x.size()) != t.dim() || grad.size() != x.size()) {
    throw ShapeError("contraction: vector length differs from tensor dimension");
  }
  const int n = t.dim();
  const auto e = t.entries();
  switch (t.order()) {
    case 1: {
      double v = 0.0;
      for (int i = 0; i < n; ++i) {
        grad[i] += scale * e[i];
        v += e[i] * x[i];
      }
      return scale * v;
    }
    case 2: {
      std::vector<double> u(static_cast<std::size_t>(n), 0.0);
      std::size_t r = 0;
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < j; ++i, ++r) {
          u[i] += 2.0 * e[r] * x[j];
          acc += 2.0 * e[r] * x[i];
        }
        acc += 2.0 * e[r++] * x[j];
        u[j] += acc;
      }
      double dot = 0.0;
      for (int i = 0; i < n; ++i) {
        grad[i] += scale * u[i];
        dot += u[i] * x[i];
      }
      return scale * dot / 2.0;
    }
    case 3:
      return order3_accumulate(t, x, scale, grad);
    default:
      return generic_accumulate(t, x, scale, grad);
  }
}

double full_contraction(const SymmetricTensor& t, std::span<const double> x) {
  std::vector<double> scratch(x.size(), 0.0);
  return contract_accumulate(t, x, 1.0, scratch);
}

Hamiltonian::Hamiltonian(std::vector<SymmetricTensor> tensors, const MixtureSpec& mix, const DomainSpec& domain) {
  build(std::move(tensors), mix, domain);
}

Hamiltonian::Hamiltonian(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix,
                         const DomainSpec& domain) {
  build(std::vector<SymmetricTensor>(tensors.begin(), tensors.end()), mix, domain);
}

void Hamiltonian::build(std::vector<SymmetricTensor> tensors, const MixtureSpec& mix, const DomainSpec& domain) {
  if (tensors.empty()) throw ShapeError("Hamiltonian needs at least one disorder tensor");
  if (domain.lq_sphere() == nullptr && !domain.is_l2() && domain.partition() == nullptr) {
    throw ShapeError("unknown domain");
  }
  n_ = tensors.front().dim();
  domain_ = domain;
  max_order_ = mix.max_order();
  const SpeciesPartition* part = domain.partition();
  if (part != nullptr) {
    if (part->dim() != n_) throw ShapeError("species partition dimension differs from tensor dimension");
    max_order_ = std::max(max_order_, part->max_order());
  }

  auto coefficient_active = [&](int p) {
    if (part == nullptr) return mix.gamma(p) > 0.0;
    if (p > part->max_order()) return false;
    std::vector<int> labels(static_cast<std::size_t>(p), 0);
    do {
      if (part->coupling(labels) > 0.0) return true;
    } while (CanonicalIndexer::advance(labels, part->species_count()));
    return false;
  };

  std::vector<bool> seen(static_cast<std::size_t>(max_order_ + 1), false);
  for (auto& t : tensors) {
    const int p = t.order();
    if (t.dim() != n_) throw ShapeError("disorder tensors have different dimensions");
    if (p > max_order_) throw ShapeError("tensor of order " + std::to_string(p) + " exceeds the mixture order");
    if (seen[p]) throw ShapeError("duplicate tensor of order " + std::to_string(p));
    seen[p] = true;
    if (!coefficient_active(p)) continue;

    const double norm = std::pow(static_cast<double>(n_), -0.5 * (p - 1));
    SymmetricTensor eff = part ? species_scaled(t, *part) : std::move(t);
    const double scale = part ? norm : mix.gamma(p) * norm;
    if (p == 1) {
      if (!has_linear_) linear_ = Eigen::VectorXd::Zero(n_);
      has_linear_ = true;
      for (int i = 0; i < n_; ++i) linear_[i] += scale * eff.entries()[i];
    } else if (p == 2) {
      if (!has_quad_) quad_ = Eigen::MatrixXd::Zero(n_, n_);
      has_quad_ = true;
      quad_ += scale * eff.to_dense_matrix();
    } else {
      terms_.push_back(Term{std::move(eff), scale});
    }
  }
  for (int p = 1; p <= max_order_; ++p) {
    if (coefficient_active(p) && !seen[p]) {
      throw ShapeError("missing disorder tensor of order " + std::to_string(p));
    }
  }
}

void Hamiltonian::add_spike(double lambda, std::span<const double> v, int p) {
  if (static_cast<int>(v.size()) != n_) throw ShapeError("spike direction length differs from dimension");
  if (p < 1) throw ShapeError("spike order must be >= 1");
  if (lambda == 0.0) return;
  const double n = static_cast<double>(n_);
  Eigen::Map<const Eigen::VectorXd> dir(v.data(), n_);
  if (p == 1) {
    if (!has_linear_) linear_ = Eigen::VectorXd::Zero(n_);
    has_linear_ = true;
    linear_ += lambda * dir;
  } else if (p == 2) {
    if (!has_quad_) quad_ = Eigen::MatrixXd::Zero(n_, n_);
    has_quad_ = true;
    quad_ += (lambda / n) * dir * dir.transpose();
  } else {
    spikes_.push_back(Spike{lambda, std::vector<double>(v.begin(), v.end()), p});
  }
  max_order_ = std::max(max_order_, p);
}

double Hamiltonian::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(grad.size()) != n_) {
    throw ShapeError("configuration length differs from Hamiltonian dimension");
  }
  Eigen::Map<const Eigen::VectorXd> xv(x.data(), n_);
  Eigen::Map<Eigen::VectorXd> g(grad.data(), n_);
  g.setZero();
  double h = 0.0;
  if (has_quad_) {
    g.noalias() = 2.0 * (quad_ * xv);
    h += 0.5 * xv.dot(g);
  }
  if (has_linear_) {
    g += linear_;
    h += linear_.dot(xv);
  }
  for (const auto& term : terms_) h += contract_accumulate(term.tensor, x, term.scale, grad);
  const double n = static_cast<double>(n_);
  for (const auto& s : spikes_) {
    Eigen::Map<const Eigen::VectorXd> dir(s.direction.data(), n_);
    const double overlap = xv.dot(dir);
    h += s.lambda * n * std::pow(overlap / n, s.p);
    g += (s.lambda * s.p * std::pow(overlap / n, s.p - 1)) * dir;
  }
  return h;
}

double Hamiltonian::value(std::span<const double> x) const {
  std::vector<double> scratch(x.size());
  return value_and_gradient(x, scratch);
}

void Hamiltonian::gradient(std::span<const double> x, std::span<double> grad) const { value_and_gradient(x, grad); }

double hamiltonian(const SpinConfiguration& sigma, std::span<const SymmetricTensor> tensors,
                   const MixtureSpec& mix) {
  return Hamiltonian(tensors, mix, sigma.domain).value(sigma.coords);
}

std::vector<double> gradient(const SpinConfiguration& sigma, std::span<const SymmetricTensor> tensors,
                             const MixtureSpec& mix) {
  std::vector<double> g(sigma.coords.size());
  Hamiltonian(tensors, mix, sigma.domain).gradient(sigma.coords, g);
  return g;
}

CovarianceAudit covariance_audit(const MixtureSpec& mix, std::span<const double> x, std::span<const double> y,
                                 int samples, std::uint64_t seed) {
  if (x.size() != y.size() || x.empty()) throw ShapeError("covariance_audit: configurations differ in length");
  if (samples < 1) throw ConfigError("covariance_audit: need at least one sample");
  const int n = static_cast<int>(x.size());
  const double nd = static_cast<double>(n);

  // H(x) is linear in the canonical entries: H(x) = sum_r J_r c_r(x).
  std::vector<double> cx, cy, sd;
  for (int p : mix.active_orders()) {
    const double coef = mix.gamma(p) * std::pow(nd, -0.5 * (p - 1));
    std::vector<int> idx(static_cast<std::size_t>(p), 0);
    do {
      const double mult = static_cast<double>(multiplicity(idx));
      double px = 1.0, py = 1.0;
      for (int i : idx) {
        px *= x[i];
        py *= y[i];
      }
      cx.push_back(coef * mult * px);
      cy.push_back(coef * mult * py);
      sd.push_back(std::sqrt(1.0 / mult));
    } while (CanonicalIndexer::advance(idx, n));
  }

  double mean = 0.0, m2 = 0.0;
  std::normal_distribution<double> normal;
  for (int s = 0; s < samples; ++s) {
    CounterRng rng(derive_stream(seed, {tag(Purpose::audit), static_cast<std::uint64_t>(s)}));
    normal.reset();
    double hx = 0.0, hy = 0.0;
    for (std::size_t r = 0; r < cx.size(); ++r) {
      const double j = sd[r] * normal(rng);
      hx += j * cx[r];
      hy += j * cy[r];
    }
    const double v = hx * hy;
    const double delta = v - mean;
    mean += delta / (s + 1);
    m2 += delta * (v - mean);
  }
  double overlap = 0.0;
  for (int i = 0; i < n; ++i) overlap += x[i] * y[i];
  const double predicted = nd * mix.xi(overlap / nd);
  const double se = samples > 1 ? std::sqrt(m2 / (samples - 1) / samples) : 0.0;
  return {mean, predicted, se};
}

}  // namespace pspin
