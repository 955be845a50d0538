#include "pspin/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pspin/errors.hpp"

namespace pspin {

namespace {

int int_pow(int base, int e) {
  int r = 1;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

void rescale_l2(std::span<double> x, std::span<const int> block, double target_sq) {
  double s = 0.0;
  for (int i : block) s += x[i] * x[i];
  if (s == 0.0) {
    for (int i : block) x[i] = 1.0;
    s = static_cast<double>(block.size());
  }
  const double f = std::sqrt(target_sq / s);
  for (int i : block) x[i] *= f;
}

}  // namespace

SpeciesPartition::SpeciesPartition(std::vector<int> species_of, std::vector<double> weights,
                                   std::vector<std::vector<double>> couplings)
    : species_of_(std::move(species_of)), weights_(std::move(weights)), couplings_(std::move(couplings)) {
  const int r = species_count();
  if (r < 1) throw ConfigError("species partition needs at least one species");
  if (species_of_.empty()) throw ConfigError("species partition over an empty index set");
  blocks_.assign(static_cast<std::size_t>(r), {});
  for (int i = 0; i < dim(); ++i) {
    const int s = species_of_[i];
    if (s < 0 || s >= r) throw ConfigError("species label out of range");
    blocks_[s].push_back(i);
  }
  double total = 0.0;
  for (int s = 0; s < r; ++s) {
    if (blocks_[s].empty()) throw ConfigError("species block is empty");
    if (!(weights_[s] > 0.0)) throw ConfigError("species weights must be positive");
    total += weights_[s];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("species weights must sum to 1");
  for (std::size_t p = 1; p <= couplings_.size(); ++p) {
    const auto& g = couplings_[p - 1];
    if (g.size() != static_cast<std::size_t>(int_pow(r, static_cast<int>(p)))) {
      throw ConfigError("coupling tensor Gamma^(p) must have r^p entries");
    }
    std::vector<int> labels(p, 0);
    for (std::size_t flat = 0; flat < g.size(); ++flat) {
      if (!(g[flat] >= 0.0)) throw ConfigError("couplings must be >= 0");
      std::size_t rem = flat;
      for (int k = static_cast<int>(p) - 1; k >= 0; --k) {
        labels[k] = static_cast<int>(rem % r);
        rem /= r;
      }
      std::vector<int> sorted = labels;
      std::sort(sorted.begin(), sorted.end());
      if (coupling(sorted) != g[flat]) throw ConfigError("coupling tensor must be symmetric");
    }
  }
}

SpeciesPartition SpeciesPartition::contiguous(const std::vector<int>& sizes, std::vector<double> weights,
                                              std::vector<std::vector<double>> couplings) {
  std::vector<int> labels;
  for (std::size_t s = 0; s < sizes.size(); ++s) labels.insert(labels.end(), sizes[s], static_cast<int>(s));
  return SpeciesPartition(std::move(labels), std::move(weights), std::move(couplings));
}

double SpeciesPartition::coupling(std::span<const int> species) const {
  const int p = static_cast<int>(species.size());
  if (p < 1 || p > max_order()) return 0.0;
  std::size_t flat = 0;
  for (int s : species) flat = flat * species_count() + static_cast<std::size_t>(s);
  return couplings_[p - 1][flat];
}

double SpeciesPartition::coupling_for_indices(std::span<const int> idx) const {
  int labels[16];
  const int p = static_cast<int>(idx.size());
  for (int k = 0; k < p; ++k) labels[k] = species_of_[idx[k]];
  return coupling(std::span<const int>(labels, static_cast<std::size_t>(p)));
}

DomainSpec DomainSpec::lq(double q) {
  if (!(q > 2.0) || !std::isfinite(q)) throw ConfigError("l_q sphere requires finite q > 2");
  return DomainSpec{LqSphere{q}};
}

DomainSpec DomainSpec::product(SpeciesPartition partition) { return DomainSpec{ProductSpheres{std::move(partition)}}; }

std::string DomainSpec::name() const {
  if (is_l2()) return "l2";
  if (auto* q = lq_sphere()) return "lq:" + std::to_string(q->q);
  return "product:" + std::to_string(partition()->species_count());
}

double constraint_residual(const DomainSpec& domain, std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  if (auto* q = domain.lq_sphere()) {
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v), q->q);
    return std::abs(s - n) / n;
  }
  if (auto* part = domain.partition()) {
    if (part->dim() != static_cast<int>(x.size())) throw ShapeError("configuration length differs from partition");
    double worst = 0.0;
    for (int s = 0; s < part->species_count(); ++s) {
      double sq = 0.0;
      for (int i : part->block(s)) sq += x[i] * x[i];
      const double target = part->weight(s) * n;
      worst = std::max(worst, std::abs(sq - target) / target);
    }
    return worst;
  }
  double sq = 0.0;
  for (double v : x) sq += v * v;
  return std::abs(sq - n) / n;
}

void retract(const DomainSpec& domain, std::span<double> x) {
  const double n = static_cast<double>(x.size());
  if (auto* q = domain.lq_sphere()) {
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v), q->q);
    if (s == 0.0) {
      std::fill(x.begin(), x.end(), 1.0);
      return;
    }
    const double f = std::pow(n / s, 1.0 / q->q);
    for (double& v : x) v *= f;
    return;
  }
  if (auto* part = domain.partition()) {
    if (part->dim() != static_cast<int>(x.size())) throw ShapeError("configuration length differs from partition");
    for (int s = 0; s < part->species_count(); ++s) rescale_l2(x, part->block(s), part->weight(s) * n);
    return;
  }
  std::vector<int> all(x.size());
  std::iota(all.begin(), all.end(), 0);
  rescale_l2(x, all, n);
}

std::vector<double> sample_domain(const DomainSpec& domain, int n, CounterRng& rng) {
  std::vector<double> x(static_cast<std::size_t>(n));
  if (auto* q = domain.lq_sphere()) {
    // density proportional to exp(-|x|^q): |x| = G^{1/q} with G ~ Gamma(1/q, 1)
    std::gamma_distribution<double> gamma(1.0 / q->q, 1.0);
    for (double& v : x) {
      const double mag = std::pow(gamma(rng), 1.0 / q->q);
      v = (rng() & 1u) ? mag : -mag;
    }
  } else {
    std::normal_distribution<double> normal;
    for (double& v : x) v = normal(rng);
  }
  retract(domain, x);
  return x;
}

}  // namespace pspin
