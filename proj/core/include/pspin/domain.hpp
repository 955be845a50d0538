#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pspin/rng.hpp"

namespace pspin {

/// Species blocks I_s covering [N], weights lambda_s and symmetric couplings
/// Gamma^(p) = (gamma_{s_1..s_p}) for p = 1..P.
class SpeciesPartition {
 public:
  /// `couplings[p-1]` is the dense row-major r^p array of Gamma^(p).
  SpeciesPartition(std::vector<int> species_of, std::vector<double> weights,
                   std::vector<std::vector<double>> couplings);

  /// Contiguous blocks of the given sizes.
  static SpeciesPartition contiguous(const std::vector<int>& sizes, std::vector<double> weights,
                                     std::vector<std::vector<double>> couplings);

  int dim() const noexcept { return static_cast<int>(species_of_.size()); }
  int species_count() const noexcept { return static_cast<int>(weights_.size()); }
  int max_order() const noexcept { return static_cast<int>(couplings_.size()); }
  int species_of(int i) const noexcept { return species_of_[i]; }
  double weight(int s) const noexcept { return weights_[s]; }
  const std::vector<int>& block(int s) const noexcept { return blocks_[s]; }

  /// gamma_{s_1..s_p} for the species of the given coordinates.
  double coupling_for_indices(std::span<const int> idx) const;
  /// gamma_{s_1..s_p} for explicit species labels.
  double coupling(std::span<const int> species) const;

 private:
  std::vector<int> species_of_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> couplings_;
  std::vector<std::vector<int>> blocks_;
};

struct L2Sphere {};
struct LqSphere {
  double q;
};
struct ProductSpheres {
  SpeciesPartition partition;
};

/// Configuration domain: the l2 sphere of radius sqrt(N), the l_q sphere
/// {||x||_q^q = N} with q > 2, or a product of species spheres.
struct DomainSpec {
  std::variant<L2Sphere, LqSphere, ProductSpheres> kind = L2Sphere{};

  static DomainSpec l2() { return {}; }
  static DomainSpec lq(double q);
  static DomainSpec product(SpeciesPartition partition);

  bool is_l2() const noexcept { return std::holds_alternative<L2Sphere>(kind); }
  const LqSphere* lq_sphere() const noexcept { return std::get_if<LqSphere>(&kind); }
  const SpeciesPartition* partition() const noexcept {
    auto* p = std::get_if<ProductSpheres>(&kind);
    return p ? &p->partition : nullptr;
  }
  std::string name() const;
};

/// Relative violation of the domain constraint at x (0 on the domain).
double constraint_residual(const DomainSpec& domain, std::span<const double> x);

/// Radial rescaling onto the constraint set (blockwise for products).
void retract(const DomainSpec& domain, std::span<double> x);

/// Random point of the domain: normalized Gaussian per block for spheres,
/// symmetrized exponential-power draws rescaled to the l_q sphere.
std::vector<double> sample_domain(const DomainSpec& domain, int n, CounterRng& rng);

struct SpinConfiguration {
  std::vector<double> coords;
  DomainSpec domain;

  double residual() const { return constraint_residual(domain, coords); }
  bool feasible(double tol = 1e-9) const { return residual() <= tol; }
};

}  // namespace pspin
