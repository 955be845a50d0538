#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "pspin/domain.hpp"
#include "pspin/mixture.hpp"
#include "pspin/symmetric_tensor.hpp"

namespace pspin {

/// H(x) = sum_p gamma_p N^{-(p-1)/2} <J^(p), x^{(x)p}>, the inner product running
/// over the full index space [N]^p. On a product-of-spheres domain the
/// coefficient gamma_{s(i_1)..s(i_p)} of the species couplings replaces gamma_p.
///
/// Orders 1 and 2 are folded into a dense quadratic form x^T Q x + b^T x;
/// higher orders are contracted directly on canonical storage.
class Hamiltonian {
 public:
  /// Every order with a non-zero coefficient must be present exactly once;
  /// tensors whose coefficient is zero are dropped.
  Hamiltonian(std::vector<SymmetricTensor> tensors, const MixtureSpec& mix,
              const DomainSpec& domain = DomainSpec::l2());
  Hamiltonian(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix,
              const DomainSpec& domain = DomainSpec::l2());

  int dim() const noexcept { return n_; }
  int max_order() const noexcept { return max_order_; }
  const DomainSpec& domain() const noexcept { return domain_; }
  /// True when an order-1 term (or order-1 spike) is present.
  bool has_linear() const noexcept { return has_linear_; }

  double value(std::span<const double> x) const;
  void gradient(std::span<const double> x, std::span<double> grad) const;
  double value_and_gradient(std::span<const double> x, std::span<double> grad) const;

  /// Adds the planted term lambda * N * (<x, v> / N)^p.
  void add_spike(double lambda, std::span<const double> v, int p);

  /// True when every term has degree <= 2, i.e. H(x) = x^T Q x + b^T x.
  bool is_quadratic() const noexcept { return terms_.empty() && spikes_.empty(); }
  const Eigen::MatrixXd& quadratic_form() const noexcept { return quad_; }
  const Eigen::VectorXd& linear_field() const noexcept { return linear_; }

 private:
  struct Term {
    SymmetricTensor tensor;
    double scale;
  };
  struct Spike {
    double lambda;
    std::vector<double> direction;
    int p;
  };

  void build(std::vector<SymmetricTensor> tensors, const MixtureSpec& mix, const DomainSpec& domain);

  int n_ = 0;
  int max_order_ = 0;
  DomainSpec domain_;
  bool has_quad_ = false;
  bool has_linear_ = false;
  Eigen::MatrixXd quad_;
  Eigen::VectorXd linear_;
  std::vector<Term> terms_;
  std::vector<Spike> spikes_;
};

/// Adds scale * d/dx <T, x^{(x)p}> to `grad` and returns scale * <T, x^{(x)p}>.
double contract_accumulate(const SymmetricTensor& t, std::span<const double> x, double scale,
                           std::span<double> grad);

/// <T, x^{(x)p}> summed over the full index space (no coefficient).
double full_contraction(const SymmetricTensor& t, std::span<const double> x);

double hamiltonian(const SpinConfiguration& sigma, std::span<const SymmetricTensor> tensors,
                   const MixtureSpec& mix);
std::vector<double> gradient(const SpinConfiguration& sigma, std::span<const SymmetricTensor> tensors,
                             const MixtureSpec& mix);

struct CovarianceAudit {
  double empirical;
  double predicted;
  double std_error;
};

/// Monte Carlo mean of H(x) H(y) over fresh Gaussian disorder against N xi(<x,y>/N).
CovarianceAudit covariance_audit(const MixtureSpec& mix, std::span<const double> x, std::span<const double> y,
                                 int samples, std::uint64_t seed);

}  // namespace pspin
