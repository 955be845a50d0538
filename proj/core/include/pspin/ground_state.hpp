#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pspin/domain.hpp"
#include "pspin/free_energy.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/mixture.hpp"
#include "pspin/symmetric_tensor.hpp"

namespace pspin {

/// Projected gradient ascent with radial retraction. Every iteration tries a
/// step t along the tangent gradient and halves t until H strictly increases.
/// The first trial step moves 0.1 sqrt(N) / ||grad H||; later trials use the
/// Barzilai-Borwein ratio of the last two iterates when `bb_steps` is set.
struct GsSolverConfig {
  int restarts = 10;
  int max_iters = 5000;
  double initial_step = 0.1;
  double backtrack = 0.5;
  /// Stop once three consecutive accepted steps each gain <= tolerance * max(1, |H|).
  double tolerance = 1e-13;
  bool bb_steps = true;
  /// Start every restart from the negation of its usual random point.
  bool negate_starts = false;

  void validate() const;
};

struct GsResult {
  double value = 0.0;
  SpinConfiguration argmax;
  std::vector<double> restart_values;
  int iterations = 0;
  bool converged = true;
};

GsResult solve_gs(const Hamiltonian& h, const GsSolverConfig& config, std::uint64_t seed);
GsResult solve_gs(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix, const DomainSpec& domain,
                  const GsSolverConfig& config, std::uint64_t seed);

struct EigenOracleResult {
  double lambda_max = 0.0;
  bool converged = false;
  int matvecs = 0;
  std::vector<double> eigenvector;
};

/// Largest eigenvalue of the symmetric completion of an order-2 tensor by
/// restarted Lanczos with full reorthogonalization. The ground state of
/// gamma_2 N^{-1/2} x^T A x on the sphere is gamma_2 sqrt(N) lambda_max.
EigenOracleResult eigen_oracle_p2(const SymmetricTensor& j2, double tol = 1e-12, int max_matvecs = 20000);
EigenOracleResult top_eigenpair(const Eigen::MatrixXd& a, double tol = 1e-12, int max_matvecs = 20000,
                                std::uint64_t seed = 0);

/// Largest singular value of a rectangular matrix by alternating power iteration.
struct SingularOracleResult {
  double sigma_max = 0.0;
  bool converged = false;
  int iterations = 0;
};
SingularOracleResult top_singular_value(const Eigen::MatrixXd& b, double tol = 1e-13, int max_iters = 100000);

struct BridgeCheck {
  bool lower_ok = false;
  bool upper_ok = false;
  /// GS/N - F/N.
  double gap = 0.0;
  /// (C/beta) log(2 + P beta GSbar/N), per site.
  double bound = 0.0;
  /// Margins of the two inequalities (non-negative when they hold), per site.
  double lower_slack = 0.0;
  double upper_slack = 0.0;
};

/// Checks F <= GS + err and GS - F <= (C N / beta) log(2 + P beta GSbar / N) + err,
/// GSbar = max(GS(J), GS(-J)), with err = 3 fe.std_error (per site throughout).
BridgeCheck gs_bridge_check(const MixtureSpec& mix, double beta, const FreeEnergyEstimate& fe, const GsResult& gs,
                            double gs_negated, double audit_constant = 10.0);

/// Same, solving GS(-J) internally.
BridgeCheck gs_bridge_check(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix, double beta,
                            const FreeEnergyEstimate& fe, const GsResult& gs, const GsSolverConfig& config,
                            std::uint64_t seed, double audit_constant = 10.0);

}  // namespace pspin
