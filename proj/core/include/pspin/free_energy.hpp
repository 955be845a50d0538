#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pspin/disorder.hpp"
#include "pspin/domain.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/mixture.hpp"

namespace pspin {

enum class TemperingMode { off, on, automatic };

/// Metropolis sampler settings, per grid point: `sweeps` total of which the
/// first `burn_in` are discarded.
///
/// Models of degree <= 2 use pair-rotation moves (N per sweep); the proposal
/// scale is the maximal rotation angle. Other models use one global move
/// x -> retract(x + s g) per sweep with Gaussian g.
struct GibbsSamplerConfig {
  int sweeps = 400;
  int burn_in = 100;
  double proposal_scale = 0.5;
  double target_acceptance = 0.5;
  int batches = 20;
  TemperingMode tempering = TemperingMode::automatic;
  /// Sup-norm cap: the chain targets the Gibbs measure restricted to |x_i| <= cap.
  double sup_cap = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct FreeEnergyEstimate {
  /// F_beta / N with F_beta = beta^{-1} log E_mu exp(beta H), mu uniform on the domain.
  double value = 0.0;
  double std_error = 0.0;
  double beta = 0.0;
  std::vector<double> grid;
  /// <H>_b / N and its batch-means standard error at each grid point.
  std::vector<double> mean_energy;
  std::vector<double> energy_std_error;
  std::vector<double> acceptance;
  /// "ti", "tempering" or "annealed_bound".
  std::string method;
  /// Some chain finished adaptation with acceptance outside [0.05, 0.95].
  bool acceptance_warning = false;
};

/// 0 = b_0 < ... < b_{n-1} = beta, geometric from beta/1000 up to beta.
std::vector<double> geometric_grid(double beta, int points);
std::vector<double> linear_grid(double beta, int points);
/// "geometric:20" or "linear:20".
std::vector<double> parse_grid(std::string_view spec, double beta);

SpinConfiguration sample_uniform_sphere(int n, std::uint64_t seed);

/// Uniform point of the sphere with |x_i| <= cap, by rejection. Throws
/// ConfigError (quoting the observed acceptance) once the acceptance is
/// evidently below 1e-6.
SpinConfiguration sample_delocalized(int n, double cap, std::uint64_t seed);

/// Thermodynamic integration of F_beta = beta^{-1} int_0^beta <H>_b db with the
/// trapezoid rule. std_error combines batch-means errors with a grid-halving
/// estimate of the quadrature error.
FreeEnergyEstimate free_energy_ti(const Hamiltonian& h, double beta, std::span<const double> grid,
                                  const GibbsSamplerConfig& config, std::uint64_t seed);
FreeEnergyEstimate free_energy_ti(std::span<const SymmetricTensor> tensors, const MixtureSpec& mix,
                                  const DomainSpec& domain, double beta, std::span<const double> grid,
                                  const GibbsSamplerConfig& config, std::uint64_t seed);

/// beta xi(1) / 2.
double annealed_bound(const MixtureSpec& mix, double beta);

struct LindebergInstance {
  std::vector<double> a;
  std::vector<double> b;
  double beta = 1.0;
};

/// beta^{-1} log sum_i exp(beta (a_i x + b_i)).
double lindeberg_free(const LindebergInstance& inst, double x);

struct LindebergDerivatives {
  double d1;
  double d2;
  double d3;
};

/// With Gibbs weights w_i proportional to exp(beta (a_i x + b_i)) and m = sum w_i a_i:
/// d1 = m, d2 = beta sum w_i (a_i - m)^2, d3 = beta^2 sum w_i (a_i - m)^3.
LindebergDerivatives lindeberg_derivatives(const LindebergInstance& inst, double x);

struct ExchangeGap {
  double gap;
  double bound;
  double std_error;
  bool within_bound;
};

/// Monte Carlo |E F(X) - E F(Y)| for X ~ law1, Y ~ law2 against the third-order
/// bound beta^2 ||a||_inf^3 (E|X|^3 + E|Y|^3).
ExchangeGap exchange_gap(const LindebergInstance& inst, const DisorderSpec& law1, const DisorderSpec& law2,
                         int nsamples, std::uint64_t seed);

}  // namespace pspin
