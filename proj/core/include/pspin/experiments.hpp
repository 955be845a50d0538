#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pspin/disorder.hpp"
#include "pspin/domain.hpp"
#include "pspin/free_energy.hpp"
#include "pspin/ground_state.hpp"
#include "pspin/mixture.hpp"
#include "pspin/report.hpp"

namespace pspin {

/// Species layout for multi-species runs: block fractions of N and the
/// couplings Gamma^(p), `couplings[p-1]` row-major over r^p species labels.
struct SpeciesConfig {
  std::vector<double> fractions;
  std::vector<std::vector<double>> couplings;

  SpeciesPartition partition_for(int n) const;
};

/// Declarative description of one experiment; JSON keys match field names.
struct ExperimentConfig {
  std::string experiment = "gs";
  std::vector<double> gammas{0.0, 1.0};
  std::vector<std::string> families{"gaussian"};
  std::vector<int> sizes{100};
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t root_seed = 0;
  std::optional<double> beta;
  std::string grid = "geometric:20";
  GsSolverConfig gs;
  GibbsSamplerConfig sampler;
  /// "l2" or "lq:<q>".
  std::string domain = "l2";
  std::vector<double> lambdas{0.0, 2.0};
  std::optional<SpeciesConfig> species;
  double moment_eps = 0.5;
  Tolerances tolerances;
  std::string output = "results.csv";

  MixtureSpec mixture() const { return MixtureSpec(gammas); }
  std::vector<DisorderSpec> disorder_specs() const;
  DomainSpec domain_spec() const;
  /// Non-empty lists, distinct seeds, parsable families and domain.
  void validate() const;

  static ExperimentConfig from_json(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json() const;
};

/// Stream key for one (experiment, N, family, replicate) cell.
std::uint64_t cell_seed(const ExperimentConfig& cfg, std::string_view purpose, int n, std::string_view family,
                        std::uint64_t replicate);

/// Independent disorder tensors for every active order of the mixture.
std::vector<SymmetricTensor> sample_disorder(const MixtureSpec& mix, int n, const DisorderSpec& spec,
                                             std::uint64_t seed);

/// Refuses (ConfigError naming the moment) families without (C, eps)-moment bounds.
void require_moment_bounds(const ExperimentConfig& cfg);

std::vector<ResultRow> run_gs(const ExperimentConfig& cfg);
std::vector<ResultRow> run_fe(const ExperimentConfig& cfg);
std::vector<ResultRow> run_universality(const ExperimentConfig& cfg);
std::vector<ResultRow> run_baiyin_necessity(const ExperimentConfig& cfg);
std::vector<ResultRow> run_truncation_audit(const ExperimentConfig& cfg);
std::vector<ResultRow> run_tensor_pca(const ExperimentConfig& cfg);
std::vector<ResultRow> run_multispecies(const ExperimentConfig& cfg);
std::vector<ResultRow> run_lq(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

struct PairedBootstrap {
  /// Fraction of resamples whose medians increase strictly across N.
  double increasing_fraction;
  /// Fraction of seeds whose own values increase strictly across N.
  double per_seed_fraction;
};

/// `values[s][k]` is the statistic of seed s at the k-th size. Seeds are
/// resampled with replacement, keeping each seed's values across sizes together.
PairedBootstrap paired_median_trend(const std::vector<std::vector<double>>& values, int resamples,
                                    std::uint64_t seed);

}  // namespace pspin
