#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pspin/disorder.hpp"
#include "pspin/domain.hpp"
#include "pspin/mixture.hpp"
#include "pspin/symmetric_tensor.hpp"

namespace pspin {

/// Truncation levels. `levels` dyadic scales connect M to eta*sqrt(N), with
/// eta moved to the nearest level so that M * 2^levels == eta * sqrt(N).
struct TruncationParams {
  int n = 0;
  double M = 0.0;
  double M1 = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  int levels = 1;

  /// Validates N^{-1/4} <= eta <= delta <= 1 <= M, M1 <= N^{1/4} and adjusts eta.
  static TruncationParams make(int n, double M, double M1, double eta, double delta);

  /// M = M1 = N^{1/(4P)}, eta = N^{-1/(4P)}, delta = N^{-eps/(4P)}.
  static TruncationParams defaults(int n, int max_order, double eps = 0.5);

  /// delta = 1/log N and M1 = log N, clamped into the admissible ordering.
  static TruncationParams bai_yin(int n, int max_order);

  double sqrt_n() const;
  double small_threshold(int p) const { return (p == 1 ? M1 : M) / 2.0; }
  /// Range of |J| picked out by scale piece j (0 <= j <= levels).
  AbsRange scale_range(int j) const;
  AbsRange small_range(int p) const;
  AbsRange large_range() const;
  AbsRange tail_range(int p) const;
};

/// Population constants E[J 1{|J| in range}] for one multiplicity class.
struct RecenterConstants {
  std::uint64_t multiplicity = 1;
  double small = 0.0;
  std::vector<double> scale;
  double large = 0.0;
  double tail = 0.0;
};

struct TruncationDecomposition {
  SymmetricTensor small;
  std::vector<SymmetricTensor> scale;
  SymmetricTensor large;
  SymmetricTensor tail;
  std::vector<RecenterConstants> recenter;
  TruncationParams params;

  SymmetricTensor reconstruct() const;
};

/// Splits J into small / scale(j) / large / tail pieces, each recentered by its
/// population mean under `spec`. For p = 1 only small and tail are non-zero.
TruncationDecomposition truncate(const SymmetricTensor& J, const TruncationParams& params, const DisorderSpec& spec);

/// Analytic second-moment profile of the small piece for one multiplicity class.
struct SmallPieceVariance {
  std::uint64_t multiplicity = 1;
  double target = 0.0;          // |{i}|!/p!
  double variance = 0.0;        // Var(J^small)
  double delta_tilde = 0.0;     // lower sandwich bound is target * (1 - delta_tilde)
  double topup_constant = 0.0;  // c with variance + c^2 == target
};

std::vector<SmallPieceVariance> small_piece_variances(int p, const DisorderSpec& spec, const TruncationParams& params);

/// J^mod = J^small + c R with independent Rademacher R, c per multiplicity class.
SymmetricTensor variance_topup(const SymmetricTensor& small, const DisorderSpec& spec, const TruncationParams& params,
                               std::uint64_t seed);

struct ProbeResult {
  SpinConfiguration sigma;
  double value_per_site;
  std::vector<int> support;
  double entry;
};

/// Localized configuration built on the largest admissible entry with
/// |J| >= threshold: magnitude sqrt(N/j) on its j distinct indices, signed so the
/// entry contributes positively. Returns nullopt when no entry qualifies.
std::optional<ProbeResult> localized_probe(const SymmetricTensor& J, const MixtureSpec& mix, double threshold);

}  // namespace pspin
