#pragma once

#include <cstdint>
#include <vector>

#include "pspin/symmetric_tensor.hpp"

namespace pspin {

struct InjectiveNormResult {
  /// max over unit x_1..x_p of <T, x_1 (x) ... (x) x_p>.
  double value = 0.0;
  std::vector<std::vector<double>> witness;
  /// max over unit x of |<T, x^{(x)p}>|.
  double diagonal_value = 0.0;
  std::vector<double> diagonal_witness;
  /// False when some restart hit the iteration cap before the tolerance.
  bool converged = true;
};

/// Best of `restarts` alternating maximizations on the dense expansion of T
/// (requires N^p <= 2^24). The diagonal value comes from shifted symmetric
/// power iterations run on both T and -T.
InjectiveNormResult injective_norm(const SymmetricTensor& t, int restarts, std::uint64_t seed, double tol = 1e-13,
                                   int max_iters = 200000);

}  // namespace pspin
