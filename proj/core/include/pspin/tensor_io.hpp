#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pspin/symmetric_tensor.hpp"

namespace pspin {

/// On-disk layout (all integers little-endian):
///   8 bytes  magic "PSPINTEN"
///   u32      version (1)
///   u32      p
///   u32      N
///   u32      byte length L of the distribution tag, then L bytes of UTF-8
///   u64      seed
///   f64 x C(N+p-1, p)  canonical entries in colex rank order
/// A sidecar `<path>.json` repeats the header fields plus summary statistics.
struct TensorFileHeader {
  std::string distribution;
  std::uint64_t seed = 0;
};

struct LoadedTensor {
  SymmetricTensor tensor;
  TensorFileHeader header;
};

inline constexpr std::uint32_t kTensorFormatVersion = 1;

void write_tensor(const std::filesystem::path& path, const SymmetricTensor& t, const TensorFileHeader& header);
LoadedTensor read_tensor(const std::filesystem::path& path);
std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace pspin
