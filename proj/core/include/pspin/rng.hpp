#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace pspin {

/// Stateless 64-bit mixing function (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream key from a root seed and a list of tags.
/// The result depends only on the values, never on call order or threads.
std::uint64_t derive_stream(std::uint64_t root, std::initializer_list<std::uint64_t> tags) noexcept;

/// Tags separating the random streams used by different parts of the library.
enum class Purpose : std::uint64_t {
  disorder = 0x11,
  topup = 0x12,
  restart = 0x13,
  chain = 0x14,
  exchange = 0x15,
  sphere = 0x16,
  injective = 0x17,
  parisi = 0x18,
  audit = 0x19,
  experiment = 0x1a,
};

constexpr std::uint64_t tag(Purpose p) noexcept { return static_cast<std::uint64_t>(p); }

/// Counter-based generator: the k-th output of stream `key` is mix64(key + k*phi).
/// Satisfies UniformRandomBitGenerator, so it plugs into <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    counter_ += 1;
    return mix64(key_ + counter_ * kGolden);
  }

  /// Uniform double in the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pspin
