#include "pspin/rng.hpp"

namespace pspin {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream(std::uint64_t root, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(root ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t t : tags) {
    h = mix64(h ^ mix64(t + 0xbb67ae8584caa73bULL));
  }
  return h;
}

}  // namespace pspin
