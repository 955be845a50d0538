#include "pspin/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "pspin/errors.hpp"

namespace pspin {
namespace {

constexpr char kMagic[8] = {'P', 'S', 'P', 'I', 'N', 'T', 'E', 'N'};

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <class T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError("truncated tensor file " + path.string());
  return to_little(v);
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto s = path;
  s += ".json";
  return s;
}

void write_tensor(const std::filesystem::path& path, const SymmetricTensor& t, const TensorFileHeader& header) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kTensorFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t.order()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(t.dim()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(header.distribution.size()));
  os.write(header.distribution.data(), static_cast<std::streamsize>(header.distribution.size()));
  put<std::uint64_t>(os, header.seed);
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(t.entries().data()),
             static_cast<std::streamsize>(t.entries().size() * sizeof(double)));
  } else {
    for (double v : t.entries()) put<double>(os, v);
  }
  if (!os) throw ConfigError("failed writing " + path.string());

  double sum_sq = 0.0;
  for (double v : t.entries()) sum_sq += v * v;
  nlohmann::json meta = {
      {"format", "pspin-tensor"},
      {"version", kTensorFormatVersion},
      {"p", t.order()},
      {"N", t.dim()},
      {"distribution", header.distribution},
      {"seed", header.seed},
      {"entries", t.size()},
      {"ordering", "canonical non-decreasing, colex rank"},
      {"byte_order", "little-endian float64"},
      {"sup_norm", t.sup_norm()},
      {"canonical_rms", std::sqrt(sum_sq / static_cast<double>(t.size()))},
  };
  std::ofstream js(sidecar_path(path), std::ios::trunc);
  if (!js) throw ConfigError("cannot write sidecar for " + path.string());
  js << meta.dump(2) << '\n';
}

LoadedTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ConfigError(path.string() + " is not a pspin tensor file");
  }
  const auto version = get<std::uint32_t>(is, path);
  if (version != kTensorFormatVersion) {
    throw ConfigError("unsupported tensor file version " + std::to_string(version));
  }
  const auto p = static_cast<int>(get<std::uint32_t>(is, path));
  const auto n = static_cast<int>(get<std::uint32_t>(is, path));
  const auto len = get<std::uint32_t>(is, path);
  if (len > 4096) throw ConfigError("corrupt distribution tag in " + path.string());
  TensorFileHeader header;
  header.distribution.resize(len);
  if (len > 0 && !is.read(header.distribution.data(), len)) throw ConfigError("truncated tensor file " + path.string());
  header.seed = get<std::uint64_t>(is, path);

  SymmetricTensor t(p, n);
  auto e = t.entries();
  if constexpr (std::endian::native == std::endian::little) {
    const auto bytes = static_cast<std::streamsize>(e.size() * sizeof(double));
    if (!is.read(reinterpret_cast<char*>(e.data()), bytes)) throw ConfigError("truncated tensor file " + path.string());
  } else {
    for (auto& v : e) v = get<double>(is, path);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw ConfigError("trailing bytes in " + path.string());
  return {std::move(t), std::move(header)};
}

}  // namespace pspin
