#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace theo {

/// Identifier stored in run metadata. Uniforms take the top 53 bits of a
/// std::mt19937_64 draw; normals use the Box-Muller transform with the
/// second variate of each pair cached for the next call.
inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64/top53-uniform/box-muller-cached";

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// master seed so that data and noise streams never share state.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix_seed(mix_seed(master) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded generator with portable uniform and standard-normal conversions.
/// std::mt19937_64 output is fixed by the standard; the conversions here are
/// ours, so sequences are identical across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n) by rejection (unbiased).
  std::uint64_t below(std::uint64_t n);

  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

/// Source of the Langevin noise xi_n. A disabled source (infinite inverse
/// temperature) never advances its generator.
using NoiseSource = RandomStream;

}  // namespace theo
