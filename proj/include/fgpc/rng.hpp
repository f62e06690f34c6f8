#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace fgpc {

/// Standard-normal quantile (inverse CDF), Wichura's AS 241 (PPND16).
/// Accurate to ~1e-16 relative; p must lie in (0, 1).
double normal_quantile(double p);

/// Derive an independent sub-seed for stream `stream` from a base seed
/// (splitmix64 finalizer). Frozen so serialized runs reproduce.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded, platform-independent random source.
///
/// Engine is std::mt19937_64 (bit-exact by the standard). Uniforms take the
/// top 53 bits; normals go through normal_quantile. Both transforms are
/// frozen: the same seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via inverse CDF.
  double normal() { return normal_quantile(uniform()); }

  /// Unbiased integer in [0, n) by masked rejection.
  std::uint64_t bounded(std::uint64_t n);

  /// k distinct indices drawn from [0, n), returned in ascending order.
  std::vector<Eigen::Index> sample_without_replacement(Eigen::Index n,
                                                       Eigen::Index k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fgpc
