#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace warmlab {

/// Counter-based pseudorandom generator (SplitMix64). Output i is a pure
/// function of (key, i), so a stream can be reproduced in any language from
/// the documented recipe:
///
///   z = key + (i + 1) * 0x9E3779B97F4A7C15
///   z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
///   z ^= z >> 27;  z *= 0x94D049BB133111EB
///   z ^= z >> 31
///
/// with all arithmetic modulo 2^64. Uniform doubles in [0,1) take the top
/// 53 bits: (z >> 11) * 2^-53. Standard normals are produced by the
/// Box-Muller transform on two consecutive uniforms, z = r*cos(theta) with
/// r = sqrt(-2 ln(1-u1)), theta = 2*pi*u2.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * UINT64_C(0x9E3779B97F4A7C15);
    z ^= z >> 30;
    z *= UINT64_C(0xBF58476D1CE4E5B9);
    z ^= z >> 27;
    z *= UINT64_C(0x94D049BB133111EB);
    z ^= z >> 31;
    return z;
  }

  /// Uniform on [0,1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_gaussian() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform direction on the unit sphere in `dim` dimensions: `dim`
  /// gaussians, normalized. Degenerate draws (norm under 1e-300) are
  /// redrawn.
  std::vector<double> next_unit_sphere(std::size_t dim) {
    std::vector<double> v(dim);
    while (true) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        v[i] = next_gaussian();
        s += v[i] * v[i];
      }
      const double n = std::sqrt(s);
      if (n > 1e-300) {
        for (double& x : v) x /= n;
        return v;
      }
    }
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer, used to derive stream keys from seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += UINT64_C(0x9E3779B97F4A7C15);
  z ^= z >> 30;
  z *= UINT64_C(0xBF58476D1CE4E5B9);
  z ^= z >> 27;
  z *= UINT64_C(0x94D049BB133111EB);
  z ^= z >> 31;
  return z;
}

}  // namespace warmlab
