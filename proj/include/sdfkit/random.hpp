#pragma once

#include <array>
#include <cstdint>

namespace sdfkit {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11, as in Random123).
/// Output is a pure function of (key, counter), which is what makes
/// per-path streams reproducible regardless of how paths are scheduled.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Standard normal variates for one (seed, stream) pair.
///
/// Block b of stream s is philox(counter = {b_lo, b_hi, s_lo, s_hi},
/// key = {seed_lo, seed_hi}). Each 64-bit half of a block gives a uniform
/// u = (bits >> 11) * 2^-53 + 2^-54 in (0, 1), mapped through the inverse
/// normal CDF z = -sqrt(2) erfc^-1(2u).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);

  double next_uniform();
  double next();

 private:
  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 2;  // 64-bit words consumed from buffer_
};

double normal_quantile(double u);

}  // namespace sdfkit
