#pragma once

#include <array>
#include <cstdint>

#include "mvbismut/measure.hpp"

namespace mvb {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox-4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Counter-based Gaussian source. Every draw is a pure function of
/// (seed, stream, replication, particle, step, axis), so results do not depend
/// on scheduling or on how many workers share the work.
class RngSpec {
 public:
  /// Step index reserved for initial-condition sampling.
  static constexpr std::uint32_t kInitialStep = 0xFFFFFFFFu;

  explicit RngSpec(std::uint64_t seed, std::uint16_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint16_t stream() const noexcept { return stream_; }
  RngSpec with_stream(std::uint16_t stream) const noexcept { return RngSpec(seed_, stream); }

  /// Fills `out` with iid N(0,1) values (Box-Muller on the counter stream).
  void gaussians(std::uint32_t replication, std::uint32_t particle, std::uint32_t step,
                 MutVec out) const noexcept;
  /// Fills `out` with iid uniforms on the open interval (0, 1).
  void uniforms(std::uint32_t replication, std::uint32_t particle, std::uint32_t step,
                MutVec out) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint16_t stream_;
};

}  // namespace mvb
