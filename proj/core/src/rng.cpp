#include "mvbismut/rng.hpp"

#include <cmath>
#include <numbers>

namespace mvb {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

void RngSpec::uniforms(std::uint32_t replication, std::uint32_t particle, std::uint32_t step,
                       MutVec out) const noexcept {
  const PhiloxKey key = {static_cast<std::uint32_t>(seed_),
                         static_cast<std::uint32_t>(seed_ >> 32)};
  for (std::size_t block = 0; 2 * block < out.size(); ++block) {
    const PhiloxCounter ctr = {step, particle, replication,
                               (static_cast<std::uint32_t>(stream_) << 16) |
                                   static_cast<std::uint32_t>(block)};
    const auto r = philox4x32_10(ctr, key);
    out[2 * block] = to_open_unit(r[0], r[1]);
    if (2 * block + 1 < out.size()) out[2 * block + 1] = to_open_unit(r[2], r[3]);
  }
}

void RngSpec::gaussians(std::uint32_t replication, std::uint32_t particle, std::uint32_t step,
                        MutVec out) const noexcept {
  const PhiloxKey key = {static_cast<std::uint32_t>(seed_),
                         static_cast<std::uint32_t>(seed_ >> 32)};
  for (std::size_t block = 0; 2 * block < out.size(); ++block) {
    const PhiloxCounter ctr = {step, particle, replication,
                               (static_cast<std::uint32_t>(stream_) << 16) |
                                   static_cast<std::uint32_t>(block)};
    const auto r = philox4x32_10(ctr, key);
    const double u1 = to_open_unit(r[0], r[1]);
    const double u2 = to_open_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * block] = radius * std::cos(angle);
    if (2 * block + 1 < out.size()) out[2 * block + 1] = radius * std::sin(angle);
  }
}

}  // namespace mvb
