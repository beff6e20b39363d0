#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mvbismut/rng.hpp"

using namespace mvb;

// Known-answer vectors of the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter expected = {0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u};
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), expected);
}

TEST(Philox, KnownAnswerAllOnes) {
  const PhiloxCounter expected = {0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu};
  EXPECT_EQ(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          {0xffffffffu, 0xffffffffu}),
            expected);
}

TEST(Philox, KnownAnswerPiDigits) {
  const PhiloxCounter expected = {0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u};
  EXPECT_EQ(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          {0xa4093822u, 0x299f31d0u}),
            expected);
}

TEST(RngSpec, PureFunctionOfCoordinates) {
  const RngSpec rng(123);
  std::vector<double> a(5), b(5), c(5);
  rng.gaussians(3, 7, 11, a);
  rng.gaussians(3, 7, 11, b);
  EXPECT_EQ(a, b);
  rng.gaussians(3, 7, 12, c);
  EXPECT_NE(a, c);
  rng.with_stream(1).gaussians(3, 7, 11, c);
  EXPECT_NE(a, c);
  RngSpec(124).gaussians(3, 7, 11, c);
  EXPECT_NE(a, c);
}

TEST(RngSpec, GaussianMoments) {
  const RngSpec rng(99);
  const std::size_t n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  std::vector<double> z(4);
  for (std::uint32_t i = 0; i < n / 4; ++i) {
    rng.gaussians(0, i, 0, z);
    for (double v : z) {
      s1 += v;
      s2 += v * v;
      s4 += v * v * v * v;
    }
  }
  EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(double(n)));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(RngSpec, UniformsInOpenInterval) {
  const RngSpec rng(5);
  std::vector<double> u(7);
  double sum = 0.0;
  const std::size_t rows = 20000;
  for (std::uint32_t i = 0; i < rows; ++i) {
    rng.uniforms(1, i, RngSpec::kInitialStep, u);
    for (double v : u) {
      ASSERT_GT(v, 0.0);
      ASSERT_LT(v, 1.0);
      sum += v;
    }
  }
  const double n = rows * 7.0;
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngSpec, LongRowsDoNotRepeat) {
  const RngSpec rng(1);
  std::vector<double> z(64);
  rng.gaussians(0, 0, 0, z);
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) EXPECT_NE(z[i], z[j]);
}
