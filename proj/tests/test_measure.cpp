#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "mvbismut/errors.hpp"
#include "mvbismut/measure.hpp"

using namespace mvb;

TEST(EmpiricalMeasure, RejectsMalformedAtoms) {
  EXPECT_THROW(EmpiricalMeasure(1, {}), ArgumentError);
  EXPECT_THROW(EmpiricalMeasure(2, {1.0, 2.0, 3.0}), ArgumentError);
  EXPECT_THROW(EmpiricalMeasure(1, {1.0, std::nan("")}), ArgumentError);
  EXPECT_THROW(EmpiricalMeasure(1, {INFINITY}), ArgumentError);
}

TEST(EmpiricalMeasure, AtomsAndSize) {
  EmpiricalMeasure mu(2, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(mu.size(), 3u);
  EXPECT_EQ(mu.dim(), 2u);
  EXPECT_DOUBLE_EQ(mu.atom(1)[0], 3.0);
  EXPECT_DOUBLE_EQ(mu.atom(2)[1], 6.0);
  EXPECT_EQ(EmpiricalMeasure::dirac({0.5, 1.5}).size(), 1u);
}

TEST(Integrate, MeanOfIdentity) {
  EmpiricalMeasure mu(1, {1.0, 2.0, 6.0});
  EXPECT_DOUBLE_EQ(integrate(mu, ScalarField([](ConstVec x) { return x[0]; })), 3.0);
  const auto v = integrate(mu, VectorField([](ConstVec x, MutVec out) {
                             out[0] = x[0];
                             out[1] = x[0] * x[0];
                           }),
                           2);
  EXPECT_DOUBLE_EQ(v[0], 3.0);
  EXPECT_DOUBLE_EQ(v[1], 41.0 / 3.0);
}

TEST(Integrate, NonFiniteValueReportsAtom) {
  EmpiricalMeasure mu(1, {1.0, 0.0, 2.0});
  try {
    integrate(mu, ScalarField([](ConstVec x) { return 1.0 / x[0]; }));
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
}

TEST(ShiftPushforward, MovesEveryAtom) {
  EmpiricalMeasure mu(1, {0.0, 1.0});
  const auto shifted = shift_pushforward(mu, constant_perturbation({2.0}), 0.25);
  EXPECT_DOUBLE_EQ(shifted.atom(0)[0], 0.5);
  EXPECT_DOUBLE_EQ(shifted.atom(1)[0], 1.5);
  EXPECT_EQ(shift_pushforward(mu, zero_perturbation(1), 3.0), mu);
}

TEST(L2Norm, ConstantAndLinear) {
  EmpiricalMeasure mu(2, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(l2_norm(constant_perturbation({3.0, 4.0}), mu), 5.0);
  Perturbation id{[](ConstVec x, MutVec out) { std::copy(x.begin(), x.end(), out.begin()); }, ""};
  EXPECT_DOUBLE_EQ(l2_norm(id, mu), 1.0);
}

TEST(Wasserstein2, DiracDistance) {
  EXPECT_DOUBLE_EQ(wasserstein2(EmpiricalMeasure::dirac({0.0}), EmpiricalMeasure::dirac({0.5})),
                   0.5);
  EXPECT_DOUBLE_EQ(
      wasserstein2(EmpiricalMeasure::dirac({0.0, 0.0}), EmpiricalMeasure::dirac({3.0, 4.0})), 5.0);
}

TEST(Wasserstein2, TranslationInOneDimension) {
  EmpiricalMeasure mu(1, {0.0, 3.0, 1.0, 7.0});
  EXPECT_NEAR(wasserstein2(mu, shift_pushforward(mu, constant_perturbation({0.7}), 1.0)), 0.7,
              1e-14);
  EXPECT_DOUBLE_EQ(wasserstein2(mu, mu), 0.0);
}

TEST(Wasserstein2, UnequalSizesInOneDimension) {
  // mu uniform on {0, 1}, nu = delta_{0.5}: W2^2 = 0.25.
  EXPECT_NEAR(wasserstein2(EmpiricalMeasure(1, {0.0, 1.0}), EmpiricalMeasure::dirac({0.5})), 0.5,
              1e-15);
  // mu = {0, 1}, nu = {0, 0.5, 1}: quantile coupling gives W2^2 = 1/12.
  EXPECT_NEAR(wasserstein2(EmpiricalMeasure(1, {0.0, 1.0}), EmpiricalMeasure(1, {0.0, 0.5, 1.0})),
              std::sqrt(1.0 / 12.0), 1e-14);
}

TEST(Wasserstein2, HigherDimensionMatchesBruteForce) {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6, d = 2;
    std::vector<double> a(n * d), b(n * d);
    for (auto& v : a) v = normal(gen);
    for (auto& v : b) v = normal(gen) + 1.0;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = INFINITY;
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = a[i * d + k] - b[perm[i] * d + k];
          cost += diff * diff;
        }
      best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_NEAR(wasserstein2(EmpiricalMeasure(d, a), EmpiricalMeasure(d, b)),
                std::sqrt(best / static_cast<double>(n)), 1e-12);
  }
}

TEST(Wasserstein2, RejectsUnsupportedShapes) {
  EXPECT_THROW(wasserstein2(EmpiricalMeasure(2, {0, 0, 1, 1}), EmpiricalMeasure(2, {0, 0})),
               ArgumentError);
  EXPECT_THROW(wasserstein2(EmpiricalMeasure(1, {0}), EmpiricalMeasure(2, {0, 0})), ArgumentError);
  std::vector<double> big((kMaxAssignmentSize + 1) * 2, 0.0);
  EXPECT_THROW(wasserstein2(EmpiricalMeasure(2, big), EmpiricalMeasure(2, big)), ArgumentError);
}

TEST(OptimalAssignment, KnownMatrix) {
  // Rows prefer distinct columns along the anti-diagonal.
  const std::vector<double> cost = {9, 2, 7, 8, 6, 4, 3, 7, 5, 8, 1, 8, 7, 6, 9, 4};
  const auto a = optimal_assignment(cost, 4);
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) total += cost[i * 4 + a[i]];
  EXPECT_DOUBLE_EQ(total, 13.0);
}

TEST(Csv, RoundTrip) {
  EmpiricalMeasure mu(2, {0.1, -2.5, 1e-17, 3.0});
  std::stringstream ss;
  write_csv(ss, mu);
  EXPECT_EQ(ss.str().substr(0, 6), "x0,x1\n");
  EXPECT_EQ(read_csv(ss), mu);
}

TEST(Csv, RejectsRaggedRows) {
  std::stringstream ss("x0,x1\n1,2\n3\n");
  EXPECT_THROW(read_csv(ss), ArgumentError);
}
