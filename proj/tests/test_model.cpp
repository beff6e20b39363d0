#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "mvbismut/errors.hpp"
#include "mvbismut/model.hpp"
#include "mvbismut/models.hpp"
#include "mvbismut/mollifier.hpp"
#include "mvbismut/registry.hpp"

using namespace mvb;

namespace {

CylindricalDriftSpec cylindrical_spec(std::size_t d, double delta) {
  CylindricalDriftSpec spec;
  spec.dim = d;
  spec.mollify_radius = delta;
  spec.features = {feature_by_name("sin", 0, d)};
  if (d > 1) spec.features.push_back(feature_by_name("gaussian", 1, d));
  spec.confinement = -0.5;
  return spec;
}

std::vector<CoefficientSet> smooth_models() {
  return {linear_mf_ou({-1.0, 0.5, 0.2}, 2), double_well_mf({0.5, 0.5}, 2),
          build_cylindrical(cylindrical_spec(2, 0.0))};
}

EmpiricalMeasure random_cloud(std::mt19937_64& gen, std::size_t n, std::size_t d) {
  std::normal_distribution<double> normal;
  std::vector<double> atoms(n * d);
  for (auto& v : atoms) v = normal(gen);
  return EmpiricalMeasure(d, atoms);
}

}  // namespace

TEST(LinearModel, DriftAndKernel) {
  const auto c = linear_mf_ou({-1.0, 0.5, 0.2});
  const EmpiricalMeasure mu(1, {1.0, 3.0});
  const std::vector<double> x{2.0};
  EXPECT_DOUBLE_EQ(eval_drift(c, 0.0, x, mu)[0], -1.0 * 2.0 + 0.5 * 2.0);
  EXPECT_DOUBLE_EQ(eval_lions_kernel(c, 0.0, x, mu, x)[0], 0.5);
  EXPECT_TRUE(c.affine);
  EXPECT_TRUE(c.measure_dependent);
  EXPECT_FALSE(linear_mf_ou({-1.0, 0.0, 0.2}).measure_dependent);
}

TEST(DoubleWellModel, Drift) {
  const auto c = double_well_mf({0.5, 0.5});
  const EmpiricalMeasure mu(1, {0.0, 2.0});
  const std::vector<double> x{2.0};
  EXPECT_DOUBLE_EQ(eval_drift(c, 0.0, x, mu)[0], 2.0 - 8.0 + 0.5 * (1.0 - 2.0));
  EXPECT_FALSE(c.affine);
}

TEST(CylindricalModel, DriftValue) {
  CylindricalDriftSpec spec;
  spec.features = {feature_by_name("sin", 0, 1)};
  const auto c = build_cylindrical(spec);
  const EmpiricalMeasure mu(1, {0.5, 1.5});
  const std::vector<double> x{-2.0};
  const double z = 0.5 * (std::sin(0.5) + std::sin(1.5));
  EXPECT_NEAR(eval_drift(c, 0.0, x, mu)[0], std::tanh(std::pow(2.0, 0.3) + z), 1e-15);
}

TEST(CylindricalModel, RejectsAlphaOutsideRange) {
  CylindricalDriftSpec spec;
  spec.alpha = 0.5;
  EXPECT_THROW(build_cylindrical(spec), ArgumentError);
  spec.alpha = 0.0;
  EXPECT_THROW(build_cylindrical(spec), ArgumentError);
}

TEST(Models, DriftGradientMatchesFiniteDifference) {
  std::mt19937_64 gen(11);
  for (const auto& c : smooth_models()) {
    const auto mu = random_cloud(gen, 16, c.dim);
    const auto snap = c.snapshot(0.3, mu);
    const std::vector<double> x{0.7, -1.1};
    std::vector<double> grad(4);
    c.drift_grad_x(0.3, x, snap, grad);
    const double h = 1e-6;
    for (std::size_t col = 0; col < 2; ++col) {
      auto xp = x, xm = x;
      xp[col] += h;
      xm[col] -= h;
      const auto fp = eval_drift(c, 0.3, xp, mu), fm = eval_drift(c, 0.3, xm, mu);
      for (std::size_t row = 0; row < 2; ++row)
        EXPECT_NEAR(grad[row * 2 + col], (fp[row] - fm[row]) / (2 * h), 1e-7) << c.id;
    }
  }
}

TEST(Models, LionsKernelMatchesAtomPerturbation) {
  // Moving atom j by h changes b(x, mu_N) by (h/N) D^L b(x, mu)(y_j) to first order.
  std::mt19937_64 gen(12);
  for (const auto& c : smooth_models()) {
    const std::size_t n = 8, d = c.dim;
    const auto mu = random_cloud(gen, n, d);
    const std::vector<double> x{0.4, 0.9};
    const std::size_t j = 3;
    const auto kernel = eval_lions_kernel(c, 0.0, x, mu, mu.atom(j));
    const double h = 1e-6;
    for (std::size_t col = 0; col < d; ++col) {
      std::vector<double> ap(mu.atoms().begin(), mu.atoms().end()), am = ap;
      ap[j * d + col] += h;
      am[j * d + col] -= h;
      const auto fp = eval_drift(c, 0.0, x, EmpiricalMeasure(d, ap));
      const auto fm = eval_drift(c, 0.0, x, EmpiricalMeasure(d, am));
      for (std::size_t row = 0; row < d; ++row)
        EXPECT_NEAR(kernel[row * d + col], n * (fp[row] - fm[row]) / (2 * h), 1e-6) << c.id;
    }
  }
}

TEST(Models, SeparableKernelReassemblesGenericKernel) {
  std::mt19937_64 gen(13);
  for (const auto& c : smooth_models()) {
    ASSERT_TRUE(c.lions_kernel_separable.has_value()) << c.id;
    const auto mu = random_cloud(gen, 10, c.dim);
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const auto a = eval_lions_kernel(c, 0.2, mu.atom(i), mu, mu.atom((i + 1) % mu.size()));
      const auto b = eval_separable_kernel(c, 0.2, mu.atom(i), mu, mu.atom((i + 1) % mu.size()));
      for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-14) << c.id;
    }
  }
}

TEST(Models, ConstantDiffusionInverse) {
  const auto c = double_well_mf({0.5, 0.25}, 2);
  std::vector<double> s(4), inv(4), grad(8, 1.0);
  const std::vector<double> x{1.0, 2.0};
  c.diffusion(0.0, x, s);
  c.diffusion_inverse(0.0, x, inv);
  c.diffusion_grad(0.0, x, grad);
  EXPECT_DOUBLE_EQ(s[0] * inv[0], 1.0);
  EXPECT_DOUBLE_EQ(s[1], 0.0);
  EXPECT_DOUBLE_EQ(inv[3], 4.0);
  for (double g : grad) EXPECT_EQ(g, 0.0);
  EXPECT_TRUE(c.constant_diffusion);
}

TEST(Models, NonFiniteDriftRaisesModelError) {
  const auto c = double_well_mf({0.5, 0.5});
  const EmpiricalMeasure mu(1, {0.0});
  const std::vector<double> x{1e200};
  EXPECT_THROW(eval_drift(c, 0.0, x, mu), ModelEvaluationError);
}

TEST(GaussLegendre, ExactForPolynomials) {
  std::vector<double> nodes, weights;
  gauss_legendre(2, nodes, weights);
  EXPECT_NEAR(nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(weights[1], 1.0, 1e-15);
  gauss_legendre(7, nodes, weights);
  for (int p = 0; p <= 13; ++p) {
    double sum = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) sum += weights[q] * std::pow(nodes[q], p);
    const double exact = p % 2 == 1 ? 0.0 : 2.0 / (p + 1);
    EXPECT_NEAR(sum, exact, 1e-14) << "degree " << p;
  }
}

TEST(BumpStencil, WeightsReproduceConstantsAndLinearGradients) {
  for (std::size_t d : {1u, 2u}) {
    const BumpStencil st(d);
    double total = 0.0;
    std::vector<double> grad_of_linear(d * d, 0.0);
    for (std::size_t q = 0; q < st.size(); ++q) {
      total += st.value_weight(q);
      // h(x - u) for h(y) = y_l at x = 0 is -u_l.
      for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l)
          grad_of_linear[k * d + l] += st.grad_weight(q, k) * -st.node(q)[l];
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t l = 0; l < d; ++l)
        EXPECT_NEAR(grad_of_linear[k * d + l], k == l ? 1.0 : 0.0, 1e-12) << d;
  }
  EXPECT_THROW(BumpStencil(3), ArgumentError);
}

namespace {

// Independent oracle: midpoint rule on (-1, 1) with the unnormalised bump.
double midpoint_mollified(const std::function<double(double)>& h, double x0, double delta) {
  const std::size_t n = 400000;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = -1.0 + (i + 0.5) * 2.0 / n;
    const double w = bump(&u, 1);
    num += w * h(x0 - delta * u);
    den += w;
  }
  return num / den;
}

}  // namespace

TEST(Mollifier, RadialValueAwayFromKink) {
  const double alpha = 0.3, delta = 1e-3;
  auto h = [=](double y) { return std::pow(std::abs(y), alpha); };
  for (double x0 : {1.5e-3, -2e-3, 1e-2, 0.5}) {
    const double exact = midpoint_mollified(h, x0, delta);
    EXPECT_NEAR(mollified_radial(std::vector<double>{x0}, alpha, delta), exact, 1e-8 * exact)
        << x0;
  }
}

TEST(Mollifier, RadialValueNearKink) {
  const double alpha = 0.3, delta = 1e-3;
  auto h = [=](double y) { return std::pow(std::abs(y), alpha); };
  for (double x0 : {0.0, 0.3e-3, -0.7e-3}) {
    const double exact = midpoint_mollified(h, x0, delta);
    EXPECT_NEAR(mollified_radial(std::vector<double>{x0}, alpha, delta), exact, 0.05 * exact)
        << x0;
  }
}

TEST(Mollifier, RadialGradientAwayFromKink) {
  const double alpha = 0.3, delta = 1e-3;
  const double h = 1e-8;
  for (double x0 : {2e-3, -4e-3, 0.03}) {
    std::vector<double> g(1);
    mollified_radial_grad(std::vector<double>{x0}, alpha, delta, g);
    const double fd = (mollified_radial(std::vector<double>{x0 + h}, alpha, delta) -
                       mollified_radial(std::vector<double>{x0 - h}, alpha, delta)) /
                      (2 * h);
    EXPECT_NEAR(g[0], fd, 1e-6 * std::abs(fd)) << x0;
  }
  // The 2D tensor rule on the disk is accurate to about 1e-5 relative.
  for (const auto& x : {std::vector<double>{2e-3, 0.5e-3}, std::vector<double>{-5e-3, 4e-3},
                        std::vector<double>{0.03, 0.0}}) {
    std::vector<double> g(2);
    mollified_radial_grad(x, alpha, delta, g);
    for (std::size_t k = 0; k < 2; ++k) {
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd =
          (mollified_radial(xp, alpha, delta) - mollified_radial(xm, alpha, delta)) / (2 * h);
      EXPECT_NEAR(g[k], fd, 5e-5 * std::abs(fd) + 1e-6) << x[0] << "," << x[1];
    }
  }
}

TEST(Mollifier, RadialGradientNearKink) {
  // Oracle: the convolution of the a.e. derivative alpha |y|^(alpha-1) sign(y).
  const double alpha = 0.3, delta = 1e-3;
  auto dh = [=](double y) {
    return y == 0.0 ? 0.0 : alpha * std::pow(std::abs(y), alpha - 1.0) * (y > 0 ? 1.0 : -1.0);
  };
  for (double x0 : {0.4e-3, -0.8e-3}) {
    const double exact = midpoint_mollified(dh, x0, delta);
    std::vector<double> g(1);
    mollified_radial_grad(std::vector<double>{x0}, alpha, delta, g);
    EXPECT_NEAR(g[0], exact, 0.05 * std::abs(exact)) << x0;
  }
}

TEST(Mollifier, MollifyDriftExamples) {
  auto radial = linear_mf_ou({0.0, 0.0, 1.0});
  radial.drift_singular = [](double, ConstVec x, const MeasureSnapshot&, MutVec out) {
    out[0] = std::pow(std::abs(x[0]), 0.3);
  };
  radial.regular_grad_x = [](double, ConstVec, const MeasureSnapshot&, MutVec out) {
    out[0] = 0.0;
  };
  const EmpiricalMeasure mu(1, {0.0});
  const double delta = 1e-3;
  const double at_zero = eval_drift(mollify_drift(radial, delta), 0.0, std::vector{0.0}, mu)[0];
  EXPECT_GT(at_zero, 0.0);
  EXPECT_LE(at_zero, std::pow(delta, 0.3));
  const double e1 =
      std::abs(eval_drift(mollify_drift(radial, delta), 0.0, std::vector{1.0}, mu)[0] - 1.0);
  const double e2 =
      std::abs(eval_drift(mollify_drift(radial, delta / 2), 0.0, std::vector{1.0}, mu)[0] - 1.0);
  EXPECT_LT(e2, e1);
  EXPECT_LT(e1, 1e-6);

  auto smooth = radial;
  smooth.drift_singular = [](double, ConstVec x, const MeasureSnapshot&, MutVec out) {
    out[0] = 0.7 * x[0] - 0.2;
  };
  const auto m = mollify_drift(smooth, delta);
  for (double x : {-3.0, -0.1, 0.0, 0.4, 2.5})
    EXPECT_NEAR(eval_drift(m, 0.0, std::vector{x}, mu)[0], 0.7 * x - 0.2, 1e-5);
}

TEST(Mollifier, FarFieldAgreesWithExactGradient) {
  const double alpha = 0.3, delta = 1e-3, r = kMollifierFarField * delta;
  const std::vector<double> x{r};
  std::vector<double> g(1);
  mollified_radial_grad(x, alpha, delta, g);
  const double exact = alpha * std::pow(r, alpha - 1.0);
  EXPECT_NEAR(g[0], exact, 1e-5 * exact);
}

TEST(Mollifier, MollifyDriftKeepsAffineDrift) {
  CoefficientSet c = linear_mf_ou({0.0, 0.0, 1.0});
  c.drift_singular = [](double, ConstVec x, const MeasureSnapshot&, MutVec out) {
    out[0] = 2.0 * x[0] + 1.0;
  };
  c.regular_grad_x = [](double, ConstVec, const MeasureSnapshot&, MutVec out) { out[0] = 0.0; };
  const auto m = mollify_drift(c, 0.1);
  const EmpiricalMeasure mu(1, {0.0});
  const std::vector<double> x{0.37};
  EXPECT_NEAR(eval_drift(m, 0.0, x, mu)[0], 2.0 * 0.37 + 1.0, 1e-12);
  std::vector<double> g(1);
  m.drift_grad_x(0.0, x, m.snapshot(0.0, mu), g);
  EXPECT_NEAR(g[0], 2.0, 1e-12);
  EXPECT_THROW(mollify_drift(c, 0.0), ArgumentError);
}

TEST(Registry, BuildsEveryModelWithDefaults) {
  for (const auto& id : model_names()) {
    const auto c = make_model(id, nlohmann::json::object());
    EXPECT_EQ(c.id, id);
    EXPECT_EQ(c.dim, 1u);
  }
}

TEST(Registry, ErrorsNameTheField) {
  try {
    make_model("nope", nlohmann::json::object());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "model.id");
  }
  try {
    make_model("linear_mf_ou", {{"b", 1.0}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "model.params.b");
  }
  try {
    make_model("cylindrical_dini", {{"alpha", 0.7}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "model.params.alpha");
  }
}
