#include "nld/kernel.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nld;

TEST(Profile, PointValues) {
  EXPECT_DOUBLE_EQ(eval_profile(ProfileKind::R, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(eval_profile(ProfileKind::R, 1.2), 0.0);
  EXPECT_NEAR(eval_profile(ProfileKind::Rbar, 0.0), oracle::Rbar(0.0), 1e-13);
  EXPECT_NEAR(eval_profile(ProfileKind::Rbar, 0.0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(eval_profile(ProfileKind::Rbarbar, 0.0), oracle::Rbarbar(0.0), 1e-12);
  EXPECT_NEAR(eval_profile(ProfileKind::Rbarbar, 0.0), 1.0 / 12.0, 1e-15);
  EXPECT_DOUBLE_EQ(eval_profile(ProfileKind::Rbar, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(eval_profile(ProfileKind::Rbarbar, 3.0), 0.0);
}

TEST(Profile, TailsMatchQuadrature) {
  for (double r : {0.05, 0.3, 0.5, 0.77, 0.99}) {
    EXPECT_NEAR(eval_profile(ProfileKind::Rbar, r), oracle::Rbar(r), 1e-13) << r;
    EXPECT_NEAR(eval_profile(ProfileKind::Rbarbar, r), oracle::Rbarbar(r), 1e-12) << r;
  }
}

TEST(Profile, NegativeArgumentThrows) {
  EXPECT_THROW(eval_profile(ProfileKind::R, -1e-3), DomainError);
  EXPECT_THROW(eval_profile(KernelProfile::poly2(), ProfileKind::Rbar, -1.0), DomainError);
}

TEST(Profile, MonotoneAndDominated) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.5);
  for (int k = 0; k < 1000; ++k) {
    double r1 = u(rng), r2 = u(rng);
    if (r1 > r2) std::swap(r1, r2);
    for (auto kind : {ProfileKind::R, ProfileKind::Rbar, ProfileKind::Rbarbar})
      EXPECT_GE(eval_profile(kind, r1), eval_profile(kind, r2));
    EXPECT_LE(eval_profile(ProfileKind::Rbarbar, r1), eval_profile(ProfileKind::Rbar, r1));
  }
}

TEST(Profile, SmoothAtSupportEdge) {
  const double eps = 1e-6;
  const double left = (eval_profile(ProfileKind::R, 1.0) - eval_profile(ProfileKind::R, 1.0 - eps)) / eps;
  const double right = (eval_profile(ProfileKind::R, 1.0 + eps) - eval_profile(ProfileKind::R, 1.0)) / eps;
  EXPECT_NEAR(left, 0.0, 1e-5);
  EXPECT_NEAR(right, 0.0, 1e-12);
  EXPECT_NEAR(eval_profile(ProfileKind::R, 1.0), 0.0, 1e-15);
}

TEST(Profile, Nondegenerate) {
  double lo = 1.0;
  for (int k = 0; k <= 1000; ++k) lo = std::min(lo, eval_profile(ProfileKind::R, 0.5 * k / 1000));
  EXPECT_GE(lo, KernelProfile::poly2().gamma0());
  EXPECT_DOUBLE_EQ(KernelProfile::poly2().gamma0(), 0.25);
}

TEST(Profile, NumericTailsMatchClosedForm) {
  const auto custom = KernelProfile::from_profile("custom", [](double r) { return r < 1 ? (1 - r) * (1 - r) : 0.0; }, 0.25);
  for (double r : {0.0, 0.2, 0.6, 0.95, 1.4}) {
    EXPECT_NEAR(custom(ProfileKind::Rbar, r), eval_profile(ProfileKind::Rbar, r), 1e-12);
    EXPECT_NEAR(custom(ProfileKind::Rbarbar, r), eval_profile(ProfileKind::Rbarbar, r), 1e-12);
  }
  EXPECT_NEAR(normalization_constant(1, custom), 105.0 / 64.0, 1e-10);
}

TEST(Profile, LookupByName) {
  EXPECT_EQ(profile_by_name("poly2").name(), "poly2");
  EXPECT_THROW(profile_by_name("gaussian"), ParameterError);
}

TEST(Normalization, KnownConstants) {
  EXPECT_NEAR(normalization_constant(1, KernelProfile::poly2()), 105.0 / 64.0, 1e-12);
  EXPECT_NEAR(normalization_constant(2, KernelProfile::poly2()), 3.0 / oracle::kPi, 1e-12);
  EXPECT_NEAR(normalization_constant(1, KernelProfile::poly2()), oracle::alpha(1), 1e-12);
  EXPECT_NEAR(normalization_constant(2, KernelProfile::poly2()), oracle::alpha(2), 1e-12);
  EXPECT_NEAR(normalization_constant(1, KernelProfile::poly2(2.0)), 105.0 / 128.0, 1e-12);
}

TEST(Normalization, ZeroProfileIsDegenerate) {
  const auto zero = KernelProfile::from_profile("zero", [](double) { return 0.0; }, 1.0);
  EXPECT_THROW(normalization_constant(1, zero), DegenerateKernelError);
}

TEST(Normalization, SphereMeasure) {
  EXPECT_DOUBLE_EQ(unit_sphere_measure(1), 2.0);
  EXPECT_DOUBLE_EQ(unit_sphere_measure(2), 2.0 * oracle::kPi);
}

TEST(Rescaled, Examples) {
  const RescaledKernel k1(KernelProfile::poly2(), 0.1, 1);
  EXPECT_NEAR(eval_rescaled(k1, ProfileKind::R, Point(0.5, 0), Point(0.5, 0)), 105.0 / 64.0 / 0.1, 1e-12);
  EXPECT_NEAR(eval_rescaled(k1, ProfileKind::Rbar, Point(0.5, 0), Point(0.5, 0)), 105.0 / 64.0 / 0.1 / 3.0, 1e-12);
  // |x - y| = 0.1: r = 1/4
  EXPECT_NEAR(k1(ProfileKind::R, Point(0.3, 0), Point(0.4, 0)), 105.0 / 64.0 / 0.1 * 0.5625, 1e-12);
  EXPECT_DOUBLE_EQ(k1(ProfileKind::R, Point(0.0, 0), Point(0.2000001, 0)), 0.0);
  EXPECT_DOUBLE_EQ(k1.support_radius(), 0.2);

  const RescaledKernel k2(KernelProfile::poly2(), 0.2, 2);
  EXPECT_NEAR(k2(ProfileKind::R, Point(0, 0), Point(0, 0)), 3.0 / oracle::kPi / 0.04, 1e-12);
  EXPECT_DOUBLE_EQ(k2(ProfileKind::Rbarbar, Point(0, 0), Point(0.3, 0.3)), 0.0);
}

TEST(Rescaled, UnitMassOverFullBall) {
  for (double delta : {0.1, 0.05}) {
    const RescaledKernel k(KernelProfile::poly2(), delta, 1);
    const double h = delta / 256;
    double sum = 0.0;
    for (double x = -2 * delta + h / 2; x < 2 * delta; x += h) sum += k(ProfileKind::Rbar, Point(0, 0), Point(x, 0)) * h;
    EXPECT_NEAR(sum, 1.0, 1e-6) << delta;
  }
  for (double delta : {0.1, 0.05}) {
    const RescaledKernel k(KernelProfile::poly2(), delta, 2);
    const double h = delta / 256;
    const int m = static_cast<int>(std::round(4 * delta / h));
    double sum = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        sum += k(ProfileKind::Rbar, Point(0, 0), Point(-2 * delta + (i + 0.5) * h, -2 * delta + (j + 0.5) * h)) * h * h;
    EXPECT_NEAR(sum, 1.0, 1e-4) << delta;
  }
}

TEST(Rescaled, InvalidArguments) {
  EXPECT_THROW(RescaledKernel(KernelProfile::poly2(), 0.0, 1), ParameterError);
  EXPECT_THROW(RescaledKernel(KernelProfile::poly2(), 0.1, 3), ParameterError);
}
