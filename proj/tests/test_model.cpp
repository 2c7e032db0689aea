#include "nld/model.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nld;

namespace {

const double kPi = oracle::kPi;

NonlocalProblem interval_problem(PenaltyMode mode, double delta, ScalarField f, ScalarField g) {
  return NonlocalProblem(Domain::interval(0, 1), RescaledKernel(KernelProfile::poly2(), delta, 1), mode,
                         SmoothField{std::move(f)}, std::move(g));
}

ScalarField constant(double c) {
  return [c](const Point&) { return c; };
}

VectorXd random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Penalty, Examples) {
  EXPECT_DOUBLE_EQ(penalty_weight(PenaltyMode::FirstOrder, 0.3, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(penalty_weight(PenaltyMode::SecondOrderGraded, 0.3, 0.1), 0.2);
  EXPECT_DOUBLE_EQ(penalty_weight(PenaltyMode::SecondOrderGraded, 0.001, 0.1), 0.01);
  EXPECT_DOUBLE_EQ(penalty_weight(PenaltyMode::SecondOrderGraded, 0.1, 0.1), 0.1);
  EXPECT_DOUBLE_EQ(penalty_weight(PenaltyMode::SecondOrderGraded, 0.05, 0.1), 0.05);
  EXPECT_NEAR(penalty_weight(PenaltyMode::SecondOrderGraded, Point(0.95, 0), 0.1, Domain::interval(0, 1)), 0.05, 1e-15);
}

TEST(Penalty, Bounds) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double delta = 0.01 + 0.2 * u(rng);
    const double d = u(rng);
    const double mu = penalty_weight(PenaltyMode::SecondOrderGraded, d, delta);
    EXPECT_GE(mu, delta * delta);
    EXPECT_LE(mu, 2 * delta);
    EXPECT_GT(mu, 0.0);
    EXPECT_DOUBLE_EQ(penalty_weight(PenaltyMode::FirstOrder, d, delta), delta);
  }
}

TEST(Penalty, ParseAndPrint) {
  for (auto mode : {PenaltyMode::RobinBaseline, PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded})
    EXPECT_EQ(parse_penalty_mode(to_string(mode)), mode);
  EXPECT_THROW(parse_penalty_mode("third_order"), ParameterError);
  EXPECT_FALSE(is_symmetric(PenaltyMode::RobinBaseline));
  EXPECT_TRUE(is_symmetric(PenaltyMode::SecondOrderGraded));
}

TEST(Problem, Validation) {
  EXPECT_THROW(interval_problem(PenaltyMode::FirstOrder, 0.25, constant(0), constant(0)), PreconditionError);
  EXPECT_THROW(NonlocalProblem(Domain::interval(0, 1), RescaledKernel(KernelProfile::poly2(), 0.1, 2),
                               PenaltyMode::FirstOrder, SmoothField{constant(0)}, constant(0)),
               ParameterError);
  const auto make_source = [](double x) {
    return NonlocalProblem(Domain::interval(0, 1), RescaledKernel(KernelProfile::poly2(), 0.1, 1),
                           PenaltyMode::FirstOrder, PointSources{{{Point(x, 0), 1.0}}}, constant(0));
  };
  EXPECT_THROW(make_source(0.1), PreconditionError);
  EXPECT_NO_THROW(make_source(0.4));
}

TEST(Operator, ZeroAndConstant) {
  const double delta = 0.1;
  const auto quad = build_quadrature(Domain::interval(0, 1), delta * delta / 2);
  const Index n = quad.interior_size();
  for (auto mode : {PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded, PenaltyMode::RobinBaseline}) {
    const auto p = interval_problem(mode, delta, constant(0), constant(0));
    const VectorXd zero = VectorXd::Zero(n);
    const VectorXd one = VectorXd::Ones(n);
    for (Index i = 0; i < n; i += 7) {
      EXPECT_EQ(apply_operator(p, quad, zero, i), 0.0);
      const double x = quad.interior_nodes[i].x();
      const double value = apply_operator(p, quad, one, i);
      if (std::min(x, 1 - x) > 2 * delta) {
        EXPECT_NEAR(value, 0.0, 1e-12);
      } else if (mode != PenaltyMode::RobinBaseline) {
        const double mu = penalty_weight(mode, std::min(x, 1 - x), delta);
        auto rbar = [&](double d) {
          const double r = d * d / (4 * delta * delta);
          return r < 1 ? oracle::alpha(1) / delta * std::pow(1 - r, 3) / 3 : 0.0;
        };
        EXPECT_NEAR(value, 2 / mu * (rbar(x) + rbar(1 - x)), 1e-9 * std::abs(value)) << x;
      }
    }
  }
  EXPECT_THROW(apply_operator(interval_problem(PenaltyMode::FirstOrder, delta, constant(0), constant(0)), quad,
                              VectorXd::Zero(n), n),
               std::out_of_range);
}

TEST(Operator, Linear) {
  const double delta = 0.1;
  const auto quad = build_quadrature(Domain::interval(0, 1), delta * delta / 2);
  const Index n = quad.interior_size();
  for (auto mode : {PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded, PenaltyMode::RobinBaseline}) {
    const auto p = interval_problem(mode, delta, constant(0), constant(0));
    for (int trial = 0; trial < 5; ++trial) {
      const VectorXd u = random_vector(n, 10 + trial), v = random_vector(n, 20 + trial);
      const double a = 1.7, b = -0.3;
      const VectorXd w = a * u + b * v;
      for (Index i = 0; i < n; i += 13) {
        const double lhs = apply_operator(p, quad, w, i);
        const double rhs = a * apply_operator(p, quad, u, i) + b * apply_operator(p, quad, v, i);
        EXPECT_NEAR(lhs, rhs, 1e-10 * (1 + std::abs(rhs)));
      }
    }
  }
}

TEST(Operator, MatchesDenseOracle) {
  const double delta = 0.1;
  const int n = 200;
  const auto quad = build_quadrature(Domain::interval(0, 1), 1.0 / n);
  const auto f = [](const Point& x) { return kPi * kPi * std::sin(kPi * x.x()); };
  for (int m : {1, 2}) {
    const auto mode = m == 1 ? PenaltyMode::FirstOrder : PenaltyMode::SecondOrderGraded;
    const auto p = interval_problem(mode, delta, f, constant(0.5));
    const auto ref = oracle::dense_1d(0, 1, delta, n, m, [&](double x) { return f(Point(x, 0)); }, 0.5, 0.5);
    const VectorXd u = random_vector(n, 99);
    const Eigen::VectorXd Au = ref.A * u;
    for (Index i = 0; i < n; ++i) EXPECT_NEAR(apply_operator(p, quad, u, i), Au[i], 1e-10 * (1 + std::abs(Au[i])));
    const VectorXd b = assemble_rhs(p, quad);
    EXPECT_LE((b - ref.b).norm(), 1e-11 * ref.b.norm());
  }
}

TEST(Rhs, ZeroCases) {
  const double delta = 0.1;
  const auto quad = build_quadrature(Domain::interval(0, 1), delta * delta / 2);
  for (auto mode : {PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded, PenaltyMode::RobinBaseline}) {
    EXPECT_EQ(assemble_rhs(interval_problem(mode, delta, constant(0), constant(0)), quad).norm(), 0.0);
    const VectorXd b = assemble_rhs(interval_problem(mode, delta, constant(0), constant(1)), quad);
    for (Index i = 0; i < quad.interior_size(); ++i) {
      const double x = quad.interior_nodes[i].x();
      if (std::min(x, 1 - x) > 2 * delta) EXPECT_EQ(b[i], 0.0);
      else EXPECT_GE(b[i], 0.0);
    }
  }
}

TEST(Rhs, PointSourceSupport) {
  const double delta = 0.05;
  const auto quad = build_quadrature(Domain::interval(0, 1), delta * delta / 2);
  const NonlocalProblem p(Domain::interval(0, 1), RescaledKernel(KernelProfile::poly2(), delta, 1),
                          PenaltyMode::FirstOrder, PointSources{{{Point(0.4, 0), 1.0}}}, constant(0));
  const VectorXd b = assemble_rhs(p, quad);
  const RescaledKernel k(KernelProfile::poly2(), delta, 1);
  for (Index i = 0; i < quad.interior_size(); ++i) {
    const double x = quad.interior_nodes[i].x();
    if (std::abs(x - 0.4) >= 2 * delta) EXPECT_EQ(b[i], 0.0);
    else EXPECT_NEAR(b[i], k(ProfileKind::Rbar, Point(x, 0), Point(0.4, 0)), 1e-14);
  }
  // total source mass is the charge
  EXPECT_NEAR((b.array() * quad.interior_weights.array()).sum(), 1.0, 1e-6);
}

TEST(Rhs, ConstantIsReproduced) {
  const double delta = 0.1;
  const auto quad = build_quadrature(Domain::interval(0, 1), delta * delta / 2);
  const Index n = quad.interior_size();
  for (auto mode : {PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded}) {
    const double c = 2.5;
    const auto p = interval_problem(mode, delta, constant(0), constant(c));
    const VectorXd b = assemble_rhs(p, quad);
    const VectorXd u = VectorXd::Constant(n, c);
    for (Index i = 0; i < n; ++i) EXPECT_NEAR(apply_operator(p, quad, u, i), b[i], 1e-10 * (1 + std::abs(b[i])));
  }
}

TEST(Energy, ZeroCases) {
  const double delta = 0.1;
  const auto quad = build_quadrature(Domain::interval(0, 1), delta * delta / 2);
  const Index n = quad.interior_size();
  EXPECT_EQ(energy(interval_problem(PenaltyMode::FirstOrder, delta, constant(0), constant(0)), quad, VectorXd::Zero(n)),
            0.0);
  EXPECT_NEAR(energy(interval_problem(PenaltyMode::SecondOrderGraded, delta, constant(0), constant(3)), quad,
                     VectorXd::Constant(n, 3.0)),
              0.0, 1e-12);
  EXPECT_THROW(energy(interval_problem(PenaltyMode::RobinBaseline, delta, constant(0), constant(0)), quad,
                      VectorXd::Zero(n)),
               UnsupportedModeError);
}

TEST(Energy, GradientAndStationarity) {
  const double delta = 0.1;
  const int n = 200;
  const auto quad = build_quadrature(Domain::interval(0, 1), 1.0 / n);
  const auto f = [](const Point& x) { return kPi * kPi * std::sin(kPi * x.x()); };
  for (int m : {1, 2}) {
    const auto mode = m == 1 ? PenaltyMode::FirstOrder : PenaltyMode::SecondOrderGraded;
    const auto p = interval_problem(mode, delta, f, constant(0.2));
    const auto ref = oracle::dense_1d(0, 1, delta, n, m, [&](double x) { return f(Point(x, 0)); }, 0.2, 0.2);
    const VectorXd w = quad.interior_weights;

    const VectorXd u = random_vector(n, 5);
    const VectorXd grad = w.asDiagonal() * (ref.A * u - ref.b);
    const double step = 1e-4;
    for (Index k = 0; k < n; k += 9) {
      VectorXd up = u, um = u;
      up[k] += step;
      um[k] -= step;
      const double fd = (energy(p, quad, up) - energy(p, quad, um)) / (2 * step);
      EXPECT_NEAR(fd, grad[k], 1e-5 * std::max(1.0, std::abs(grad[k]))) << k;
    }

    const VectorXd ustar = ref.A.lu().solve(ref.b);
    const double e0 = energy(p, quad, ustar);
    for (int t = 0; t < 100; ++t) {
      const VectorXd d = random_vector(n, 1000 + t);
      for (double eps : {1e-3, 1e-1}) EXPECT_GE(energy(p, quad, ustar + eps * d), e0 - 1e-12 * std::abs(e0));
    }
  }
}
