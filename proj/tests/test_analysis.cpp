#include "nld/analysis.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace nld;

namespace {

NonlocalProblem make_problem(const ManufacturedCase& mc, PenaltyMode mode, double delta) {
  return NonlocalProblem(mc.domain, RescaledKernel(KernelProfile::poly2(), delta, mc.domain.dimension()), mode,
                         mc.rhs(), mc.boundary());
}

ManufacturedCase linear_case() {
  return ManufacturedCase{"linear", Domain::interval(0, 1), [](const Point& x) { return 2 * x.x() + 1; },
                          [](const Point&) { return 0.0; }, [](const Point&) { return Point(2, 0); }, {}, "C^inf"};
}

}  // namespace

TEST(Catalog, SelfCheck) {
  for (const auto& name : case_names()) {
    const auto mc = manufactured_case(name);
    EXPECT_LE(catalog_self_check(mc), 1e-8) << name;
  }
  EXPECT_THROW(manufactured_case("bogus"), ParameterError);
  EXPECT_TRUE(manufactured_case("tent").has_point_sources());
  EXPECT_EQ(manufactured_case("harmonic2d").domain.dimension(), 2);
}

TEST(Catalog, GradientsMatchFiniteDifferences) {
  for (const auto& name : {"sin", "cubic", "harmonic2d"}) {
    const auto mc = manufactured_case(name);
    for (const Point& x : {Point(0.3, 0.0), Point(0.71, 0.0), Point(0.2, -0.1)}) {
      if (!mc.domain.contains(x)) continue;
      const double e = 1e-5;
      const double gx = (mc.exact(x + Point(e, 0)) - mc.exact(x - Point(e, 0))) / (2 * e);
      EXPECT_NEAR(mc.gradient(x).x(), gx, 1e-8) << name;
      if (mc.domain.dimension() == 2) {
        const double gy = (mc.exact(x + Point(0, e)) - mc.exact(x - Point(0, e))) / (2 * e);
        EXPECT_NEAR(mc.gradient(x).y(), gy, 1e-8) << name;
      }
    }
  }
}

TEST(ErrorNorms, Examples) {
  const auto mc = manufactured_case("sin");
  const auto quad = build_quadrature(mc.domain, 0.001);
  const VectorXd exact = sample_interior(mc.exact, quad);
  const auto self = error_norms(exact, mc, quad);
  EXPECT_EQ(self.linf, 0.0);
  EXPECT_EQ(self.l2, 0.0);
  EXPECT_LE(self.h1, 1e-4);

  const VectorXd shifted = exact.array() + 0.1;
  const auto e = error_norms(shifted, mc, quad);
  EXPECT_NEAR(e.linf, 0.1, 1e-14);
  EXPECT_NEAR(e.l2, 0.1 * std::sqrt(mc.domain.measure()), 1e-12);
  EXPECT_NEAR(e.h1 * e.h1 - e.l2 * e.l2, self.h1 * self.h1, 1e-10);

  const auto disk = manufactured_case("harmonic2d");
  const auto q2 = build_quadrature(disk.domain, 0.05);
  const auto e2 = error_norms(VectorXd(sample_interior(disk.exact, q2).array() + 0.1), disk, q2);
  EXPECT_NEAR(e2.l2, 0.1 * std::sqrt(oracle::kPi), 1e-10);
}

TEST(ErrorNorms, GradientOfLinearIsExact) {
  const auto disk = Domain::disk(Point(0, 0), 1.0);
  const auto quad = build_quadrature(disk, 0.05);
  VectorXd u(quad.interior_size());
  for (Index i = 0; i < u.size(); ++i) u[i] = 3 * quad.interior_nodes[i].x() - 2 * quad.interior_nodes[i].y();
  for (const auto& g : numerical_gradient(quad, u)) EXPECT_NEAR((g - Point(3, -2)).norm(), 0.0, 1e-9);
  const auto q1 = build_quadrature(Domain::interval(0, 1), 0.01);
  VectorXd v(q1.interior_size());
  for (Index i = 0; i < v.size(); ++i) v[i] = std::pow(q1.interior_nodes[i].x(), 2);
  const auto g1 = numerical_gradient(q1, v);
  for (Index i = 0; i < v.size(); ++i) EXPECT_NEAR(g1[i].x(), 2 * q1.interior_nodes[i].x(), 1e-10);
}

TEST(FitOrder, SyntheticSlopes) {
  const std::vector<double> deltas = {0.1, 0.05, 0.025, 0.0125};
  for (double p : {0.5, 1.0, 2.0, 3.7}) {
    std::vector<double> errors;
    for (double d : deltas) errors.push_back(4.2 * std::pow(d, p));
    const auto fit = fit_order(deltas, errors);
    EXPECT_NEAR(fit.order, p, 1e-10);
    EXPECT_NEAR(fit.intercept, std::log(4.2), 1e-10);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  }
  EXPECT_THROW(fit_order(std::vector<double>{0.1}, std::vector<double>{1.0}), ParameterError);
}

TEST(Truncation, LinearVanishesInside) {
  const auto mc = linear_case();
  const double delta = 0.1;
  const RescaledKernel k(KernelProfile::poly2(), delta, 1);
  const auto quad = build_quadrature(mc.domain, delta * delta / 2);
  for (Index i = 0; i < quad.interior_size(); ++i) {
    const Point& x = quad.interior_nodes[i];
    if (distance_to_boundary(mc.domain, x) > 2 * delta) EXPECT_NEAR(truncation_residual(mc, k, quad, x), 0.0, 1e-10);
  }
}

TEST(Truncation, InteriorSecondOrder) {
  const auto mc = manufactured_case("sin");
  const std::vector<double> deltas = {0.1, 0.05, 0.025};
  const auto rows = truncation_sweep(mc, KernelProfile::poly2(), deltas);
  std::vector<double> scaled;
  for (const auto& row : rows) {
    double sup = 0.0;
    for (const auto& s : row.samples)
      if (s.distance > 2 * row.delta) sup = std::max(sup, std::abs(s.residual));
    scaled.push_back(sup / (row.delta * row.delta));
  }
  for (double v : scaled) EXPECT_LT(v, 2.0 * scaled.front());
  for (double v : scaled) EXPECT_GT(v, 0.5 * scaled.front());
  EXPECT_THROW(truncation_sweep(manufactured_case("tent"), KernelProfile::poly2(), deltas), PreconditionError);
}

TEST(Study, Preconditions) {
  const auto mc = manufactured_case("sin");
  EXPECT_THROW(convergence_study(mc, PenaltyMode::FirstOrder, std::vector<double>{0.1, 0.05, 0.025}),
               PreconditionError);
  EXPECT_THROW(convergence_study(mc, PenaltyMode::FirstOrder, std::vector<double>{0.1, 0.05, 0.02, 0.01}),
               PreconditionError);
}

TEST(Study, ErrorsDecreaseAndReportIsWritten) {
  const std::vector<double> deltas = {0.1, 0.05, 0.025, 0.0125};
  for (const auto& name : {"sin", "cubic"}) {
    for (auto mode : {PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded}) {
      const auto report = convergence_study(manufactured_case(name), mode, deltas);
      ASSERT_EQ(report.rows.size(), 4u);
      int violations = 0;
      for (std::size_t k = 1; k < report.rows.size(); ++k)
        if (report.rows[k].linf > 1.05 * report.rows[k - 1].linf) ++violations;
      EXPECT_LE(violations, 0) << name;
      EXPECT_LT(report.rows.back().linf, report.rows.front().linf);
      if (std::string(name) == "sin") {
        std::ostringstream os;
        write_report_csv(report, os);
        std::istringstream in(os.str());
        std::string line;
        std::getline(in, line);
        EXPECT_EQ(line, "model,delta,h,linf,l2,h1,runtime_s");
        int data = 0, comments = 0;
        while (std::getline(in, line)) (line.rfind('#', 0) == 0 ? comments : data)++;
        EXPECT_EQ(data, 4);
        EXPECT_GE(comments, 3);
      }
    }
  }
}

TEST(Study, ConstantSolvedExactly) {
  const auto report = convergence_study(manufactured_case("constant"), PenaltyMode::SecondOrderGraded,
                                        std::vector<double>{0.1, 0.05, 0.025, 0.0125});
  for (const auto& row : report.rows) EXPECT_LE(row.linf, 1e-9);
}

TEST(Audit, PassesAndIsDeterministic) {
  const auto mc = manufactured_case("sin");
  const double delta = 0.05;
  const auto quad = build_quadrature(mc.domain, delta * delta / 2);
  for (auto mode : {PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded}) {
    const auto p = make_problem(mc, mode, delta);
    const auto a = max_principle_audit(p, quad, 10, 42);
    const auto b = max_principle_audit(p, quad, 10, 42);
    EXPECT_TRUE(a.pass);
    EXPECT_FALSE(a.failing_seed.has_value());
    ASSERT_EQ(a.trials.size(), 10u);
    for (std::size_t t = 0; t < a.trials.size(); ++t) {
      EXPECT_EQ(a.trials[t].seed, 42u + t);
      EXPECT_EQ(a.trials[t].min, b.trials[t].min);
      EXPECT_EQ(a.trials[t].max, b.trials[t].max);
    }
  }
  EXPECT_THROW(max_principle_audit(make_problem(mc, PenaltyMode::RobinBaseline, delta), quad, 1, 0),
               UnsupportedModeError);
}

TEST(Audit, UnitDataGivesAtLeastOne) {
  const double delta = 0.1;
  const Domain domain = Domain::interval(0, 1);
  const auto quad = build_quadrature(domain, delta * delta / 2);
  for (auto mode : {PenaltyMode::FirstOrder, PenaltyMode::SecondOrderGraded}) {
    const NonlocalProblem p(domain, RescaledKernel(KernelProfile::poly2(), delta, 1), mode,
                            SmoothField{[](const Point&) { return 1.0; }}, [](const Point&) { return 1.0; });
    const auto sol = solve_cg(assemble_system(p, quad), 1e-12);
    EXPECT_GE(sol.values.minCoeff(), 1.0 - 1e-10);
  }
}

TEST(KernelEstimates, OneDimensional) {
  const Domain domain = Domain::interval(0, 1);
  for (double delta : {0.1, 0.05}) {
    const RescaledKernel k(KernelProfile::poly2(), delta, 1);
    const auto quad = build_quadrature(domain, delta * delta / 2);
    const auto est = kernel_estimates(k, domain, quad);
    EXPECT_GT(est.c1, 0.0);
    EXPECT_LE(est.c2, 1.0 + 1e-7);
    EXPECT_GT(est.c4, 0.0);
    for (Index i = 0; i < est.distance.size(); ++i) {
      if (est.distance[i] > 2 * delta) {
        EXPECT_NEAR(est.interior_mass[i], 1.0, delta > 0.075 ? 1e-7 : 1e-8);
        EXPECT_EQ(est.boundary_mass[i], 0.0);
      }
      EXPECT_LE(delta * est.boundary_mass[i], est.c3 + 1e-15);
    }
  }
}
