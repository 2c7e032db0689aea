#ifndef NLD_ANALYSIS_HPP
#define NLD_ANALYSIS_HPP

#include "nld/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nld {

/// Exact solution u of -Lap u = f, u = g on the boundary, with the data needed
/// to measure errors and residuals.
struct ManufacturedCase {
  std::string name;
  Domain domain;
  ScalarField exact;
  /// f = -Lap u. Empty when the source is a Dirac sum.
  ScalarField source;
  VectorField gradient;
  std::vector<PointSource> point_sources;
  std::string regularity;

  bool has_point_sources() const { return !point_sources.empty(); }
  RightHandSide rhs() const;
  ScalarField boundary() const { return exact; }
};

/// sin, cubic, harmonic2d, tent, constant, constant2d.
std::vector<std::string> case_names();
ManufacturedCase manufactured_case(std::string_view name);
/// u == c on `domain`.
ManufacturedCase constant_case(const Domain& domain, double c);

/// Max over `points` random interior points of |-Lap_h u - f|, with a fourth-order
/// finite-difference Laplacian. Points within 0.05 of a point source are skipped.
double catalog_self_check(const ManufacturedCase& mcase, int points = 50, std::uint64_t seed = 1);

/// Gradient of nodal values: central differences on the 1D grid (second-order one-sided at the
/// two end nodes); quadratic least squares over nodes within 2.5 h on the 2D polar grid.
std::vector<Point> numerical_gradient(const QuadratureSet& quad, const VectorXd& values);

struct ErrorNorms {
  double linf = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
};

ErrorNorms error_norms(const VectorXd& u_num, const ManufacturedCase& mcase, const QuadratureSet& quad);

/// r(x) = int Rbar_delta Lap u + (1/delta^2) int R_delta (u(x) - u(y)) - 2 int_bdry Rbar_delta du/dn dS
/// for the exact u of a smooth case.
double truncation_residual(const ManufacturedCase& mcase, const RescaledKernel& kernel, const QuadratureSet& quad,
                           const Point& x);

struct TruncationSample {
  Index node;
  Point x;
  double distance;
  double residual;
  double boundary_mass;  // s_delta(x)
  double ratio;          // |r| / (delta s_delta + delta^2)
};

struct TruncationSweepRow {
  double delta;
  double h;
  double sup_ratio;
  double sup_residual;
  std::vector<TruncationSample> samples;
};

/// Residual at every interior node for each delta (h = max_resolution unless given).
std::vector<TruncationSweepRow> truncation_sweep(const ManufacturedCase& mcase, const KernelProfile& profile,
                                                 std::span<const double> deltas,
                                                 std::optional<double> explicit_h = std::nullopt);

struct OrderFit {
  double order = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares slope of log(error) against log(delta).
OrderFit fit_order(std::span<const double> deltas, std::span<const double> errors);

struct ConvergenceRow {
  double delta;
  double h;
  double linf;
  double l2;
  double h1;
  double runtime_s;
  int iterations;
};

struct ConvergenceReport {
  PenaltyMode mode = PenaltyMode::FirstOrder;
  std::string case_name;
  std::vector<ConvergenceRow> rows;
  OrderFit linf;
  OrderFit l2;
  OrderFit h1;
};

struct StudyOptions {
  KernelProfile profile = KernelProfile::poly2();
  double tol = 1e-10;
  /// Cell size for every delta; max_resolution(delta) when empty.
  std::optional<double> explicit_h;
};

/// Solves the case for each delta of a halving sequence (>= 4 entries) and fits observed orders.
/// The symmetric modes are solved by CG, the Robin baseline by BiCGSTAB.
ConvergenceReport convergence_study(const ManufacturedCase& mcase, PenaltyMode mode, std::span<const double> deltas,
                                    const StudyOptions& options = {});

/// model,delta,h,linf,l2,h1,runtime_s followed by a '#' comment block with fitted orders.
void write_report_csv(const ConvergenceReport& report, std::ostream& os);
/// Aligned human-readable table.
void write_report_table(const ConvergenceReport& report, std::ostream& os);

struct AuditTrial {
  int trial;
  std::uint64_t seed;
  double min;
  double max;
  bool pass;
};

struct AuditReport {
  bool pass = true;
  std::uint64_t seed = 0;
  std::vector<AuditTrial> trials;
  /// Seed of the first failing trial, for replay.
  std::optional<std::uint64_t> failing_seed;
};

/// Solves `trials` instances with f, g drawn uniform in [0, 1] per node (trial t uses seed + t)
/// and checks min u >= -1e-10 max u. Symmetric modes only.
AuditReport max_principle_audit(const NonlocalProblem& problem, const QuadratureSet& quad, int trials,
                                std::uint64_t seed);

/// Kernel integrals sampled on a node set.
struct KernelEstimates {
  VectorXd distance;
  VectorXd interior_mass;  // int_Omega Rbar_delta(x, y) dy
  VectorXd boundary_mass;  // int_bdry Rbar_delta(x, y) dS_y
  double c1 = 0.0;         // min interior_mass
  double c2 = 0.0;         // max interior_mass
  double c3 = 0.0;         // max delta * boundary_mass
  double c4 = 0.0;         // min delta * boundary_mass over d < (sqrt 2 / 2) delta
};

KernelEstimates kernel_estimates(const RescaledKernel& kernel, const Domain& domain, const QuadratureSet& quad);

}  // namespace nld

#endif
