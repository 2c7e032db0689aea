#include "nld/analysis.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace nld {

namespace {

constexpr double kPi = std::numbers::pi;

ScalarField zero_field() {
  return [](const Point&) { return 0.0; };
}

}  // namespace

RightHandSide ManufacturedCase::rhs() const {
  if (has_point_sources()) return PointSources{point_sources};
  return SmoothField{source};
}

std::vector<std::string> case_names() { return {"sin", "cubic", "harmonic2d", "tent", "constant", "constant2d"}; }

ManufacturedCase constant_case(const Domain& domain, double c) {
  return ManufacturedCase{"constant", domain, [c](const Point&) { return c; }, zero_field(),
                          [](const Point&) { return Point(0.0, 0.0); }, {}, "C^inf"};
}

ManufacturedCase manufactured_case(std::string_view name) {
  if (name == "sin") {
    return ManufacturedCase{"sin",
                            Domain::interval(0.0, 1.0),
                            [](const Point& x) { return std::sin(kPi * x.x()); },
                            [](const Point& x) { return kPi * kPi * std::sin(kPi * x.x()); },
                            [](const Point& x) { return Point(kPi * std::cos(kPi * x.x()), 0.0); },
                            {},
                            "C^inf"};
  }
  if (name == "cubic") {
    return ManufacturedCase{"cubic",
                            Domain::interval(0.0, 1.0),
                            [](const Point& x) { return x.x() * x.x() * x.x() + 1.0; },
                            [](const Point& x) { return -6.0 * x.x(); },
                            [](const Point& x) { return Point(3.0 * x.x() * x.x(), 0.0); },
                            {},
                            "C^inf"};
  }
  if (name == "harmonic2d") {
    return ManufacturedCase{"harmonic2d",
                            Domain::disk(Point(0.0, 0.0), 1.0),
                            [](const Point& x) { return x.x() * x.x() - x.y() * x.y(); },
                            zero_field(),
                            [](const Point& x) { return Point(2.0 * x.x(), -2.0 * x.y()); },
                            {},
                            "C^inf (harmonic)"};
  }
  if (name == "tent") {
    // Green's function of -u'' on (0, 1) with the source at x0.
    constexpr double x0 = 0.4;
    return ManufacturedCase{"tent",
                            Domain::interval(0.0, 1.0),
                            [](const Point& x) { return x.x() <= x0 ? (1.0 - x0) * x.x() : x0 * (1.0 - x.x()); },
                            {},
                            [](const Point& x) { return Point(x.x() <= x0 ? 1.0 - x0 : -x0, 0.0); },
                            {PointSource{Point(x0, 0.0), 1.0}},
                            "Lipschitz (kink at the source)"};
  }
  if (name == "constant") return constant_case(Domain::interval(0.0, 1.0), 1.0);
  if (name == "constant2d") return constant_case(Domain::disk(Point(0.0, 0.0), 1.0), 1.0);
  throw ParameterError("unknown manufactured case '" + std::string(name) + "'");
}

double catalog_self_check(const ManufacturedCase& mcase, int points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int dim = mcase.domain.dimension();
  const double step = 4e-3;
  auto second_difference = [&](const Point& x, const Point& e, double s) {
    return (mcase.exact(x + s * e) - 2.0 * mcase.exact(x) + mcase.exact(x - s * e)) / (s * s);
  };
  double worst = 0.0;
  int accepted = 0;
  while (accepted < points) {
    Point x;
    if (const auto* iv = std::get_if<Interval>(&mcase.domain.shape())) {
      x = Point(iv->a + (iv->b - iv->a) * unit(rng), 0.0);
    } else {
      const auto& d = std::get<Disk>(mcase.domain.shape());
      const double r = d.radius * std::sqrt(unit(rng));
      const double t = 2.0 * kPi * unit(rng);
      x = d.center + r * Point(std::cos(t), std::sin(t));
    }
    if (distance_to_boundary(mcase.domain, x) <= 2.0 * step) continue;
    bool near_source = false;
    for (const auto& s : mcase.point_sources) near_source |= (x - s.location).norm() < 0.05;
    if (near_source) continue;
    ++accepted;
    double laplacian = 0.0;
    for (int axis = 0; axis < dim; ++axis) {
      const Point e = axis == 0 ? Point(1.0, 0.0) : Point(0.0, 1.0);
      // Richardson extrapolation of the second difference.
      laplacian += (4.0 * second_difference(x, e, 0.5 * step) - second_difference(x, e, step)) / 3.0;
    }
    const double f = mcase.has_point_sources() ? 0.0 : mcase.source(x);
    worst = std::max(worst, std::abs(-laplacian - f));
  }
  return worst;
}

std::vector<Point> numerical_gradient(const QuadratureSet& quad, const VectorXd& values) {
  const Index n = quad.interior_size();
  if (values.size() != n) throw ParameterError("values do not match the interior node count");
  std::vector<Point> grad(n, Point::Zero());
  const double h = quad.resolution_h;
  if (quad.dimension == 1) {
    if (n < 3) throw PreconditionError("gradient needs at least three nodes");
    for (Index i = 1; i + 1 < n; ++i) grad[i].x() = (values[i + 1] - values[i - 1]) / (2.0 * h);
    grad[0].x() = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    grad[n - 1].x() = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    return grad;
  }
  const double radius = 2.5 * h;
  const NeighborGrid grid(quad.interior_nodes, radius);
#pragma omp parallel for schedule(dynamic, 64)
  for (Index i = 0; i < n; ++i) {
    const Point& x = quad.interior_nodes[i];
    std::vector<Index> near;
    grid.for_each_within(x, radius, [&](Index j, double) { near.push_back(j); });
    Eigen::MatrixXd design(static_cast<Index>(near.size()), 6);
    VectorXd target(static_cast<Index>(near.size()));
    for (std::size_t k = 0; k < near.size(); ++k) {
      const Point d = (quad.interior_nodes[near[k]] - x) / h;
      design.row(static_cast<Index>(k)) << 1.0, d.x(), d.y(), d.x() * d.x(), d.x() * d.y(), d.y() * d.y();
      target[static_cast<Index>(k)] = values[near[k]];
    }
    const VectorXd coef = design.colPivHouseholderQr().solve(target);
    grad[i] = Point(coef[1], coef[2]) / h;
  }
  return grad;
}

ErrorNorms error_norms(const VectorXd& u_num, const ManufacturedCase& mcase, const QuadratureSet& quad) {
  const Index n = quad.interior_size();
  if (u_num.size() != n) throw ParameterError("solution does not match the interior node count");
  const VectorXd exact = sample_interior(mcase.exact, quad);
  const VectorXd err = u_num - exact;
  const auto& w = quad.interior_weights;
  ErrorNorms out;
  out.linf = err.lpNorm<Eigen::Infinity>();
  const double l2_sq = (w.array() * err.array().square()).sum();
  out.l2 = std::sqrt(l2_sq);
  const auto grad = numerical_gradient(quad, u_num);
  double grad_sq = 0.0;
  for (Index i = 0; i < n; ++i) grad_sq += w[i] * (grad[i] - mcase.gradient(quad.interior_nodes[i])).squaredNorm();
  out.h1 = std::sqrt(l2_sq + grad_sq);
  return out;
}

namespace {

template <typename Visit>
double residual_with(const ManufacturedCase& mcase, const RescaledKernel& kernel, const QuadratureSet& quad,
                     const Point& x, Visit&& visit_interior) {
  const double delta = kernel.delta();
  const double ux = mcase.exact(x);
  double source = 0.0;
  double diffusion = 0.0;
  visit_interior([&](Index j, double d2) {
    const Point& y = quad.interior_nodes[j];
    const double w = quad.interior_weights[j];
    source += kernel.at_squared_distance(ProfileKind::Rbar, d2) * (-mcase.source(y)) * w;
    diffusion += kernel.at_squared_distance(ProfileKind::R, d2) * (ux - mcase.exact(y)) * w;
  });
  double flux = 0.0;
  for (Index b = 0; b < quad.boundary_size(); ++b) {
    const Point& y = quad.boundary_nodes[b];
    const double k = kernel(ProfileKind::Rbar, x, y);
    if (k == 0.0) continue;
    flux += k * mcase.gradient(y).dot(quad.boundary_normals[b]) * quad.boundary_weights[b];
  }
  return source + diffusion / (delta * delta) - 2.0 * flux;
}

}  // namespace

double truncation_residual(const ManufacturedCase& mcase, const RescaledKernel& kernel, const QuadratureSet& quad,
                           const Point& x) {
  if (mcase.has_point_sources()) throw PreconditionError("truncation residual needs a smooth manufactured case");
  return residual_with(mcase, kernel, quad, x, [&](auto&& f) {
    for (Index j = 0; j < quad.interior_size(); ++j) f(j, (quad.interior_nodes[j] - x).squaredNorm());
  });
}

std::vector<TruncationSweepRow> truncation_sweep(const ManufacturedCase& mcase, const KernelProfile& profile,
                                                 std::span<const double> deltas, std::optional<double> explicit_h) {
  if (mcase.has_point_sources()) throw PreconditionError("truncation residual needs a smooth manufactured case");
  std::vector<TruncationSweepRow> rows;
  const int dim = mcase.domain.dimension();
  for (const double delta : deltas) {
    const RescaledKernel kernel(profile, delta, dim);
    const double h = explicit_h.value_or(max_resolution(dim, delta));
    const QuadratureSet quad = build_quadrature(mcase.domain, h);
    const NeighborGrid grid(quad.interior_nodes, kernel.support_radius());
    TruncationSweepRow row{delta, quad.resolution_h, 0.0, 0.0, {}};
    row.samples.resize(static_cast<std::size_t>(quad.interior_size()));
#pragma omp parallel for schedule(dynamic, 64)
    for (Index i = 0; i < quad.interior_size(); ++i) {
      const Point& x = quad.interior_nodes[i];
      const double r = residual_with(mcase, kernel, quad, x, [&](auto&& f) {
        grid.for_each_within(x, kernel.support_radius(), f);
      });
      const double s = boundary_kernel_sum(kernel, quad, x);
      row.samples[static_cast<std::size_t>(i)] =
          TruncationSample{i, x, distance_to_boundary(mcase.domain, x), r, s, std::abs(r) / (delta * s + delta * delta)};
    }
    for (const auto& s : row.samples) {
      row.sup_ratio = std::max(row.sup_ratio, s.ratio);
      row.sup_residual = std::max(row.sup_residual, std::abs(s.residual));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

OrderFit fit_order(std::span<const double> deltas, std::span<const double> errors) {
  if (deltas.size() != errors.size() || deltas.size() < 2)
    throw ParameterError("order fit needs matching delta/error lists of length >= 2");
  const auto m = static_cast<double>(deltas.size());
  double sx = 0, sy = 0;
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0) || !(errors[k] > 0.0) || !std::isfinite(errors[k]))
      throw ParameterError("order fit needs positive finite deltas and errors");
    lx.push_back(std::log(deltas[k]));
    ly.push_back(std::log(errors[k]));
    sx += lx.back();
    sy += ly.back();
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (sxx == 0.0) throw ParameterError("order fit needs distinct deltas");
  OrderFit fit;
  fit.order = sxy / sxx;
  fit.intercept = my - fit.order * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

ConvergenceReport convergence_study(const ManufacturedCase& mcase, PenaltyMode mode, std::span<const double> deltas,
                                    const StudyOptions& options) {
  if (deltas.size() < 4) throw PreconditionError("convergence study needs at least four deltas");
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    const double ratio = deltas[k] / deltas[k + 1];
    if (!(std::abs(ratio - 2.0) <= 1e-9)) throw PreconditionError("convergence study needs a halving delta sequence");
  }
  const int dim = mcase.domain.dimension();
  if (options.explicit_h) check_resolution(dim, deltas.back(), *options.explicit_h);

  ConvergenceReport report;
  report.mode = mode;
  report.case_name = mcase.name;
  for (const double delta : deltas) {
    try {
      const auto start = std::chrono::steady_clock::now();
      const double h = options.explicit_h.value_or(max_resolution(dim, delta));
      const QuadratureSet quad = build_quadrature(mcase.domain, h);
      const NonlocalProblem problem(mcase.domain, RescaledKernel(options.profile, delta, dim), mode, mcase.rhs(),
                                    mcase.boundary());
      const DiscreteSystem system = assemble_system(problem, quad);
      const Solution sol = is_symmetric(mode) ? solve_cg(system, options.tol) : solve_bicgstab(system, options.tol);
      const ErrorNorms norms = error_norms(sol.values, mcase, quad);
      const double runtime =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      report.rows.push_back({delta, quad.resolution_h, norms.linf, norms.l2, norms.h1, runtime, sol.info.iterations});
    } catch (const ConvergenceError& e) {
      std::ostringstream os;
      os << "delta = " << delta << ": " << e.what();
      throw ConvergenceError(os.str(), e.iterations(), e.last_change());
    } catch (const PreconditionError& e) {
      throw PreconditionError("delta = " + std::to_string(delta) + ": " + e.what());
    } catch (const ParameterError& e) {
      throw ParameterError("delta = " + std::to_string(delta) + ": " + e.what());
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "delta = " << delta << ": " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  std::vector<double> ds, linf, l2, h1;
  for (const auto& r : report.rows) {
    ds.push_back(r.delta);
    linf.push_back(r.linf);
    l2.push_back(r.l2);
    h1.push_back(r.h1);
  }
  report.linf = fit_order(ds, linf);
  report.l2 = fit_order(ds, l2);
  report.h1 = fit_order(ds, h1);
  return report;
}

void write_report_csv(const ConvergenceReport& report, std::ostream& os) {
  os << std::setprecision(17);
  os << "model,delta,h,linf,l2,h1,runtime_s\n";
  for (const auto& r : report.rows)
    os << to_string(report.mode) << ',' << r.delta << ',' << r.h << ',' << r.linf << ',' << r.l2 << ',' << r.h1
       << ',' << r.runtime_s << '\n';
  os << "# case=" << report.case_name << '\n';
  os << "# order_linf=" << report.linf.order << " r2=" << report.linf.r_squared << '\n';
  os << "# order_l2=" << report.l2.order << " r2=" << report.l2.r_squared << '\n';
  os << "# order_h1=" << report.h1.order << " r2=" << report.h1.r_squared << '\n';
}

void write_report_table(const ConvergenceReport& report, std::ostream& os) {
  const auto flags = os.flags();
  os << "case " << report.case_name << ", model " << to_string(report.mode) << '\n';
  os << std::setw(10) << "delta" << std::setw(12) << "h" << std::setw(14) << "Linf" << std::setw(14) << "L2"
     << std::setw(14) << "H1" << std::setw(8) << "iters" << std::setw(11) << "time[s]" << '\n';
  os << std::scientific << std::setprecision(4);
  for (const auto& r : report.rows)
    os << std::setw(10) << std::setprecision(3) << r.delta << std::setw(12) << std::setprecision(3) << r.h
       << std::setprecision(4) << std::setw(14) << r.linf << std::setw(14) << r.l2 << std::setw(14) << r.h1
       << std::setw(8) << r.iterations << std::setw(11) << std::setprecision(2) << r.runtime_s << '\n';
  os << std::fixed << std::setprecision(3);
  os << "observed order  Linf " << report.linf.order << " (R^2 " << report.linf.r_squared << ")"
     << "  L2 " << report.l2.order << " (R^2 " << report.l2.r_squared << ")"
     << "  H1 " << report.h1.order << " (R^2 " << report.h1.r_squared << ")\n";
  os.flags(flags);
}

AuditReport max_principle_audit(const NonlocalProblem& problem, const QuadratureSet& quad, int trials,
                                std::uint64_t seed) {
  if (!is_symmetric(problem.mode()))
    throw UnsupportedModeError("the maximum principle audit applies to the symmetric modes only");
  if (trials < 0) throw ParameterError("trial count must be nonnegative");
  const NonlocalProblem nodal(problem.domain(), problem.kernel(), problem.mode(), SmoothField{zero_field()},
                              zero_field());
  DiscreteSystem sys = assemble_system(nodal, quad, VectorXd::Zero(quad.interior_size()));

  AuditReport report;
  report.seed = seed;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t trial_seed = seed + static_cast<std::uint64_t>(t);
    std::mt19937_64 rng(trial_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    VectorXd f(quad.interior_size()), g(quad.boundary_size());
    for (Index i = 0; i < f.size(); ++i) f[i] = unit(rng);
    for (Index b = 0; b < g.size(); ++b) g[b] = unit(rng);
    sys.rhs = assemble_rhs(nodal, quad, f, g);
    Solution sol;
    try {
      sol = solve_cg(sys, 1e-12);
    } catch (const ConvergenceError& e) {
      std::ostringstream os;
      os << "audit trial " << t << " (replay seed " << trial_seed << "): " << e.what();
      throw ConvergenceError(os.str(), e.iterations(), e.last_change());
    }
    const double lo = sol.values.minCoeff();
    const double hi = sol.values.maxCoeff();
    const bool ok = lo >= -1e-10 * std::max(hi, 0.0);
    report.trials.push_back({t, trial_seed, lo, hi, ok});
    if (!ok && report.pass) {
      report.pass = false;
      report.failing_seed = trial_seed;
    }
  }
  return report;
}

KernelEstimates kernel_estimates(const RescaledKernel& kernel, const Domain& domain, const QuadratureSet& quad) {
  const Index n = quad.interior_size();
  const double delta = kernel.delta();
  KernelEstimates est;
  est.distance.resize(n);
  est.interior_mass.resize(n);
  est.boundary_mass.resize(n);
  const NeighborGrid interior(quad.interior_nodes, kernel.support_radius());
  const NeighborGrid boundary(quad.boundary_nodes, kernel.support_radius());
#pragma omp parallel for schedule(dynamic, 64)
  for (Index i = 0; i < n; ++i) {
    const Point& x = quad.interior_nodes[i];
    double in = 0.0, bd = 0.0;
    interior.for_each_within(x, kernel.support_radius(), [&](Index j, double d2) {
      in += kernel.at_squared_distance(ProfileKind::Rbar, d2) * quad.interior_weights[j];
    });
    boundary.for_each_within(x, kernel.support_radius(), [&](Index b, double d2) {
      bd += kernel.at_squared_distance(ProfileKind::Rbar, d2) * quad.boundary_weights[b];
    });
    est.distance[i] = distance_to_boundary(domain, x);
    est.interior_mass[i] = in;
    est.boundary_mass[i] = bd;
  }
  est.c1 = est.interior_mass.minCoeff();
  est.c2 = est.interior_mass.maxCoeff();
  est.c3 = delta * est.boundary_mass.maxCoeff();
  est.c4 = std::numeric_limits<double>::quiet_NaN();
  const double layer = std::sqrt(2.0) / 2.0 * delta;
  for (Index i = 0; i < n; ++i) {
    if (est.distance[i] >= layer) continue;
    const double v = delta * est.boundary_mass[i];
    est.c4 = std::isnan(est.c4) ? v : std::min(est.c4, v);
  }
  return est;
}

}  // namespace nld
