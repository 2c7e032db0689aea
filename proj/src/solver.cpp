#include "nld/solver.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

namespace nld {

namespace {

using Entry = std::pair<Index, double>;

// Everything the collocated operator needs at one node.
struct NodeStencil {
  std::vector<Entry> neighbors;  // (j, R_delta(x_i, x_j) w_j), j != i
  double interior_mass = 0.0;    // sum of the above
  double boundary_mass = 0.0;    // s_delta(x_i)
  double g_term = 0.0;           // sum_b Rbar_ib g_b w_b
  std::vector<Entry> robin;      // (nearest node, Rbar_ib w_b) for the baseline
  double mu = 0.0;
};

std::vector<NodeStencil> build_stencils(const NonlocalProblem& problem, const QuadratureSet& quad,
                                        const VectorXd& g_samples) {
  const auto& kernel = problem.kernel();
  const double radius = kernel.support_radius();
  const Index n = quad.interior_size();
  const bool robin = problem.mode() == PenaltyMode::RobinBaseline;

  const NeighborGrid interior(quad.interior_nodes, radius);
  const NeighborGrid boundary(quad.boundary_nodes, radius);
  std::vector<Index> nearest;
  if (robin) {
    nearest.resize(quad.boundary_size());
    for (Index b = 0; b < quad.boundary_size(); ++b) nearest[b] = interior.nearest(quad.boundary_nodes[b]);
  }

  std::vector<NodeStencil> stencils(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (Index i = 0; i < n; ++i) {
    NodeStencil& s = stencils[i];
    const Point& x = quad.interior_nodes[i];
    interior.for_each_within(x, radius, [&](Index j, double d2) {
      if (j == i) return;
      const double value = kernel.at_squared_distance(ProfileKind::R, d2) * quad.interior_weights[j];
      if (value == 0.0) return;
      s.neighbors.emplace_back(j, value);
    });
    std::sort(s.neighbors.begin(), s.neighbors.end());
    for (const auto& [j, value] : s.neighbors) s.interior_mass += value;

    boundary.for_each_within(x, radius, [&](Index b, double d2) {
      const double k = kernel.at_squared_distance(ProfileKind::Rbar, d2) * quad.boundary_weights[b];
      if (k == 0.0) return;
      s.boundary_mass += k;
      s.g_term += k * g_samples[b];
      if (robin) s.robin.emplace_back(nearest[b], k);
    });
    s.mu = penalty_weight(problem.mode(), x, problem.delta(), problem.domain());
  }
  return stencils;
}

VectorXd source_samples(const NonlocalProblem& problem, const QuadratureSet& quad) {
  if (const auto* smooth = std::get_if<SmoothField>(&problem.rhs())) return sample_interior(smooth->f, quad);
  return {};
}

}  // namespace

double max_resolution(int dimension, double delta) {
  switch (dimension) {
    case 1:
      return 0.5 * delta * delta;
    case 2:
      return delta / 16.0;
    default:
      throw ParameterError("dimension must be 1 or 2");
  }
}

void check_resolution(int dimension, double delta, double h) {
  const double limit = max_resolution(dimension, delta);
  if (h > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "quadrature too coarse for delta = " << delta << ": h = " << h << " exceeds "
       << (dimension == 1 ? "delta^2/2" : "delta/16") << " = " << limit
       << "; quadrature error would pollute the model error";
    throw PreconditionError(os.str());
  }
}

std::string problem_fingerprint(const NonlocalProblem& problem, const QuadratureSet& quad) {
  std::ostringstream os;
  os.precision(17);
  os << "domain=" << problem.domain().describe() << ";kernel=" << problem.kernel().profile().name()
     << ";mode=" << to_string(problem.mode()) << ";delta=" << problem.delta() << ";h=" << quad.resolution_h
     << ";n=" << quad.interior_size() << ";nb=" << quad.boundary_size();
  return os.str();
}

DiscreteSystem assemble_system(const NonlocalProblem& problem, const QuadratureSet& quad) {
  return assemble_system(problem, quad, assemble_rhs(problem, quad));
}

DiscreteSystem assemble_system(const NonlocalProblem& problem, const QuadratureSet& quad, VectorXd rhs) {
  check_resolution(problem.domain().dimension(), problem.delta(), quad.resolution_h);
  const Index n = quad.interior_size();
  if (rhs.size() != n) throw ParameterError("right-hand side does not match the interior node count");

  const VectorXd g_samples = VectorXd::Zero(quad.boundary_size());
  const auto stencils = build_stencils(problem, quad, g_samples);
  const double inv_delta2 = 1.0 / (problem.delta() * problem.delta());
  const bool robin = problem.mode() == PenaltyMode::RobinBaseline;

  DiscreteSystem sys;
  sys.mode = problem.mode();
  sys.delta = problem.delta();
  sys.h = quad.resolution_h;
  sys.nodes = quad.interior_nodes;
  sys.weights = quad.interior_weights;
  sys.rhs = std::move(rhs);
  sys.boundary_penalty.resize(n);
  sys.penalty_weights.resize(n);
  sys.fingerprint = problem_fingerprint(problem, quad);

  std::vector<std::vector<Entry>> rows(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (Index i = 0; i < n; ++i) {
    const NodeStencil& s = stencils[i];
    const double penalty = 2.0 / s.mu * s.boundary_mass;
    auto& row = rows[i];
    row.reserve(s.neighbors.size() + 1 + s.robin.size());
    for (const auto& [j, value] : s.neighbors) row.emplace_back(j, -inv_delta2 * value);
    double diagonal = inv_delta2 * s.interior_mass;
    if (robin) {
      for (const auto& [j, value] : s.robin) row.emplace_back(j, 2.0 / s.mu * value);
    } else {
      diagonal += penalty;
    }
    row.emplace_back(i, diagonal);
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
    // Merge duplicate columns (Robin couplings landing on an existing entry).
    std::size_t out = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (out > 0 && row[out - 1].first == row[k].first)
        row[out - 1].second += row[k].second;
      else
        row[out++] = row[k];
    }
    row.resize(out);
    sys.boundary_penalty[i] = penalty;
    sys.penalty_weights[i] = s.mu;
  }

  Eigen::VectorXi counts(n);
  for (Index i = 0; i < n; ++i) counts[i] = static_cast<int>(rows[i].size());
  sys.matrix.resize(n, n);
  sys.matrix.reserve(counts);
  for (Index i = 0; i < n; ++i)
    for (const auto& [j, value] : rows[i]) sys.matrix.insert(i, j) = value;
  sys.matrix.makeCompressed();
  return sys;
}

Solution solve_cg(const DiscreteSystem& system, double tol, int max_iters) {
  if (!is_symmetric(system.mode))
    throw UnsupportedModeError("conjugate gradients need a symmetric mode; use solve_jacobi for the Robin baseline");
  if (!(tol > 0.0)) throw ParameterError("CG tolerance must be positive");
  const Index n = system.size();
  const int cap = max_iters > 0 ? max_iters : static_cast<int>(10 * n);
  const VectorXd& w = system.weights;
  const VectorXd& b = system.rhs;

  Solution sol;
  sol.fingerprint = system.fingerprint;
  sol.info.method = "cg";
  sol.values = VectorXd::Zero(n);
  const double b_norm = b.norm();
  if (b_norm == 0.0) return sol;
  const double target = tol * b_norm;

  // S = W A is symmetric positive definite; M = diag(S).
  const VectorXd inv_m = (w.array() * system.matrix.diagonal().array()).inverse().matrix();
  VectorXd& u = sol.values;
  VectorXd r(n), z(n), p(n), q(n);
  int it = 0;
  double true_residual = b_norm;
  // Restarts refresh the recursive residual if roundoff lets it drift from the true one.
  for (int restart = 0; restart < 8 && it < cap; ++restart) {
    r = w.cwiseProduct(b - system.matrix * u);
    true_residual = r.cwiseQuotient(w).norm();
    if (true_residual <= target) break;
    z = inv_m.cwiseProduct(r);
    p = z;
    double rz = r.dot(z);
    while (it < cap) {
      ++it;
      q = w.cwiseProduct(system.matrix * p);
      const double alpha = rz / p.dot(q);
      u += alpha * p;
      r -= alpha * q;
      if (r.cwiseQuotient(w).norm() <= target) break;
      z = inv_m.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    true_residual = (system.matrix * u - b).norm();
    if (true_residual <= target) break;
  }
  sol.info.iterations = it;
  sol.info.final_residual = true_residual / b_norm;
  if (true_residual > target) {
    std::ostringstream os;
    os << "CG did not reach relative residual " << tol << " within " << cap << " iterations (reached "
       << sol.info.final_residual << ")";
    throw ConvergenceError(os.str(), it, sol.info.final_residual);
  }
  return sol;
}

Solution solve_bicgstab(const DiscreteSystem& system, double tol, int max_iters) {
  if (!(tol > 0.0)) throw ParameterError("BiCGSTAB tolerance must be positive");
  const Index n = system.size();
  Solution sol;
  sol.fingerprint = system.fingerprint;
  sol.info.method = "bicgstab";
  sol.values = VectorXd::Zero(n);
  const double b_norm = system.rhs.norm();
  if (b_norm == 0.0) return sol;

  Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>> solver;
  solver.setTolerance(tol);
  solver.setMaxIterations(max_iters > 0 ? max_iters : static_cast<int>(10 * n));
  solver.compute(system.matrix);
  sol.values = solver.solve(system.rhs);
  sol.info.iterations = static_cast<int>(solver.iterations());
  sol.info.final_residual = residual_norm(system, sol.values);
  if (solver.info() != Eigen::Success || !(sol.info.final_residual <= tol * (1.0 + 1e-6))) {
    std::ostringstream os;
    os << "BiCGSTAB did not reach relative residual " << tol << " (reached " << sol.info.final_residual << " after "
       << sol.info.iterations << " iterations)";
    throw ConvergenceError(os.str(), sol.info.iterations, sol.info.final_residual);
  }
  return sol;
}

Solution solve_jacobi(const NonlocalProblem& problem, const QuadratureSet& quad, const JacobiOptions& options) {
  if (!(options.tol > 0.0)) throw ParameterError("Jacobi tolerance must be positive");
  const Index n = quad.interior_size();
  const double delta = problem.delta();
  const double delta2 = delta * delta;
  const bool robin = problem.mode() == PenaltyMode::RobinBaseline;

  const auto stencils = build_stencils(problem, quad, sample_boundary(problem.boundary_data(), quad));
  VectorXd f_samples = source_samples(problem, quad);
  // delta^2 F_i: reuse the right-hand side assembly with g = 0.
  const VectorXd source =
      delta2 * assemble_rhs(problem, quad, f_samples, VectorXd::Zero(quad.boundary_size()));

  VectorXd numerator_fixed(n), denominator(n);
  for (Index i = 0; i < n; ++i) {
    const NodeStencil& s = stencils[i];
    const double factor = 2.0 * delta2 / s.mu;
    numerator_fixed[i] = source[i] + factor * s.g_term;
    denominator[i] = s.interior_mass;
    if (robin) {
      for (const auto& [j, value] : s.robin)
        if (j == i) denominator[i] += factor * value;
    } else {
      denominator[i] += factor * s.boundary_mass;
    }
  }

  Solution sol;
  sol.fingerprint = problem_fingerprint(problem, quad);
  sol.info.method = "jacobi";
  VectorXd u = options.initial.size() == n ? options.initial : VectorXd::Zero(n);
  if (options.initial.size() != 0 && options.initial.size() != n)
    throw ParameterError("Jacobi initial guess does not match the interior node count");
  VectorXd next(n);

  double previous_change = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int it = 1; it <= options.max_iters; ++it) {
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
      const NodeStencil& s = stencils[i];
      double acc = numerator_fixed[i];
      for (const auto& [j, value] : s.neighbors) acc += value * u[j];
      if (robin) {
        const double factor = 2.0 * delta2 / s.mu;
        for (const auto& [j, value] : s.robin)
          if (j != i) acc -= factor * value * u[j];
      }
      next[i] = acc / denominator[i];
    }
    const double change = (next - u).lpNorm<Eigen::Infinity>();
    u.swap(next);
    if (change <= options.tol) {
      sol.values = std::move(u);
      sol.info.iterations = it;
      sol.info.final_residual = change;
      return sol;
    }
    growth = change > previous_change ? growth + 1 : 0;
    if (growth >= 10) {
      std::ostringstream os;
      os << "Jacobi iteration diverging: change grew for 10 consecutive iterations (last change " << change
         << " at iteration " << it << ")";
      throw ConvergenceError(os.str(), it, change);
    }
    previous_change = change;
  }
  std::ostringstream os;
  os << "Jacobi iteration did not reach change " << options.tol << " within " << options.max_iters
     << " iterations (last change " << previous_change << ")";
  throw ConvergenceError(os.str(), options.max_iters, previous_change);
}

double residual_norm(const DiscreteSystem& system, const VectorXd& u) {
  if (u.size() != system.size()) throw ParameterError("u does not match the system size");
  const double r = (system.matrix * u - system.rhs).norm();
  const double b = system.rhs.norm();
  return b == 0.0 ? r : r / b;
}

void write_matrix_coo(const DiscreteSystem& system, std::ostream& os) {
  os << std::setprecision(17);
  for (Index i = 0; i < system.matrix.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(system.matrix, i); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

void write_solution_csv(const QuadratureSet& quad, const VectorXd& values, std::ostream& os) {
  if (values.size() != quad.interior_size()) throw ParameterError("solution does not match the node count");
  os << std::setprecision(17);
  os << (quad.dimension == 1 ? "index,x,value\n" : "index,x,y,value\n");
  for (Index i = 0; i < values.size(); ++i) {
    const Point& x = quad.interior_nodes[i];
    os << i << ',' << x.x() << ',';
    if (quad.dimension == 2) os << x.y() << ',';
    os << values[i] << '\n';
  }
}

}  // namespace nld
