#include "nld/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nld {

namespace {

// Source part F_i = sum_j Rbar(x_i, x_j) f_j w_j, or sum_k c_k Rbar(x_i, y_k).
VectorXd source_term(const NonlocalProblem& problem, const QuadratureSet& quad, const VectorXd& f_samples) {
  const auto& kernel = problem.kernel();
  const Index n = quad.interior_size();
  VectorXd out = VectorXd::Zero(n);
  if (const auto* sources = std::get_if<PointSources>(&problem.rhs())) {
    for (Index i = 0; i < n; ++i)
      for (const auto& s : sources->sources)
        out[i] += s.charge * kernel(ProfileKind::Rbar, quad.interior_nodes[i], s.location);
    return out;
  }
  if (f_samples.size() != n) throw ParameterError("f samples do not match the interior node count");
  const NeighborGrid grid(quad.interior_nodes, kernel.support_radius());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    double acc = 0.0;
    grid.for_each_within(quad.interior_nodes[i], kernel.support_radius(), [&](Index j, double d2) {
      acc += kernel.at_squared_distance(ProfileKind::Rbar, d2) * f_samples[j] * quad.interior_weights[j];
    });
    out[i] = acc;
  }
  return out;
}

}  // namespace

std::string_view to_string(PenaltyMode mode) {
  switch (mode) {
    case PenaltyMode::RobinBaseline:
      return "robin_baseline";
    case PenaltyMode::FirstOrder:
      return "first_order";
    case PenaltyMode::SecondOrderGraded:
      return "second_order";
  }
  return "?";
}

PenaltyMode parse_penalty_mode(std::string_view name) {
  if (name == "robin_baseline" || name == "robin" || name == "RobinBaseline") return PenaltyMode::RobinBaseline;
  if (name == "first_order" || name == "first" || name == "FirstOrder") return PenaltyMode::FirstOrder;
  if (name == "second_order" || name == "second" || name == "second_order_graded" ||
      name == "SecondOrderGraded")
    return PenaltyMode::SecondOrderGraded;
  throw ParameterError("unknown model variant '" + std::string(name) + "'");
}

NonlocalProblem::NonlocalProblem(Domain domain, RescaledKernel kernel, PenaltyMode mode, RightHandSide rhs,
                                 ScalarField boundary_data)
    : domain_(domain), kernel_(std::move(kernel)), mode_(mode), rhs_(std::move(rhs)),
      boundary_data_(std::move(boundary_data)) {
  if (kernel_.dimension() != domain_.dimension())
    throw ParameterError("kernel dimension does not match the domain dimension");
  if (!(2.0 * kernel_.delta() < domain_.inradius()))
    throw PreconditionError("horizon too large: need 2*delta < inradius of the domain");
  if (!boundary_data_) throw ParameterError("boundary data g is required");
  if (const auto* smooth = std::get_if<SmoothField>(&rhs_); smooth && !smooth->f)
    throw ParameterError("smooth right-hand side needs a function");
  if (const auto* sources = std::get_if<PointSources>(&rhs_)) {
    for (const auto& s : sources->sources) {
      if (!domain_.contains(s.location) || distance_to_boundary(domain_, s.location) <= 2.0 * kernel_.delta())
        throw PreconditionError("point source must lie inside the domain farther than 2*delta from the boundary");
    }
  }
}

NonlocalProblem NonlocalProblem::with_mode(PenaltyMode mode) const {
  NonlocalProblem copy = *this;
  copy.mode_ = mode;
  return copy;
}

double penalty_weight(PenaltyMode mode, double distance, double delta) {
  if (mode == PenaltyMode::SecondOrderGraded) return std::min(2.0 * delta, std::max(delta * delta, distance));
  return delta;
}

double penalty_weight(PenaltyMode mode, const Point& x, double delta, const Domain& domain) {
  return penalty_weight(mode, distance_to_boundary(domain, x), delta);
}

double boundary_kernel_sum(const RescaledKernel& kernel, const QuadratureSet& quad, const Point& x) {
  double s = 0.0;
  for (Index b = 0; b < quad.boundary_size(); ++b)
    s += kernel(ProfileKind::Rbar, x, quad.boundary_nodes[b]) * quad.boundary_weights[b];
  return s;
}

double interior_kernel_sum(const RescaledKernel& kernel, ProfileKind kind, const QuadratureSet& quad,
                           const Point& x, Index skip) {
  double s = 0.0;
  for (Index j = 0; j < quad.interior_size(); ++j) {
    if (j == skip) continue;
    s += kernel(kind, x, quad.interior_nodes[j]) * quad.interior_weights[j];
  }
  return s;
}

Index nearest_interior_node(const QuadratureSet& quad, const Point& y) {
  if (quad.interior_nodes.empty()) throw PreconditionError("quadrature set has no interior nodes");
  Index best = 0;
  double best_d2 = (quad.interior_nodes[0] - y).squaredNorm();
  for (Index j = 1; j < quad.interior_size(); ++j) {
    const double d2 = (quad.interior_nodes[j] - y).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = j;
    }
  }
  return best;
}

double apply_operator(const NonlocalProblem& problem, const QuadratureSet& quad, const VectorXd& u, Index i) {
  const Index n = quad.interior_size();
  if (i < 0 || i >= n) throw std::out_of_range("node index out of range");
  if (u.size() != n) throw ParameterError("u does not match the interior node count");
  const auto& kernel = problem.kernel();
  const double delta = problem.delta();
  const Point& x = quad.interior_nodes[i];

  double diffusion = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (j == i) continue;
    diffusion += kernel(ProfileKind::R, x, quad.interior_nodes[j]) * (u[i] - u[j]) * quad.interior_weights[j];
  }
  diffusion /= delta * delta;

  const double mu = penalty_weight(problem.mode(), x, delta, problem.domain());
  double boundary = 0.0;
  if (problem.mode() == PenaltyMode::RobinBaseline) {
    for (Index b = 0; b < quad.boundary_size(); ++b) {
      const double k = kernel(ProfileKind::Rbar, x, quad.boundary_nodes[b]);
      if (k == 0.0) continue;
      boundary += k * u[nearest_interior_node(quad, quad.boundary_nodes[b])] * quad.boundary_weights[b];
    }
  } else {
    boundary = u[i] * boundary_kernel_sum(kernel, quad, x);
  }
  return diffusion + 2.0 / mu * boundary;
}

VectorXd sample_interior(const ScalarField& f, const QuadratureSet& quad) {
  VectorXd out(quad.interior_size());
  for (Index i = 0; i < out.size(); ++i) out[i] = f(quad.interior_nodes[i]);
  return out;
}

VectorXd sample_boundary(const ScalarField& g, const QuadratureSet& quad) {
  VectorXd out(quad.boundary_size());
  for (Index b = 0; b < out.size(); ++b) out[b] = g(quad.boundary_nodes[b]);
  return out;
}

VectorXd assemble_rhs(const NonlocalProblem& problem, const QuadratureSet& quad) {
  VectorXd f_samples;
  if (const auto* smooth = std::get_if<SmoothField>(&problem.rhs())) f_samples = sample_interior(smooth->f, quad);
  return assemble_rhs(problem, quad, f_samples, sample_boundary(problem.boundary_data(), quad));
}

VectorXd assemble_rhs(const NonlocalProblem& problem, const QuadratureSet& quad, const VectorXd& f_samples,
                      const VectorXd& g_samples) {
  if (g_samples.size() != quad.boundary_size()) throw ParameterError("g samples do not match the boundary node count");
  VectorXd rhs = source_term(problem, quad, f_samples);
  const auto& kernel = problem.kernel();
  const double delta = problem.delta();
  for (Index i = 0; i < rhs.size(); ++i) {
    const Point& x = quad.interior_nodes[i];
    double g_term = 0.0;
    for (Index b = 0; b < quad.boundary_size(); ++b)
      g_term += kernel(ProfileKind::Rbar, x, quad.boundary_nodes[b]) * g_samples[b] * quad.boundary_weights[b];
    if (g_term != 0.0) rhs[i] += 2.0 / penalty_weight(problem.mode(), x, delta, problem.domain()) * g_term;
  }
  return rhs;
}

double energy(const NonlocalProblem& problem, const QuadratureSet& quad, const VectorXd& u) {
  if (!is_symmetric(problem.mode()))
    throw UnsupportedModeError("the Robin baseline has no variational form; energy is undefined");
  const Index n = quad.interior_size();
  if (u.size() != n) throw ParameterError("u does not match the interior node count");
  const auto& kernel = problem.kernel();
  const double delta = problem.delta();
  const auto& w = quad.interior_weights;

  VectorXd f_samples;
  if (const auto* smooth = std::get_if<SmoothField>(&problem.rhs())) f_samples = sample_interior(smooth->f, quad);
  const VectorXd source = source_term(problem, quad, f_samples);
  const VectorXd g = sample_boundary(problem.boundary_data(), quad);

  const NeighborGrid grid(quad.interior_nodes, kernel.support_radius());
  double dirichlet = 0.0;
  double penalty = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Point& x = quad.interior_nodes[i];
    grid.for_each_within(x, kernel.support_radius(), [&](Index j, double d2) {
      const double diff = u[i] - u[j];
      dirichlet += kernel.at_squared_distance(ProfileKind::R, d2) * diff * diff * w[i] * w[j];
    });
    double mismatch = 0.0;
    for (Index b = 0; b < quad.boundary_size(); ++b) {
      const double diff = u[i] - g[b];
      mismatch += kernel(ProfileKind::Rbar, x, quad.boundary_nodes[b]) * diff * diff * quad.boundary_weights[b];
    }
    penalty += w[i] / penalty_weight(problem.mode(), x, delta, problem.domain()) * mismatch;
  }
  const double work = (w.array() * u.array() * source.array()).sum();
  return dirichlet / (4.0 * delta * delta) + penalty - work;
}

}  // namespace nld
