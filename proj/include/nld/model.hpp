#ifndef NLD_MODEL_HPP
#define NLD_MODEL_HPP

#include "nld/geometry.hpp"
#include "nld/kernel.hpp"

#include <string_view>
#include <variant>
#include <vector>

namespace nld {

/// How the boundary mismatch is penalized.
///   RobinBaseline:     (2/delta) int Rbar (u(y) - g(y)) dS   (nonsymmetric)
///   FirstOrder:        (2/delta) int Rbar (u(x) - g(y)) dS
///   SecondOrderGraded: (2/mu(x)) int Rbar (u(x) - g(y)) dS, mu = min{2 delta, max{delta^2, d(x)}}
enum class PenaltyMode { RobinBaseline, FirstOrder, SecondOrderGraded };

/// FirstOrder and SecondOrderGraded have a variational form and an M-matrix.
constexpr bool is_symmetric(PenaltyMode mode) { return mode != PenaltyMode::RobinBaseline; }

std::string_view to_string(PenaltyMode mode);
/// Accepts robin_baseline | first_order | second_order (and the enum spellings).
PenaltyMode parse_penalty_mode(std::string_view name);

struct SmoothField {
  ScalarField f;
};

struct PointSource {
  Point location;
  double charge;
};

/// Dirac sum f = sum_k c_k delta_{y_k}; its pairing with Rbar_delta is exact.
struct PointSources {
  std::vector<PointSource> sources;
};

using RightHandSide = std::variant<SmoothField, PointSources>;

/// Nonlocal Dirichlet problem. Validated on construction:
/// 2 delta < inradius, point sources farther than 2 delta from the boundary.
class NonlocalProblem {
 public:
  NonlocalProblem(Domain domain, RescaledKernel kernel, PenaltyMode mode, RightHandSide rhs,
                  ScalarField boundary_data);

  const Domain& domain() const { return domain_; }
  const RescaledKernel& kernel() const { return kernel_; }
  double delta() const { return kernel_.delta(); }
  PenaltyMode mode() const { return mode_; }
  const RightHandSide& rhs() const { return rhs_; }
  const ScalarField& boundary_data() const { return boundary_data_; }

  /// Same problem with a different penalty mode.
  NonlocalProblem with_mode(PenaltyMode mode) const;

 private:
  Domain domain_;
  RescaledKernel kernel_;
  PenaltyMode mode_;
  RightHandSide rhs_;
  ScalarField boundary_data_;
};

/// mu(x) for the given mode; `distance` is d(x, boundary).
double penalty_weight(PenaltyMode mode, double distance, double delta);
double penalty_weight(PenaltyMode mode, const Point& x, double delta, const Domain& domain);

/// s_delta(x) = int_{boundary} Rbar_delta(x, y) dS_y by the boundary quadrature.
double boundary_kernel_sum(const RescaledKernel& kernel, const QuadratureSet& quad, const Point& x);

/// int_Omega K_delta(x, y) dy by the interior quadrature, for K in the hierarchy.
/// Node `skip` (if >= 0) is left out of the sum.
double interior_kernel_sum(const RescaledKernel& kernel, ProfileKind kind, const QuadratureSet& quad,
                           const Point& x, Index skip = -1);

/// Index of the interior node closest to `y` (used by the Robin baseline to read u on the boundary).
Index nearest_interior_node(const QuadratureSet& quad, const Point& y);

/// L u at interior node i:
///   (1/delta^2) sum_j R_delta(x_i, x_j) (u_i - u_j) w_j + (2/mu_i) u_i s_delta(x_i)
/// for the symmetric modes; the Robin baseline reads u at the node nearest each boundary node instead of u_i.
double apply_operator(const NonlocalProblem& problem, const QuadratureSet& quad, const VectorXd& u, Index i);

/// Right-hand side sampled from the problem's f (or point sources) and g.
VectorXd assemble_rhs(const NonlocalProblem& problem, const QuadratureSet& quad);

/// Right-hand side from nodal samples: f at interior nodes (ignored, may be empty,
/// when the problem carries point sources) and g at boundary nodes.
VectorXd assemble_rhs(const NonlocalProblem& problem, const QuadratureSet& quad, const VectorXd& f_samples,
                      const VectorXd& g_samples);

/// Discrete variational energy
///   (1/4 delta^2) sum_ij R_ij (u_i - u_j)^2 w_i w_j + sum_i (w_i/mu_i) sum_b Rbar_ib (u_i - g_b)^2 w_b
///   - sum_i w_i u_i F_i,
/// F_i the source part of the right-hand side. Its gradient is W (A u - b).
double energy(const NonlocalProblem& problem, const QuadratureSet& quad, const VectorXd& u);

/// f sampled at interior nodes and g at boundary nodes.
VectorXd sample_interior(const ScalarField& f, const QuadratureSet& quad);
VectorXd sample_boundary(const ScalarField& g, const QuadratureSet& quad);

}  // namespace nld

#endif
