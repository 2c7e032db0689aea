#ifndef NLD_SOLVER_HPP
#define NLD_SOLVER_HPP

#include "nld/model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace nld {

/// Collocated linear system A u = b over the interior nodes; row i is node i.
struct DiscreteSystem {
  SparseMatrix matrix;
  VectorXd rhs;
  /// Interior quadrature weights. W A is symmetric for the symmetric modes.
  VectorXd weights;
  /// (2/mu_i) s_delta(x_i): the row sums of A in the symmetric modes.
  VectorXd boundary_penalty;
  /// mu(x_i)
  VectorXd penalty_weights;
  std::vector<Point> nodes;
  PenaltyMode mode = PenaltyMode::FirstOrder;
  double delta = 0.0;
  double h = 0.0;
  std::string fingerprint;

  Index size() const { return matrix.rows(); }
};

struct SolverInfo {
  std::string method;
  int iterations = 0;
  double final_residual = 0.0;
};

struct Solution {
  VectorXd values;
  std::string fingerprint;
  SolverInfo info;
};

/// Finest cell size the assembly accepts: delta^2/2 in 1D, delta/16 in 2D.
double max_resolution(int dimension, double delta);

/// Throws PreconditionError when h is coarser than max_resolution.
void check_resolution(int dimension, double delta, double h);

std::string problem_fingerprint(const NonlocalProblem& problem, const QuadratureSet& quad);

/// Assembles
///   A_ii = (1/delta^2) sum_{j != i} R_ij w_j + (2/mu_i) s_delta(x_i),  A_ij = -(1/delta^2) R_ij w_j,
/// plus, for the Robin baseline, +(2/delta) Rbar(x_i, y_b) w_b in the column of the
/// interior node nearest to each boundary node y_b.
DiscreteSystem assemble_system(const NonlocalProblem& problem, const QuadratureSet& quad);

/// Same matrix as assemble_system with a caller-supplied right-hand side.
DiscreteSystem assemble_system(const NonlocalProblem& problem, const QuadratureSet& quad, VectorXd rhs);

/// Diagonally preconditioned conjugate gradients on the symmetrized system W A u = W b.
/// Stops when ||A u - b|| <= tol ||b||; at most 10 n iterations (or `max_iters` if positive).
Solution solve_cg(const DiscreteSystem& system, double tol, int max_iters = -1);

/// Diagonally preconditioned BiCGSTAB on A u = b, for the nonsymmetric Robin baseline
/// (any mode is accepted). Stops when ||A u - b|| <= tol ||b||.
Solution solve_bicgstab(const DiscreteSystem& system, double tol, int max_iters = -1);

struct JacobiOptions {
  double tol = 1e-10;
  int max_iters = 200000;
  /// Starting iterate; zero when empty.
  VectorXd initial;
};

/// Fixed-point iteration of the closed form
///   u_i = [delta^2 F_i + sum_j R_ij w_j u_j + (2 delta^2/mu_i) G_i] / [w_i + (2 delta^2/mu_i) s_i],
/// G_i = sum_b Rbar_ib g_b w_b, w_i = sum_{j != i} R_ij w_j. Undamped; stops when the max-norm
/// change is <= tol. Throws ConvergenceError past max_iters or when the change grows ten
/// iterations in a row.
Solution solve_jacobi(const NonlocalProblem& problem, const QuadratureSet& quad, const JacobiOptions& options = {});

/// ||A u - b|| / ||b||, or ||A u|| when b = 0.
double residual_norm(const DiscreteSystem& system, const VectorXd& u);

/// "row col value" per line, zero-based.
void write_matrix_coo(const DiscreteSystem& system, std::ostream& os);

/// index,x[,y],value
void write_solution_csv(const QuadratureSet& quad, const VectorXd& values, std::ostream& os);

}  // namespace nld

#endif
