#ifndef NLD_TYPES_HPP
#define NLD_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <functional>
#include <stdexcept>
#include <string>

namespace nld {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

/// Spatial point. One-dimensional problems use the first coordinate and keep
/// the second at zero, so distances are the same expression in both cases.
using Point = Point2<double>;

using VectorXd = Vector<double>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Index = Eigen::Index;

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Point(const Point&)>;

// Error vocabulary. Every failure the library reports derives from one of the
// standard exception families so callers can catch broadly.

/// Point or argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid numeric parameter (nonpositive spacing, bad dimension, ...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateKernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation is not defined for the requested penalty mode.
class UnsupportedModeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Iterative solver stopped without meeting its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double last_change)
      : std::runtime_error(what), iterations_(iterations), last_change_(last_change) {}

  int iterations() const noexcept { return iterations_; }
  double last_change() const noexcept { return last_change_; }

 private:
  int iterations_;
  double last_change_;
};

}  // namespace nld

#endif
