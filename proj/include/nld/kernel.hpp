#ifndef NLD_KERNEL_HPP
#define NLD_KERNEL_HPP

#include "nld/types.hpp"

#include <string>
#include <string_view>

namespace nld {

/// Which member of the kernel hierarchy to evaluate: the profile R, its tail
/// integral Rbar(r) = int_r^inf R, or the second tail Rbarbar(r) = int_r^inf Rbar.
enum class ProfileKind { R, Rbar, Rbarbar };

/// Closed form of the default profile R(r) = (1 - r)_+^2 and its tails.
template <typename Scalar>
Scalar poly2_profile(ProfileKind kind, Scalar r) {
  if (r >= Scalar(1)) return Scalar(0);
  const Scalar s = Scalar(1) - r;
  switch (kind) {
    case ProfileKind::R:
      return s * s;
    case ProfileKind::Rbar:
      return s * s * s / Scalar(3);
    case ProfileKind::Rbarbar:
      return s * s * s * s / Scalar(12);
  }
  return Scalar(0);
}

/// Radial profile on [0, inf) with compact support in [0, 1], together with
/// its two tail integrals. Immutable after construction.
class KernelProfile {
 public:
  using Function = std::function<double(double)>;

  KernelProfile(std::string name, Function r, Function rbar, Function rbarbar, double gamma0);

  /// (1 - r)_+^2 scaled by `amplitude`; gamma0 = amplitude / 4.
  static KernelProfile poly2(double amplitude = 1.0);

  /// Custom profile given only R; the tails are integrated numerically.
  /// `r` must vanish on (1, inf).
  static KernelProfile from_profile(std::string name, Function r, double gamma0);

  double operator()(ProfileKind kind, double r) const;

  const std::string& name() const { return name_; }
  double gamma0() const { return gamma0_; }
  /// Support in the r = |x - y|^2 / (4 delta^2) variable.
  static constexpr double support_radius() { return 1.0; }

 private:
  std::string name_;
  Function r_;
  Function rbar_;
  Function rbarbar_;
  double gamma0_;
};

/// Profile lookup for configuration files. Known: "poly2".
KernelProfile profile_by_name(std::string_view name);

/// Evaluates a member of the hierarchy; throws DomainError for r < 0.
double eval_profile(const KernelProfile& profile, ProfileKind kind, double r);
/// Same, for the default poly2 profile.
double eval_profile(ProfileKind kind, double r);

/// Surface measure of the unit sphere in R^n (2 for n = 1, 2 pi for n = 2).
double unit_sphere_measure(int n);

/// alpha_n such that alpha_n S_n int_0^2 Rbar(r^2/4) r^(n-1) dr = 1.
double normalization_constant(int n, const KernelProfile& profile);

/// Kernel family rescaled to horizon delta:
///   K_delta(x, y) = alpha_n delta^-n K(|x - y|^2 / (4 delta^2)).
/// Vanishes for |x - y| > 2 delta.
class RescaledKernel {
 public:
  RescaledKernel(KernelProfile profile, double delta, int dimension);

  double operator()(ProfileKind kind, const Point& x, const Point& y) const {
    return at_squared_distance(kind, (x - y).squaredNorm());
  }

  double at_squared_distance(ProfileKind kind, double dist2) const {
    const double r = dist2 * inv_four_delta2_;
    if (r > 1.0) return 0.0;
    return scale_ * profile_(kind, r);
  }

  const KernelProfile& profile() const { return profile_; }
  double delta() const { return delta_; }
  int dimension() const { return dimension_; }
  double alpha() const { return alpha_; }
  double sphere_measure() const { return unit_sphere_measure(dimension_); }
  /// alpha_n delta^-n
  double scale() const { return scale_; }
  double support_radius() const { return 2.0 * delta_; }

 private:
  KernelProfile profile_;
  double delta_;
  int dimension_;
  double alpha_;
  double scale_;
  double inv_four_delta2_;
};

double eval_rescaled(const RescaledKernel& kernel, ProfileKind kind, const Point& x, const Point& y);

std::string_view to_string(ProfileKind kind);

namespace detail {

/// Adaptive Simpson quadrature of f on [a, b] to relative tolerance `rel_tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                        int max_depth = 48);

}  // namespace detail

}  // namespace nld

#endif
