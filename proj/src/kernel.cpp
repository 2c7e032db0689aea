#include "nld/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace nld {

namespace detail {

namespace {

struct SimpsonPanel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double simpson(double fa, double fm, double fb, double width) { return width / 6.0 * (fa + 4.0 * fm + fb); }

double refine(const std::function<double(double)>& f, const SimpsonPanel& p, double tol, int depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(p.fa, flm, p.fm, p.m - p.a);
  const double right = simpson(p.fm, frm, p.fb, p.b - p.m);
  const double delta = left + right - p.whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return refine(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
         refine(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double rel_tol,
                        int max_depth) {
  if (!(b > a)) return 0.0;
  // Coarse composite pass fixes the absolute tolerance scale.
  constexpr int panels = 64;
  const double width = (b - a) / panels;
  double coarse_abs = 0.0;
  std::vector<SimpsonPanel> parts;
  parts.reserve(panels);
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == panels) ? b : lo + width;
    const double mid = 0.5 * (lo + hi);
    SimpsonPanel p{lo, mid, hi, f(lo), f(mid), f(hi), 0.0};
    p.whole = simpson(p.fa, p.fm, p.fb, hi - lo);
    coarse_abs += std::abs(p.whole);
    parts.push_back(p);
  }
  const double tol = std::max(rel_tol * coarse_abs, 1e-300) / panels;
  double total = 0.0;
  for (const auto& p : parts) total += refine(f, p, tol, max_depth);
  return total;
}

}  // namespace detail

KernelProfile::KernelProfile(std::string name, Function r, Function rbar, Function rbarbar, double gamma0)
    : name_(std::move(name)), r_(std::move(r)), rbar_(std::move(rbar)), rbarbar_(std::move(rbarbar)),
      gamma0_(gamma0) {
  if (!r_ || !rbar_ || !rbarbar_) throw ParameterError("kernel profile '" + name_ + "' is missing a function");
  if (!(gamma0_ > 0.0)) throw ParameterError("kernel profile '" + name_ + "' needs gamma0 > 0");
}

KernelProfile KernelProfile::poly2(double amplitude) {
  if (!(amplitude > 0.0)) throw ParameterError("poly2 amplitude must be positive");
  return KernelProfile(
      "poly2", [amplitude](double r) { return amplitude * poly2_profile(ProfileKind::R, r); },
      [amplitude](double r) { return amplitude * poly2_profile(ProfileKind::Rbar, r); },
      [amplitude](double r) { return amplitude * poly2_profile(ProfileKind::Rbarbar, r); }, 0.25 * amplitude);
}

KernelProfile KernelProfile::from_profile(std::string name, Function r, double gamma0) {
  if (!r) throw ParameterError("custom profile needs R");
  // int_r^1 int_s^1 R(t) dt ds = int_r^1 (t - r) R(t) dt, so both tails are single integrals.
  auto rbar = [r](double x) {
    if (x >= 1.0) return 0.0;
    return detail::adaptive_simpson(r, x, 1.0, 1e-12);
  };
  auto rbarbar = [r](double x) {
    if (x >= 1.0) return 0.0;
    return detail::adaptive_simpson([&](double t) { return (t - x) * r(t); }, x, 1.0, 1e-12);
  };
  auto clipped = [r](double x) { return x > 1.0 ? 0.0 : r(x); };
  return KernelProfile(std::move(name), clipped, rbar, rbarbar, gamma0);
}

double KernelProfile::operator()(ProfileKind kind, double r) const {
  switch (kind) {
    case ProfileKind::R:
      return r_(r);
    case ProfileKind::Rbar:
      return rbar_(r);
    case ProfileKind::Rbarbar:
      return rbarbar_(r);
  }
  return 0.0;
}

KernelProfile profile_by_name(std::string_view name) {
  if (name == "poly2") return KernelProfile::poly2();
  throw ParameterError("unknown kernel profile '" + std::string(name) + "'");
}

double eval_profile(const KernelProfile& profile, ProfileKind kind, double r) {
  if (!(r >= 0.0)) throw DomainError("profile argument must be nonnegative");
  return profile(kind, r);
}

double eval_profile(ProfileKind kind, double r) {
  if (!(r >= 0.0)) throw DomainError("profile argument must be nonnegative");
  return poly2_profile(kind, r);
}

double unit_sphere_measure(int n) {
  switch (n) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    default:
      throw ParameterError("dimension must be 1 or 2");
  }
}

double normalization_constant(int n, const KernelProfile& profile) {
  const double sphere = unit_sphere_measure(n);
  const double moment = detail::adaptive_simpson(
      [&](double r) { return profile(ProfileKind::Rbar, 0.25 * r * r) * std::pow(r, n - 1); }, 0.0, 2.0, 1e-13);
  if (!(moment > 0.0) || !std::isfinite(moment))
    throw DegenerateKernelError("kernel profile '" + profile.name() + "' has zero integral");
  return 1.0 / (sphere * moment);
}

RescaledKernel::RescaledKernel(KernelProfile profile, double delta, int dimension)
    : profile_(std::move(profile)), delta_(delta), dimension_(dimension) {
  if (!(delta_ > 0.0)) throw ParameterError("kernel horizon delta must be positive");
  alpha_ = normalization_constant(dimension_, profile_);
  scale_ = alpha_ * std::pow(delta_, -dimension_);
  inv_four_delta2_ = 1.0 / (4.0 * delta_ * delta_);
}

double eval_rescaled(const RescaledKernel& kernel, ProfileKind kind, const Point& x, const Point& y) {
  return kernel(kind, x, y);
}

std::string_view to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::R:
      return "R";
    case ProfileKind::Rbar:
      return "Rbar";
    case ProfileKind::Rbarbar:
      return "Rbarbar";
  }
  return "?";
}

}  // namespace nld
