#include "nld/geometry.hpp"

#include <limits>
#include <numbers>
#include <sstream>

namespace nld {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Number of equal pieces of `length` so that each is at most `h`. Exact
// divisions are kept exact despite roundoff in length / h.
Index piece_count(double length, double h) {
  const double ratio = length / h;
  const double nearest = std::round(ratio);
  if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * nearest) return static_cast<Index>(nearest);
  return std::max<Index>(1, static_cast<Index>(std::ceil(ratio)));
}

}  // namespace

Domain Domain::interval(double a, double b) {
  if (!(a < b)) throw ParameterError("interval requires a < b");
  return Domain(Interval{a, b});
}

Domain Domain::disk(const Point& center, double radius) {
  if (!(radius > 0.0)) throw ParameterError("disk requires radius > 0");
  return Domain(Disk{center, radius});
}

int Domain::dimension() const {
  return std::visit(Overloaded{[](const Interval&) { return 1; }, [](const Disk&) { return 2; }}, shape_);
}

double Domain::measure() const {
  return std::visit(Overloaded{[](const Interval& s) { return s.b - s.a; },
                               [](const Disk& s) { return std::numbers::pi * s.radius * s.radius; }},
                    shape_);
}

double Domain::boundary_measure() const {
  return std::visit(
      Overloaded{[](const Interval&) { return 2.0; }, [](const Disk& s) { return kTwoPi * s.radius; }}, shape_);
}

double Domain::diameter() const {
  return std::visit(
      Overloaded{[](const Interval& s) { return s.b - s.a; }, [](const Disk& s) { return 2.0 * s.radius; }},
      shape_);
}

double Domain::inradius() const { return 0.5 * diameter(); }

bool Domain::contains(const Point& x, double tol) const {
  return std::visit(Overloaded{[&](const Interval& s) { return x.x() >= s.a - tol && x.x() <= s.b + tol; },
                               [&](const Disk& s) { return (x - s.center).norm() <= s.radius + tol; }},
                    shape_);
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{[&](const Interval& s) { os << "interval(" << s.a << "," << s.b << ")"; },
                        [&](const Disk& s) {
                          os << "disk((" << s.center.x() << "," << s.center.y() << ")," << s.radius << ")";
                        }},
             shape_);
  return os.str();
}

bool QuadratureSet::uniform_weights() const {
  if (interior_weights.size() == 0) return true;
  const double lo = interior_weights.minCoeff();
  const double hi = interior_weights.maxCoeff();
  return hi - lo <= 1e-14 * hi;
}

QuadratureSet build_interior_quadrature(const Domain& domain, double h) {
  if (!(h > 0.0)) throw ParameterError("cell size h must be positive");
  if (!(h < domain.diameter())) throw ParameterError("cell size h must be smaller than the domain diameter");
  QuadratureSet q;
  q.dimension = domain.dimension();
  std::visit(Overloaded{[&](const Interval& s) {
                          const Index n = piece_count(s.b - s.a, h);
                          const double cell = (s.b - s.a) / static_cast<double>(n);
                          q.resolution_h = cell;
                          q.interior_nodes.reserve(n);
                          for (Index i = 0; i < n; ++i)
                            q.interior_nodes.emplace_back(s.a + (static_cast<double>(i) + 0.5) * cell, 0.0);
                          q.interior_weights = VectorXd::Constant(n, cell);
                        },
                        [&](const Disk& s) {
                          const Index rings = piece_count(s.radius, h);
                          const double dr = s.radius / static_cast<double>(rings);
                          q.resolution_h = dr;
                          std::vector<double> weights;
                          for (Index k = 0; k < rings; ++k) {
                            const double r = (static_cast<double>(k) + 0.5) * dr;
                            const Index m = piece_count(kTwoPi * r, h);
                            const double dtheta = kTwoPi / static_cast<double>(m);
                            for (Index j = 0; j < m; ++j) {
                              const double theta = (static_cast<double>(j) + 0.5) * dtheta;
                              q.interior_nodes.push_back(s.center + r * Point(std::cos(theta), std::sin(theta)));
                              weights.push_back(r * dr * dtheta);
                            }
                          }
                          q.interior_weights = Eigen::Map<const VectorXd>(weights.data(), weights.size());
                        }},
             domain.shape());
  return q;
}

QuadratureSet build_boundary_quadrature(const Domain& domain, double h_b) {
  if (!(h_b > 0.0)) throw ParameterError("boundary spacing h_b must be positive");
  QuadratureSet q;
  q.dimension = domain.dimension();
  std::visit(Overloaded{[&](const Interval& s) {
                          q.boundary_nodes = {Point(s.a, 0.0), Point(s.b, 0.0)};
                          q.boundary_weights = VectorXd::Ones(2);
                          q.boundary_normals = {Point(-1.0, 0.0), Point(1.0, 0.0)};
                        },
                        [&](const Disk& s) {
                          const Index m = piece_count(kTwoPi * s.radius, h_b);
                          const double dtheta = kTwoPi / static_cast<double>(m);
                          q.boundary_weights = VectorXd::Constant(m, s.radius * dtheta);
                          for (Index j = 0; j < m; ++j) {
                            const double theta = static_cast<double>(j) * dtheta;
                            const Point nu(std::cos(theta), std::sin(theta));
                            q.boundary_nodes.push_back(s.center + s.radius * nu);
                            q.boundary_normals.push_back(nu);
                          }
                        }},
             domain.shape());
  return q;
}

QuadratureSet build_quadrature(const Domain& domain, double h, double h_b) {
  QuadratureSet q = build_interior_quadrature(domain, h);
  QuadratureSet b = build_boundary_quadrature(domain, h_b > 0.0 ? h_b : h);
  q.boundary_nodes = std::move(b.boundary_nodes);
  q.boundary_weights = std::move(b.boundary_weights);
  q.boundary_normals = std::move(b.boundary_normals);
  return q;
}

BoundaryProjection distance_and_projection(const Domain& domain, const Point& x) {
  constexpr double slack = 1e-12;
  if (!domain.contains(x, slack)) throw DomainError("point lies outside the closed domain");
  return std::visit(Overloaded{[&](const Interval& s) {
                                 const double to_a = x.x() - s.a;
                                 const double to_b = s.b - x.x();
                                 if (to_a <= to_b)
                                   return BoundaryProjection{std::max(0.0, to_a), Point(s.a, 0.0), Point(-1.0, 0.0)};
                                 return BoundaryProjection{std::max(0.0, to_b), Point(s.b, 0.0), Point(1.0, 0.0)};
                               },
                               [&](const Disk& s) {
                                 const Point offset = x - s.center;
                                 const double r = offset.norm();
                                 const Point nu = r > 0.0 ? Point(offset / r) : Point(1.0, 0.0);
                                 return BoundaryProjection{std::max(0.0, s.radius - r), Point(s.center + s.radius * nu),
                                                           nu};
                               }},
                    domain.shape());
}

double distance_to_boundary(const Domain& domain, const Point& x) {
  return distance_and_projection(domain, x).distance;
}

bool in_boundary_layer(const Domain& domain, const Point& x, double eps) {
  return domain.contains(x) && distance_to_boundary(domain, x) < eps;
}

NeighborGrid::NeighborGrid(std::span<const Point> points, double cell_size)
    : points_(points), cell_size_(cell_size) {
  if (!(cell_size_ > 0.0)) throw ParameterError("neighbor grid cell size must be positive");
  Point lo = Point::Constant(std::numeric_limits<double>::max());
  Point hi = Point::Constant(std::numeric_limits<double>::lowest());
  for (const auto& p : points_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (points_.empty()) lo = hi = Point::Zero();
  origin_ = lo;
  nx_ = static_cast<int>(std::floor((hi.x() - lo.x()) / cell_size_)) + 1;
  ny_ = static_cast<int>(std::floor((hi.y() - lo.y()) / cell_size_)) + 1;
  const std::size_t cells = static_cast<std::size_t>(nx_) * ny_;
  start_.assign(cells + 1, 0);
  std::vector<std::size_t> cell_index(points_.size());
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const auto [cx, cy] = cell_of(points_[k]);
    cell_index[k] = static_cast<std::size_t>(cy) * nx_ + cx;
    ++start_[cell_index[k] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) start_[c + 1] += start_[c];
  order_.resize(points_.size());
  std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
  for (std::size_t k = 0; k < points_.size(); ++k) order_[fill[cell_index[k]]++] = static_cast<Index>(k);
}

std::pair<int, int> NeighborGrid::cell_of(const Point& x) const {
  const int cx = static_cast<int>(std::floor((x.x() - origin_.x()) / cell_size_));
  const int cy = static_cast<int>(std::floor((x.y() - origin_.y()) / cell_size_));
  return {std::clamp(cx, 0, nx_ - 1), std::clamp(cy, 0, ny_ - 1)};
}

Index NeighborGrid::nearest(const Point& x) const {
  if (points_.empty()) throw PreconditionError("nearest query on an empty point set");
  Index best = -1;
  double best_d2 = std::numeric_limits<double>::max();
  // Grow the search radius until something is found, then one more ring for exactness.
  for (double radius = cell_size_;; radius *= 2.0) {
    for_each_within(x, radius, [&](Index j, double d2) {
      if (d2 < best_d2 || (d2 == best_d2 && j < best)) {
        best_d2 = d2;
        best = j;
      }
    });
    if (best >= 0) break;
  }
  return best;
}

}  // namespace nld
