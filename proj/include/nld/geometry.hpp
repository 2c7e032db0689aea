#ifndef NLD_GEOMETRY_HPP
#define NLD_GEOMETRY_HPP

#include "nld/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace nld {

struct Interval {
  double a;
  double b;
};

struct Disk {
  Point center;
  double radius;
};

/// Bounded domain with smooth boundary: an interval or a disk.
class Domain {
 public:
  using Shape = std::variant<Interval, Disk>;

  static Domain interval(double a, double b);
  static Domain disk(const Point& center, double radius);

  const Shape& shape() const { return shape_; }
  int dimension() const;
  /// Length (interval) or area (disk).
  double measure() const;
  /// 2 for an interval (two unit endpoint atoms), circumference for a disk.
  double boundary_measure() const;
  double diameter() const;
  /// Radius of the largest inscribed ball.
  double inradius() const;
  /// Membership in the closure, with absolute slack `tol`.
  bool contains(const Point& x, double tol = 0.0) const;
  std::string describe() const;

 private:
  explicit Domain(Shape shape) : shape_(shape) {}
  Shape shape_;
};

/// Interior nodes/weights and boundary nodes/weights/normals.
struct QuadratureSet {
  int dimension = 1;
  double resolution_h = 0.0;
  std::vector<Point> interior_nodes;
  VectorXd interior_weights;
  std::vector<Point> boundary_nodes;
  VectorXd boundary_weights;
  std::vector<Point> boundary_normals;

  Index interior_size() const { return static_cast<Index>(interior_nodes.size()); }
  Index boundary_size() const { return static_cast<Index>(boundary_nodes.size()); }
  /// True when all interior weights agree to 1e-14 relative (the 1D midpoint grid).
  bool uniform_weights() const;
};

/// Interval: midpoint rule on uniform cells no wider than h.
/// Disk: polar grid, radial midpoints, per-ring angular count keeping arc spacing <= h.
QuadratureSet build_interior_quadrature(const Domain& domain, double h);

/// Interval: endpoint atoms. Disk: equispaced arc nodes with spacing <= h_b.
QuadratureSet build_boundary_quadrature(const Domain& domain, double h_b);

/// Both parts in one set; the boundary spacing defaults to h.
QuadratureSet build_quadrature(const Domain& domain, double h, double h_b = 0.0);

struct BoundaryProjection {
  double distance;
  Point nearest;
  Point normal;
};

/// Distance to the boundary, the nearest boundary point and the outward normal
/// there; x = nearest - distance * normal. Ties: interval midpoint projects to a,
/// disk center projects to angle 0.
BoundaryProjection distance_and_projection(const Domain& domain, const Point& x);

double distance_to_boundary(const Domain& domain, const Point& x);

/// x in Omega_eps, the interior layer d(x) < eps.
bool in_boundary_layer(const Domain& domain, const Point& x, double eps);

/// Uniform bucket grid over a fixed point cloud, for radius queries.
class NeighborGrid {
 public:
  NeighborGrid(std::span<const Point> points, double cell_size);

  /// Calls f(index, squared_distance) for every point within `radius` of x.
  /// Visit order is deterministic.
  template <typename F>
  void for_each_within(const Point& x, double radius, F&& f) const {
    const double r2 = radius * radius;
    const auto [ix, iy] = cell_of(x);
    const int reach = static_cast<int>(std::ceil(radius / cell_size_));
    for (int cy = std::max(0, iy - reach); cy <= std::min(ny_ - 1, iy + reach); ++cy) {
      for (int cx = std::max(0, ix - reach); cx <= std::min(nx_ - 1, ix + reach); ++cx) {
        const auto cell = static_cast<std::size_t>(cy) * nx_ + cx;
        for (auto k = start_[cell]; k < start_[cell + 1]; ++k) {
          const Index j = order_[k];
          const double d2 = (points_[j] - x).squaredNorm();
          if (d2 <= r2) f(j, d2);
        }
      }
    }
  }

  /// Index of the closest point to x (smallest index on ties).
  Index nearest(const Point& x) const;

 private:
  std::pair<int, int> cell_of(const Point& x) const;

  std::span<const Point> points_;
  double cell_size_;
  Point origin_;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::size_t> start_;
  std::vector<Index> order_;
};

}  // namespace nld

#endif
