#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace wsd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown for dimension mismatches, empty inputs and out-of-range parameters.
class GeometryError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Unit vector in R^{d+1}. The constructor renormalizes.
class SpherePoint {
public:
  SpherePoint() = default;
  explicit SpherePoint(Vec coords);
  SpherePoint(std::initializer_list<double> coords);

  /// Sphere dimension d (ambient dimension minus one).
  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  int ambient_dim() const { return static_cast<int>(coords_.size()); }
  const Vec& coords() const { return coords_; }
  double operator[](int i) const { return coords_[i]; }

  SpherePoint antipode() const;

private:
  Vec coords_;
};

/// Vector in the tangent space T_x = {v : (x, v) = 0}.
class TangentVector {
public:
  TangentVector(SpherePoint base, Vec vec);

  const SpherePoint& base() const { return base_; }
  const Vec& vec() const { return vec_; }
  double norm() const { return vec_.norm(); }

private:
  SpherePoint base_;
  Vec vec_;
};

/// Closed spherical cap A(center, radius).
struct Cap {
  SpherePoint center;
  double radius = 0.0;

  bool contains(const SpherePoint& z) const;
};

/// Shortest great-circle arc between two non-antipodal points.
class GeodesicArc {
public:
  GeodesicArc(SpherePoint start, SpherePoint end);

  const SpherePoint& start() const { return start_; }
  const SpherePoint& end() const { return end_; }
  double length() const { return length_; }

private:
  SpherePoint start_;
  SpherePoint end_;
  double length_;
  Vec direction_;  // unit tangent at start toward end; zero for degenerate arcs

  friend SpherePoint geodesic_point(const GeodesicArc& arc, double h);
};

double geodesic_distance(const SpherePoint& x, const SpherePoint& y);

/// Orthogonal projection onto T_x: p(z) = z - (x,z) x.
TangentVector tangent_project(const SpherePoint& x, const Vec& z);
inline TangentVector tangent_project(const SpherePoint& x, const SpherePoint& z) {
  return tangent_project(x, z.coords());
}

/// Inverse of the projection on the hemisphere around x: u + sqrt(1-|u|^2) x.
SpherePoint tangent_lift(const SpherePoint& x, const TangentVector& u);

/// Radial projection w / |w|.
SpherePoint radial_map(const Vec& w);

/// Equal-speed parametrization of the arc, h in [0, 1].
SpherePoint geodesic_point(const GeodesicArc& arc, double h);

/// Normalized measure of a cap of the given geodesic radius on S^d.
double cap_measure(int d, double radius);

/// Surface area of the unit sphere S^d (unnormalized).
double sphere_area(int d);

/// Uniform samples on S^d from normalized Gaussian deviates.
std::vector<SpherePoint> mc_sphere_sample(int d, std::size_t count, std::uint64_t seed);

/// Orthonormal basis of T_x as the columns of a (d+1) x d matrix.
Mat tangent_basis(const SpherePoint& x);

void require_same_dim(const SpherePoint& x, const SpherePoint& y);

}  // namespace wsd
