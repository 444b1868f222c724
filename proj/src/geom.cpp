#include "wsd/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/QR>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace wsd {

namespace {

constexpr double kTangentTol = 1e-10;

}  // namespace

SpherePoint::SpherePoint(Vec coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) {
    throw GeometryError("SpherePoint needs at least 2 coordinates (d >= 1)");
  }
  const double n = coords_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw GeometryError("SpherePoint from zero or non-finite vector");
  }
  // leave unit vectors bit-identical so that reading back written points is exact
  if (std::abs(n - 1.0) > 2.0 * std::numeric_limits<double>::epsilon()) coords_ /= n;
}

SpherePoint::SpherePoint(std::initializer_list<double> coords)
    : SpherePoint(Eigen::Map<const Vec>(coords.begin(), static_cast<Eigen::Index>(coords.size()))) {}

SpherePoint SpherePoint::antipode() const { return SpherePoint(Vec(-coords_)); }

TangentVector::TangentVector(SpherePoint base, Vec vec) : base_(std::move(base)), vec_(std::move(vec)) {
  if (vec_.size() != base_.coords().size()) {
    throw GeometryError("tangent vector dimension mismatch");
  }
  const double scale = std::max(1.0, vec_.norm());
  if (std::abs(base_.coords().dot(vec_)) > kTangentTol * scale) {
    throw GeometryError("vector is not tangent at its base point");
  }
}

bool Cap::contains(const SpherePoint& z) const { return geodesic_distance(center, z) <= radius; }

void require_same_dim(const SpherePoint& x, const SpherePoint& y) {
  if (x.coords().size() != y.coords().size()) {
    throw GeometryError("sphere points of different dimension");
  }
}

double geodesic_distance(const SpherePoint& x, const SpherePoint& y) {
  require_same_dim(x, y);
  // atan2 form of arccos((x,y)); keeps full precision near 0 and pi.
  const double chord = (x.coords() - y.coords()).norm();
  const double cochord = (x.coords() + y.coords()).norm();
  const double angle = 2.0 * std::atan2(chord, cochord);
  return std::clamp(angle, 0.0, std::numbers::pi);
}

TangentVector tangent_project(const SpherePoint& x, const Vec& z) {
  if (z.size() != x.coords().size()) {
    throw GeometryError("tangent_project: dimension mismatch");
  }
  Vec v = z - x.coords().dot(z) * x.coords();
  // one extra pass removes the rounding residue along x
  v -= x.coords().dot(v) * x.coords();
  return TangentVector(x, std::move(v));
}

SpherePoint tangent_lift(const SpherePoint& x, const TangentVector& u) {
  if (u.vec().size() != x.coords().size()) {
    throw GeometryError("tangent_lift: dimension mismatch");
  }
  const double n2 = u.vec().squaredNorm();
  if (n2 > 1.0 + 1e-12) {
    throw GeometryError("tangent_lift: |u| > 1, outside the hemisphere chart");
  }
  return SpherePoint(Vec(u.vec() + std::sqrt(std::max(0.0, 1.0 - n2)) * x.coords()));
}

SpherePoint radial_map(const Vec& w) {
  if (!(w.norm() > 0.0)) {
    throw GeometryError("radial_map: zero vector");
  }
  return SpherePoint(w);
}

GeodesicArc::GeodesicArc(SpherePoint start, SpherePoint end) : start_(std::move(start)), end_(std::move(end)) {
  require_same_dim(start_, end_);
  length_ = geodesic_distance(start_, end_);
  if (length_ > std::numbers::pi - 1e-9) {
    throw GeometryError("geodesic arc between antipodal points is ambiguous");
  }
  Vec tangent = end_.coords() - start_.coords().dot(end_.coords()) * start_.coords();
  const double n = tangent.norm();
  direction_ = n > 0.0 ? Vec(tangent / n) : Vec(Vec::Zero(start_.coords().size()));
}

SpherePoint geodesic_point(const GeodesicArc& arc, double h) {
  if (!(h >= 0.0 && h <= 1.0)) {
    throw GeometryError("geodesic_point: parameter outside [0, 1]");
  }
  if (h == 0.0 || arc.length_ == 0.0) {
    return arc.start_;
  }
  if (h == 1.0) {
    return arc.end_;
  }
  const double s = h * arc.length_;
  return SpherePoint(Vec(std::cos(s) * arc.start_.coords() + std::sin(s) * arc.direction_));
}

double cap_measure(int d, double radius) {
  if (d < 1) {
    throw GeometryError("cap_measure: d must be >= 1");
  }
  if (!(radius >= 0.0 && radius <= std::numbers::pi)) {
    throw GeometryError("cap_measure: radius outside [0, pi]");
  }
  // int_0^r sin^{d-1} / int_0^pi sin^{d-1} = I_{(1 - cos r)/2}(d/2, d/2)
  const double x = std::clamp(0.5 * (1.0 - std::cos(radius)), 0.0, 1.0);
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  return boost::math::ibeta(0.5 * d, 0.5 * d, x);
}

double sphere_area(int d) {
  const double half = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / boost::math::tgamma(half);
}

std::vector<SpherePoint> mc_sphere_sample(int d, std::size_t count, std::uint64_t seed) {
  if (d < 1) {
    throw GeometryError("mc_sphere_sample: d must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SpherePoint> out;
  out.reserve(count);
  Vec v(d + 1);
  while (out.size() < count) {
    for (int i = 0; i <= d; ++i) v[i] = normal(rng);
    if (v.norm() > 1e-300) out.emplace_back(v);
  }
  return out;
}

Mat tangent_basis(const SpherePoint& x) {
  const Eigen::Index n = x.coords().size();
  Eigen::HouseholderQR<Mat> qr(Mat(x.coords()));
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - 1);
}

}  // namespace wsd
