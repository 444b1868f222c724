#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "wsd/geom.hpp"

using namespace wsd;

namespace {

constexpr double kPi = std::numbers::pi;

SpherePoint random_point(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  Vec v(d + 1);
  for (int i = 0; i <= d; ++i) v[i] = g(rng);
  return SpherePoint(v);
}

}  // namespace

TEST(SpherePoint, RenormalizesOnConstruction) {
  SpherePoint p{3.0, 4.0, 0.0};
  EXPECT_NEAR(p.coords().norm(), 1.0, 1e-15);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_THROW(SpherePoint({0.0, 0.0, 0.0}), GeometryError);
  EXPECT_THROW(SpherePoint({1.0}), GeometryError);
}

TEST(GeodesicDistance, Examples) {
  SpherePoint x{1, 0, 0};
  EXPECT_EQ(geodesic_distance(x, x), 0.0);
  EXPECT_NEAR(geodesic_distance(x, SpherePoint{-1, 0, 0}), kPi, 1e-15);
  EXPECT_NEAR(geodesic_distance(x, SpherePoint{0, 1, 0}), kPi / 2, 1e-15);
  EXPECT_THROW(geodesic_distance(x, SpherePoint{1, 0, 0, 0}), GeometryError);
}

TEST(GeodesicDistance, TriangleInequalityAndSymmetry) {
  std::mt19937_64 rng(7);
  for (int d : {1, 2, 3, 5}) {
    for (int i = 0; i < 500; ++i) {
      auto a = random_point(rng, d), b = random_point(rng, d), c = random_point(rng, d);
      const double ab = geodesic_distance(a, b);
      EXPECT_EQ(ab, geodesic_distance(b, a));
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, kPi);
      EXPECT_LE(ab, geodesic_distance(a, c) + geodesic_distance(c, b) + 1e-12);
    }
  }
}

TEST(GeodesicDistance, ResolvesNearlyIdenticalPoints) {
  SpherePoint x{1, 0, 0};
  SpherePoint y{1, 1e-9, 0};
  EXPECT_NEAR(geodesic_distance(x, y), 1e-9, 1e-20);
}

TEST(TangentProject, Examples) {
  SpherePoint x{1, 0, 0};
  EXPECT_LT(tangent_project(x, x).norm(), 1e-15);
  Vec z(3);
  z << 0, 0.6, 0.8;
  EXPECT_LT((tangent_project(x, z).vec() - z).norm(), 1e-15);
  SpherePoint w{1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0};
  const Vec p = tangent_project(x, w).vec();
  EXPECT_NEAR(p[0], 0.0, 1e-15);
  EXPECT_NEAR(p[1], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(p[2], 0.0, 1e-15);
}

TEST(TangentProject, LinearAndOrthogonal) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 200; ++i) {
    auto x = random_point(rng, 3);
    Vec a(4), b(4);
    for (int j = 0; j < 4; ++j) a[j] = g(rng), b[j] = g(rng);
    const Vec lhs = tangent_project(x, Vec(2.0 * a - 3.0 * b)).vec();
    const Vec rhs = 2.0 * tangent_project(x, a).vec() - 3.0 * tangent_project(x, b).vec();
    EXPECT_LT((lhs - rhs).norm(), 1e-12);
    EXPECT_LT(std::abs(lhs.dot(x.coords())), 1e-12);
  }
}

TEST(TangentVector, RejectsNonTangent) {
  Vec v(3);
  v << 1, 0, 0;
  EXPECT_THROW(TangentVector(SpherePoint{1, 0, 0}, v), GeometryError);
}

TEST(TangentLift, Examples) {
  SpherePoint x{0, 0, 1};
  EXPECT_LT((tangent_lift(x, TangentVector(x, Vec::Zero(3))).coords() - x.coords()).norm(), 1e-15);
  Vec u(3);
  u << 0.6, 0.8, 0;
  EXPECT_LT((tangent_lift(x, TangentVector(x, u)).coords() - u).norm(), 1e-15);
  Vec big(3);
  big << 1.5, 0, 0;
  EXPECT_THROW(tangent_lift(x, TangentVector(x, big)), GeometryError);
}

TEST(TangentLift, RoundTripOnOpenHemisphere) {
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 500) {
    auto x = random_point(rng, 2);
    auto z = random_point(rng, 2);
    if (geodesic_distance(x, z) >= kPi / 2) continue;
    ++checked;
    const TangentVector u = tangent_project(x, z);
    EXPECT_LT((tangent_lift(x, u).coords() - z.coords()).norm(), 1e-10);
    EXPECT_LT((tangent_project(x, tangent_lift(x, u)).vec() - u.vec()).norm(), 1e-12);
  }
}

TEST(RadialMap, Examples) {
  Vec w(3);
  w << 2, 0, 0;
  EXPECT_LT((radial_map(w).coords() - Vec::Unit(3, 0)).norm(), 1e-15);
  Vec u(4);
  u << 1, 1, 0, 0;
  const Vec r = radial_map(u).coords();
  EXPECT_NEAR(r[0], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(r[1], 1 / std::sqrt(2.0), 1e-15);
  Vec unit(3);
  unit << 0.6, 0, 0.8;
  EXPECT_LT((radial_map(unit).coords() - unit).norm(), 1e-15);
  EXPECT_THROW(radial_map(Vec::Zero(3)), GeometryError);
}

TEST(GeodesicPoint, Examples) {
  SpherePoint a{1, 0, 0}, b{0, 1, 0};
  GeodesicArc arc(a, b);
  EXPECT_NEAR(arc.length(), kPi / 2, 1e-15);
  EXPECT_LT((geodesic_point(arc, 0.0).coords() - a.coords()).norm(), 1e-15);
  EXPECT_LT((geodesic_point(arc, 1.0).coords() - b.coords()).norm(), 1e-15);
  const Vec mid = geodesic_point(arc, 0.5).coords();
  EXPECT_NEAR(mid[0], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(mid[1], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(geodesic_point(arc, 1.5), GeometryError);
  EXPECT_THROW(geodesic_point(arc, -0.1), GeometryError);

  GeodesicArc flat(a, a);
  EXPECT_EQ(flat.length(), 0.0);
  for (double h : {0.0, 0.3, 1.0}) EXPECT_LT((geodesic_point(flat, h).coords() - a.coords()).norm(), 1e-15);

  EXPECT_THROW(GeodesicArc(a, SpherePoint{-1, 0, 0}), GeometryError);
}

TEST(GeodesicPoint, EqualSpeed) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    auto a = random_point(rng, 3), b = random_point(rng, 3);
    if (geodesic_distance(a, b) > 3.0) continue;
    GeodesicArc arc(a, b);
    const double h1 = u(rng), h2 = u(rng);
    const double got = geodesic_distance(geodesic_point(arc, h1), geodesic_point(arc, h2));
    EXPECT_NEAR(got, std::abs(h1 - h2) * arc.length(), 1e-10);
    EXPECT_NEAR(geodesic_distance(a, geodesic_point(arc, h1)), h1 * arc.length(), 1e-10);
  }
}

TEST(Cap, Membership) {
  Cap cap{SpherePoint{0, 0, 1}, 0.5};
  EXPECT_TRUE(cap.contains(SpherePoint{0, 0, 1}));
  EXPECT_TRUE(cap.contains(SpherePoint{std::sin(0.49), 0, std::cos(0.49)}));
  EXPECT_FALSE(cap.contains(SpherePoint{std::sin(0.51), 0, std::cos(0.51)}));
}

TEST(CapMeasure, Examples) {
  for (int d : {1, 2, 3, 4, 7}) {
    EXPECT_NEAR(cap_measure(d, kPi / 2), 0.5, 1e-14);
    EXPECT_NEAR(cap_measure(d, kPi), 1.0, 1e-14);
    EXPECT_EQ(cap_measure(d, 0.0), 0.0);
  }
  for (double r : {0.1, 0.7, 1.3, 2.9}) EXPECT_NEAR(cap_measure(2, r), (1 - std::cos(r)) / 2, 1e-14);
  EXPECT_THROW(cap_measure(2, -0.1), GeometryError);
  EXPECT_THROW(cap_measure(2, 4.0), GeometryError);
}

TEST(CapMeasure, ComplementaryAndMonotone) {
  for (int d : {1, 2, 3, 6}) {
    double prev = 0.0;
    for (int i = 1; i <= 60; ++i) {
      const double r = kPi * i / 60;
      const double m = cap_measure(d, r);
      EXPECT_GE(m, prev);
      prev = m;
      EXPECT_NEAR(m + cap_measure(d, kPi - r), 1.0, 1e-13);
    }
  }
}

TEST(CapMeasure, AgreesWithMonteCarlo) {
  const auto pts = mc_sphere_sample(3, 200000, 17);
  const SpherePoint c{0, 0, 0, 1};
  const double r = 1.1;
  int hits = 0;
  for (const auto& p : pts) hits += geodesic_distance(c, p) <= r;
  const double p = cap_measure(3, r);
  const double sigma = std::sqrt(p * (1 - p) / pts.size());
  EXPECT_LT(std::abs(double(hits) / pts.size() - p), 4 * sigma);
}

TEST(SphereArea, KnownValues) {
  EXPECT_NEAR(sphere_area(1), 2 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(2), 4 * kPi, 1e-13);
  EXPECT_NEAR(sphere_area(3), 2 * kPi * kPi, 1e-13);
}

TEST(McSample, DeterministicAndUniform) {
  const auto a = mc_sphere_sample(2, 1000, 42);
  const auto b = mc_sphere_sample(2, 1000, 42);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].coords(), b[i].coords());

  const std::size_t n = 1000000;
  const auto pts = mc_sphere_sample(2, n, 9);
  Vec mean = Vec::Zero(3);
  std::size_t upper = 0;
  for (const auto& p : pts) {
    mean += p.coords();
    upper += p[2] > 0;
    EXPECT_NEAR(p.coords().norm(), 1.0, 1e-12);
  }
  mean /= double(n);
  for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(mean[j]), 4 / std::sqrt(double(n)));
  EXPECT_LT(std::abs(double(upper) / n - 0.5), 4 * 0.5 / std::sqrt(double(n)));
  EXPECT_TRUE(mc_sphere_sample(2, 0, 1).empty());
}

TEST(TangentBasis, Orthonormal) {
  std::mt19937_64 rng(2);
  for (int d : {1, 2, 4}) {
    auto x = random_point(rng, d);
    const Mat b = tangent_basis(x);
    ASSERT_EQ(b.rows(), d + 1);
    ASSERT_EQ(b.cols(), d);
    EXPECT_LT((b.transpose() * b - Mat::Identity(d, d)).norm(), 1e-13);
    EXPECT_LT((b.transpose() * x.coords()).norm(), 1e-13);
  }
}
