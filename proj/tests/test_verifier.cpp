#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "wsd/verifier.hpp"

using namespace wsd;

namespace {

std::vector<SpherePoint> octahedron() {
  return {SpherePoint{1, 0, 0}, SpherePoint{-1, 0, 0}, SpherePoint{0, 1, 0},
          SpherePoint{0, -1, 0}, SpherePoint{0, 0, 1}, SpherePoint{0, 0, -1}};
}

std::vector<SpherePoint> tetrahedron() {
  return {SpherePoint{1, 1, 1}, SpherePoint{1, -1, -1}, SpherePoint{-1, 1, -1}, SpherePoint{-1, -1, 1}};
}

std::vector<SpherePoint> anchors(const ConvexPartition& part) {
  std::vector<SpherePoint> out;
  for (const Cell& c : part.cells) out.push_back(c.anchor);
  return out;
}

long long binom(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST(LowerBound, TableAndSmallCases) {
  const long long expected[] = {2, 4, 6, 9, 12};
  for (int t = 1; t <= 5; ++t) EXPECT_EQ(lower_bound(2, t), expected[t - 1]);
  for (int k = 1; k <= 6; ++k) {
    EXPECT_EQ(lower_bound(1, 2 * k), 2 * k + 1);
    EXPECT_EQ(lower_bound(1, 2 * k + 1), 2 * k + 2);
  }
  EXPECT_EQ(lower_bound(1, 1), 2);
  EXPECT_EQ(lower_bound(3, 0), 1);
  // direct binomials for a larger case: d = 4, t = 6 and t = 7
  EXPECT_EQ(lower_bound(4, 6), binom(7, 4) + binom(6, 4));
  EXPECT_EQ(lower_bound(4, 7), 2 * binom(7, 4));
  EXPECT_THROW(lower_bound(0, 2), GeometryError);
  EXPECT_THROW(lower_bound(2, -1), GeometryError);
}

TEST(VerifyDesign, PlatonicSolids) {
  const DesignReport tet = verify_design(HarmonicSpace(2, 2), tetrahedron(), 1e-12);
  EXPECT_TRUE(tet.is_design);
  EXPECT_TRUE(tet.crosscheck_pass);
  EXPECT_NEAR(tet.min_separation, std::acos(-1.0 / 3.0), 1e-12);

  const DesignReport oct = verify_design(HarmonicSpace(2, 3), octahedron(), 1e-12);
  EXPECT_TRUE(oct.is_design);
  EXPECT_TRUE(oct.crosscheck_pass);
  EXPECT_NEAR(oct.min_separation, std::numbers::pi / 2, 1e-14);
  EXPECT_NEAR(oct.separation_scaled, std::numbers::pi / 2 * std::sqrt(6.0), 1e-12);
  EXPECT_GE(oct.n, oct.lower_bound);

  const DesignReport oct4 = verify_design(HarmonicSpace(2, 4), octahedron(), 1e-9);
  EXPECT_FALSE(oct4.is_design);
  EXPECT_FALSE(oct4.crosscheck_pass);
  EXPECT_EQ(oct4.residual_per_degree.size(), 4u);
  EXPECT_GT(oct4.residual_per_degree[3], 0.01);
  EXPECT_LT(oct4.residual_per_degree[0] + oct4.residual_per_degree[1] + oct4.residual_per_degree[2], 1e-24);
}

TEST(VerifyDesign, RandomPointsMatchExpectedResidual) {
  const HarmonicSpace h(2, 3);
  const int n = 30;
  const int trials = 400;
  double mean_r2 = 0.0;
  for (int k = 0; k < trials; ++k) {
    const DesignReport r = verify_design(h, mc_sphere_sample(2, n, 1000 + static_cast<std::uint64_t>(k)), 1e-9);
    EXPECT_FALSE(r.is_design);
    EXPECT_EQ(r.is_design, r.crosscheck_pass);
    mean_r2 += r.residual_total * r.residual_total / trials;
  }
  // E r^2 = K_t(1) / N with K_3(1) = 3 + 5 + 7
  EXPECT_NEAR(mean_r2, 15.0 / n, 0.08 * 15.0 / n);
}

TEST(VerifyDesign, SolvedDesignsRespectLowerBound) {
  for (int t : {1, 2, 3}) {
    const int n = 2 * (t + 1) * (t + 1);
    const auto part = std::make_shared<const ConvexPartition>(build_partition(2, n));
    const SolveResult s = solve_positions(HarmonicSpace(2, t), anchor_configuration(part), DesignerConfig{});
    const DesignReport r = verify_design(HarmonicSpace(2, t), s.configuration.points, 1e-9);
    EXPECT_TRUE(r.is_design);
    EXPECT_TRUE(r.crosscheck_pass);
    EXPECT_GE(r.n, r.lower_bound);
  }
}

TEST(VerifyPartition, CubeAndConvexity) {
  const PartitionReport cube = verify_partition(build_partition(2, 6), 200000, 5);
  EXPECT_TRUE(cube.pass);
  EXPECT_EQ(cube.area_failures, 0);
  EXPECT_EQ(cube.uncovered, 0u);
  ASSERT_EQ(cube.counts.size(), 6u);
  for (std::size_t c : cube.counts) EXPECT_NEAR(static_cast<double>(c) / 200000.0, 1.0 / 6.0, 4 * std::sqrt(5.0 / 36 / 200000));

  for (int n : {7, 31, 97}) {
    const PartitionReport r = verify_partition(build_partition(2, n), 100000, 9, 200);
    EXPECT_EQ(r.convexity_failures, 0) << n;
    EXPECT_NEAR(r.min_measure, 1.0 / n, 1e-12);
    EXPECT_NEAR(r.max_measure, 1.0 / n, 1e-12);
  }
}

TEST(MZCheck, IdenticalCollectionsAndLinearAnchor) {
  const ConvexPartition part = build_partition(2, 100);
  const std::vector<SpherePoint> xs = anchors(part);
  Poly e = Poly::zero(HarmonicSpace(2, 1));
  e.coeffs[basis_index(1, 0)] = 1.0 / std::sqrt(3.0);  // x2
  const MZReport r = mz_check(e, part, xs, xs);
  EXPECT_EQ(r.diff_grad, 0.0);
  EXPECT_NEAR(r.integral_abs, 0.5, 1e-6);
  EXPECT_NEAR(r.integral_grad, std::numbers::pi / 4, 1e-6);
  EXPECT_GT(r.ratio_abs, 0.0);
  EXPECT_GT(r.ratio_grad, 0.0);
  EXPECT_NEAR(r.diff_grad_bound, 8 * 2 * 0.02 * r.integral_grad, 1e-15);
  EXPECT_DOUBLE_EQ(r.norm, part.norm_estimate);

  std::vector<SpherePoint> bad = xs;
  std::swap(bad[0], bad[1]);
  EXPECT_THROW(mz_check(e, part, bad, xs), GeometryError);
  EXPECT_THROW(mz_check(e, part, xs, {}), GeometryError);
}

TEST(MZCheck, RatiosApproachOne) {
  std::vector<ConvexPartition> parts;
  for (int n : {100, 400}) parts.push_back(build_partition(2, n));
  double err[2] = {0.0, 0.0};
  for (std::uint64_t seed = 2; seed < 7; ++seed) {
    const Poly p = random_poly(HarmonicSpace(2, 3), seed, PolyNormalization::unit_coeff);
    for (int k = 0; k < 2; ++k) {
      const MZReport r = mz_check(p, parts[k], anchors(parts[k]), anchors(parts[k]));
      EXPECT_GT(r.ratio_abs, 0.8);
      EXPECT_LT(r.ratio_abs, 1.2);
      err[k] += std::abs(r.ratio_abs - 1.0);
    }
  }
  EXPECT_LT(err[1], err[0]);

  std::mt19937_64 rng(4);
  std::vector<SpherePoint> ys;
  for (const Cell& c : parts[1].cells) ys.push_back(c.sample(rng));
  const Poly p = random_poly(HarmonicSpace(2, 3), 3, PolyNormalization::unit_coeff);
  const MZReport r = mz_check(p, parts[1], anchors(parts[1]), ys);
  EXPECT_GT(r.diff_grad, 0.0);
  EXPECT_LT(r.diff_grad, r.integral_grad);
}

TEST(Faraday, SinglePointClosedForm) {
  for (double r : {0.1, 0.3, 0.7}) {
    const FaradayReport f = faraday_potential({SpherePoint{0, 0, 1}}, r);
    EXPECT_NEAR(f.value, r / (1 - r), 1e-9 * r / (1 - r)) << r;
    EXPECT_NEAR(f.argmax[2], 1.0, 1e-6);
    EXPECT_EQ(f.probes, 4096);
    EXPECT_EQ(f.ascent_steps, 10);
  }
  EXPECT_THROW(faraday_potential({SpherePoint{0, 0, 1}}, 1.0), GeometryError);
  EXPECT_THROW(faraday_potential({SpherePoint{0, 0, 1}}, 0.0), GeometryError);
  EXPECT_THROW(faraday_potential({}, 0.5), GeometryError);
  EXPECT_THROW(faraday_potential({SpherePoint{0, 0, 0, 1}}, 0.5), GeometryError);
}

TEST(Faraday, SmallRadiusAndMonotone) {
  const std::vector<SpherePoint> pts = octahedron();
  EXPECT_LT(faraday_potential(pts, 1e-3).value, 1e-9);
  double prev = 0.0;
  for (double r : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const double v = faraday_potential(pts, r).value;
    EXPECT_GT(v, prev) << r;
    prev = v;
  }
  // a 3-design kills the potential through degree 3: U_r = O(r^4)
  const double slope = std::log(faraday_potential(pts, 0.2).value / faraday_potential(pts, 0.1).value) / std::log(2.0);
  EXPECT_GT(slope, 3.5);
}

TEST(SweepCsv, HeaderAndRoundTrip) {
  EXPECT_EQ(sweep_csv_header(), "d,t,N,residual,min_sep,min_sep_scaled,K_emp,b_emp,ratio_abs,ratio_grad");
  SweepRow row;
  row.d = 2;
  row.t = 3;
  row.n = 32;
  row.residual = 1.0 / 3.0;
  row.min_sep = 0.1;
  row.min_sep_scaled = std::sqrt(2.0);
  row.k_emp = 2.5;
  row.b_emp = 1e-300;
  row.ratio_abs = 0.99;
  row.ratio_grad = 1.01;
  std::stringstream ss(sweep_csv_row(row));
  std::vector<std::string> fields;
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  ASSERT_EQ(fields.size(), 10u);
  EXPECT_EQ(fields[0], "2");
  EXPECT_EQ(fields[2], "32");
  EXPECT_EQ(std::stod(fields[3]), 1.0 / 3.0);
  EXPECT_EQ(std::stod(fields[5]), std::sqrt(2.0));
  EXPECT_EQ(std::stod(fields[7]), 1e-300);
}
