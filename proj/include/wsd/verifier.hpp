#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsd/designer.hpp"
#include "wsd/harmonics.hpp"
#include "wsd/sphere_partition.hpp"

namespace wsd {

/// Smallest possible size of a t-design on S^d; t = 0 gives 1 by convention.
long long lower_bound(int d, int t);

struct DesignReport {
  int d = 0;
  int t = 0;
  int n = 0;
  double tolerance = 0.0;
  double residual_total = 0.0;
  std::vector<double> residual_per_degree;
  bool is_design = false;
  double min_separation = 0.0;
  double separation_scaled = 0.0;  // min_separation * N^{1/d}
  double crosscheck_max_mean = 0.0;  // largest |mean over points| of random unit-norm polynomials
  bool crosscheck_pass = false;
  long long lower_bound = 0;
};

DesignReport verify_design(const HarmonicSpace& space, const std::vector<SpherePoint>& points, double tolerance,
                           std::uint64_t seed = 1);

struct PartitionReport {
  int d = 0;
  int n = 0;
  std::size_t samples = 0;
  std::vector<std::size_t> counts;
  double max_abs_z = 0.0;       // largest |count - S/N| / sigma
  int area_failures = 0;        // cells beyond 4 sigma
  std::size_t uncovered = 0;    // samples claimed by no cell
  int convexity_pairs = 0;      // per cell
  int convexity_failures = 0;
  double norm = 0.0;
  double k_emp = 0.0;
  double b_emp = 0.0;
  double min_measure = 0.0;
  double max_measure = 0.0;
  bool pass = false;
};

PartitionReport verify_partition(const ConvexPartition& partition, std::size_t samples, std::uint64_t seed,
                                 int convexity_pairs = 1000);

struct MZReport {
  int degree = 0;
  double norm = 0.0;
  double norm_times_degree = 0.0;
  double integral_abs = 0.0;
  double integral_grad = 0.0;
  double ratio_abs = 0.0;
  double ratio_grad = 0.0;
  double diff_grad = 0.0;
  double diff_grad_bound = 0.0;  // 8 d eta * integral of |grad P|
  double eta = 0.0;
};

/// Sampling quantities for a polynomial P of degree m with points x_i, y_i in cell i.
MZReport mz_check(const Poly& p, const ConvexPartition& partition, const std::vector<SpherePoint>& xs,
                  const std::vector<SpherePoint>& ys, double eta = 0.02);

struct FaradayReport {
  double r = 0.0;
  double value = 0.0;
  int probes = 0;
  int ascent_steps = 0;
  SpherePoint argmax;
};

/// sup over |x| = r of |(1/N) sum 1/|x - x_i| - 1| on S^2, by Fibonacci probes and local ascent.
FaradayReport faraday_potential(const std::vector<SpherePoint>& points, double r, int probes = 4096,
                                int ascent_steps = 10);

struct SweepRow {
  int d = 0;
  int t = 0;
  int n = 0;
  double residual = 0.0;
  double min_sep = 0.0;
  double min_sep_scaled = 0.0;
  double k_emp = 0.0;
  double b_emp = 0.0;
  double ratio_abs = 0.0;
  double ratio_grad = 0.0;
};

std::string sweep_csv_header();
std::string sweep_csv_row(const SweepRow& row);

}  // namespace wsd
