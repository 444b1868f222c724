#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "wsd/geom.hpp"

namespace wsd {

/// Axis-parallel box [lower_j, upper_j] in R^m, closed.
struct Rect {
  std::vector<double> lower;
  std::vector<double> upper;

  Rect() = default;
  Rect(std::vector<double> lo, std::vector<double> hi);

  /// [-1, 1]^m
  static Rect cube(int m);

  int dim() const { return static_cast<int>(lower.size()); }
  double diameter() const;
  std::vector<double> center() const;
  bool contains(std::span<const double> x, double tol = 0.0) const;
  /// Box with the last axis restricted to [lo, hi].
  Rect with_last_axis(double lo, double hi) const;
  /// Box without its last axis.
  Rect drop_last_axis() const;
};

/// Positive density on R^m, integrated over boxes with respect to Lebesgue measure.
class DensityMeasure {
public:
  using Fn = std::function<double(std::span<const double>)>;

  DensityMeasure(int dim, Fn density, double uniformity_bound = 1.0);

  int dim() const { return dim_; }
  double operator()(std::span<const double> x) const { return density_(x); }
  const Fn& fn() const { return density_; }
  /// Declared bound M with density(x) <= M density(y). Diagnostic metadata only.
  double uniformity_bound() const { return uniformity_bound_; }

  double mass(const Rect& box) const;
  /// Mass of box with its last axis cut at [box.lower.back(), c].
  double mass_below(const Rect& box, double c) const;

  /// Largest ratio max/min of the density over a sampled grid of the box.
  double sampled_uniformity(const Rect& box, int per_axis = 9) const;

private:
  int dim_;
  Fn density_;
  double uniformity_bound_;
};

struct RectPartition {
  Rect parent;
  std::vector<Rect> pieces;
  std::vector<double> measures;

  /// Index of the first piece containing x (lexicographic tie-break); -1 if none.
  int locate(std::span<const double> x, double tol = 1e-12) const;
};

struct SplitCounts {
  int k = 1;  // number of slabs
  int s = 1;  // pieces per slab (s + 1 for the first r slabs)
  int r = 0;
};

/// k = floor(N^{1/l}), s = floor(N/k), r = N - k s.
SplitCounts split_counts(int n, int l);

/// Point c in [lo, hi] where the mass of [lo, c] equals target_mass, found by
/// bisection on the cumulative integral; returns the smallest such point.
/// `cumulative(c)` must return the mass of [lo, c].
double measure_1d_cut(const std::function<double(double)>& cumulative, double lo, double hi, double target_mass,
                      double rel_tol = 1e-12);

/// Same cut with Newton steps on `rate` (the derivative of `cumulative`) kept
/// inside the bisection bracket. Falls back to plain bisection when the rate
/// vanishes at the solution, so ties still resolve to the smallest point.
double measure_1d_cut(const std::function<double(double)>& cumulative, const std::function<double(double)>& rate,
                      double lo, double hi, double target_mass, double rel_tol = 1e-12);

/// Cut point along a one-dimensional density.
double measure_1d_cut(const DensityMeasure& density, double lo, double hi, double target_mass,
                      double rel_tol = 1e-12);

/// Density of dimension m - 1 obtained by integrating the last axis over
/// [slab_lo, slab_hi]. The uniformity bound becomes 2 M^2.
DensityMeasure marginal_density(const DensityMeasure& density, double slab_lo, double slab_hi);

/// Equal-measure partition of `rect` into n axis-parallel pieces. The last axis
/// is cut into k slabs, each slab is partitioned recursively on its marginal.
RectPartition partition_rect(const Rect& rect, const DensityMeasure& density, int n);

}  // namespace wsd
