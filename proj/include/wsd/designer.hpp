#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wsd/harmonics.hpp"
#include "wsd/sphere_partition.hpp"

namespace wsd {

struct DesignerConfig {
  double epsilon = 0.1;
  double delta = 0.3;
  double eta = 0.02;
  double tol_residual = 1e-9;
  int max_iters = 2000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Points tied to the cells of a partition: point i lives in cell i.
struct AnchoredConfiguration {
  std::shared_ptr<const ConvexPartition> partition;
  std::vector<SpherePoint> anchors;  // incenters
  std::vector<double> radii;         // incenter radii
  std::vector<SpherePoint> points;

  std::size_t size() const { return points.size(); }
  /// Required distance from point i to the boundary of its cell: (delta/2) sin r_i.
  double required_depth(std::size_t i, const DesignerConfig& config) const;
};

/// Configuration with every point at its cell's incenter.
AnchoredConfiguration anchor_configuration(std::shared_ptr<const ConvexPartition> partition);

/// Piecewise-linear clamp v/eps on [0, eps], 1 beyond.
double g_eps(const DesignerConfig& config, double v);

/// Maximizer of (z, y) over the cell for a nonzero tangent vector y at the anchor.
SpherePoint argmax_on_cell(const Cell& cell, const TangentVector& y);

/// Point on the arc from the anchor toward the maximizer of (., grad P(anchor)),
/// at fraction (1 - delta) g_eps(|grad P(anchor)|).
SpherePoint map_point(const DesignerConfig& config, const Cell& cell, const SpherePoint& anchor, const Poly& p);
std::vector<SpherePoint> map_points(const DesignerConfig& config, const AnchoredConfiguration& anchored,
                                    const Poly& p);

/// (1/N) sum_i P(x_i(P)).
double pairing(const DesignerConfig& config, const AnchoredConfiguration& anchored, const Poly& p);

struct ResidualReport {
  double total = 0.0;               // |(1/N) sum G_{x_i}|
  std::vector<double> per_degree;   // squared degree-k parts, summing to total^2
};

/// Residual by a product rule exact to degree 2t applied to the averaged kernel.
ResidualReport design_residual(const HarmonicSpace& space, const std::vector<SpherePoint>& points);
/// r^2 = (1/N^2) sum_ij K_t(x_i . x_j); cancels badly near zero, kept as a cross-check.
double design_residual_pairwise(const HarmonicSpace& space, const std::vector<SpherePoint>& points);
/// Gradient of r^2 with respect to each point, tangent-projected; (d+1) x N.
Mat residual_gradient(const HarmonicSpace& space, const std::vector<SpherePoint>& points);

struct SolverReport {
  std::string method;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_trajectory;
  double final_residual = 0.0;
  std::vector<double> per_degree;
  double min_separation = 0.0;
  double min_required_separation = 0.0;  // delta sin(min r_i)
  int depth_violations = 0;
  bool underdetermined = false;
  DesignerConfig config;
  std::string message;
};

struct SolveResult {
  AnchoredConfiguration configuration;
  SolverReport report;
};

/// Damped Gauss-Newton on the quadrature residual with every point clipped to
/// its shrunk cell; Armijo backtracking on r^2.
SolveResult solve_positions(const HarmonicSpace& space, const AnchoredConfiguration& start,
                            const DesignerConfig& config);

struct FixedPointResult {
  Poly poly;
  AnchoredConfiguration configuration;
  SolverReport report;
};

/// P <- P - tau (1/N) sum G_{x_i(P)} with adaptive tau, keeping grad_l1_norm(P) < 1.
FixedPointResult solve_fixed_point(const HarmonicSpace& space, const AnchoredConfiguration& start,
                                   const DesignerConfig& config);

/// Min pairwise geodesic distance.
double min_separation(const std::vector<SpherePoint>& points);
/// Number of points closer to their cell boundary than required (or outside it).
int depth_violations(const AnchoredConfiguration& anchored, const DesignerConfig& config, double tol = 1e-10);

}  // namespace wsd
