#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wsd/geom.hpp"
#include "wsd/rect_partition.hpp"

namespace wsd {

/// Closed convex set {x in S^d : (n_k, x) >= 0 for all k} with unit normals n_k.
/// An empty normal list is the whole sphere.
class SphericalPolytope {
public:
  SphericalPolytope() = default;
  SphericalPolytope(int d, std::vector<Vec> normals);

  int dim() const { return d_; }
  const std::vector<Vec>& normals() const { return normals_; }

  bool contains(const SpherePoint& x, double tol = 1e-9) const;
  /// Geodesic distance from an inside point to the boundary: min_k asin((n_k, x)).
  /// Negative outside; pi for the whole sphere.
  double boundary_distance(const SpherePoint& x) const;

  /// Center and radius of a largest inscribed cap.
  std::pair<SpherePoint, double> largest_cap() const;

  /// Unique maximizer of (z, y) over the set: normalized projection of y onto
  /// the cone {(n_k, z) >= 0}.
  SpherePoint support_point(const Vec& y) const;

  /// Nearest point of {z : dist(z, boundary) >= depth} to x (x itself if already
  /// deep enough).
  SpherePoint project_to_depth(const SpherePoint& x, double depth) const;

private:
  int d_ = 0;
  std::vector<Vec> normals_;
};

enum class Parity { even, odd };

/// The polytope Q(lambda, mu) and its facet charts. Coordinate 0 is the polar
/// axis; facet 2a has t_a = +1, facet 2a+1 has t_a = -1 (a = 0..d). lambda = mu
/// is the box P(a_lambda).
class PolytopeFrame {
public:
  PolytopeFrame(int d, double lambda, double mu);

  int dim() const { return d_; }
  double lambda() const { return lambda_; }
  double mu() const { return mu_; }
  int facet_count() const { return 2 * d_ + 2; }

  /// Pre-projection point of facet `facet` at chart coordinates u in [-1, 1]^d.
  Vec facet_point(int facet, std::span<const double> u) const;
  /// d w / d u, (d+1) x d.
  Mat facet_jacobian(int facet, std::span<const double> u) const;
  /// Normalized sphere-measure density of the radial image, per unit chart volume.
  double facet_density(int facet, std::span<const double> u) const;
  DensityMeasure density(int facet) const;
  /// mu_d of the radial image of the whole facet.
  double facet_mass(int facet) const;

  struct Plane {
    Vec normal;
    double offset;  // (normal, w) = offset on the facet, offset > 0
  };
  Plane facet_plane(int facet) const;

  /// Chart coordinates of the point where the ray through x meets the facet's
  /// plane; nullopt when the ray misses.
  std::optional<std::vector<double>> chart_coords(int facet, const SpherePoint& x) const;
  /// Facet whose cone contains x (first one on ties).
  int facet_of(const SpherePoint& x) const;

private:
  double width(double t0) const { return width_slope_ * t0 + width_mid_; }

  int d_;
  double lambda_;
  double mu_;
  double axial_scale_;   // (lambda + mu) / 2
  double axial_shift_;   // (lambda - mu) / 2
  double width_slope_;   // d width / d t0
  double width_mid_;     // width at t0 = 0
  double sphere_area_;
};

/// Mass of the polar facet of the frame with parameter lambda:
/// mu_d of the radial image of {x_0 = lambda, |x_j| <= sqrt((1 - lambda^2)/d)}.
double polar_facet_mass(int d, double lambda);

struct FacetChart {
  std::shared_ptr<const PolytopeFrame> frame;
  int facet = 0;

  SpherePoint map(std::span<const double> u) const;
  std::optional<std::vector<double>> inverse(const SpherePoint& x) const;
  DensityMeasure density() const { return frame->density(facet); }
};

enum class CellKind { facet_box, lune, whole };

struct Cell {
  CellKind kind = CellKind::whole;
  std::optional<FacetChart> chart;  // facet_box only
  Rect box;                         // chart-domain box (facet_box only)
  double measure = 0.0;
  SphericalPolytope polytope;
  std::vector<SpherePoint> vertices;  // images of box corners (facet_box only)
  SpherePoint anchor;                 // incenter
  double inradius = 0.0;

  /// Random point of the cell (chart-uniform for facet boxes, rejection otherwise).
  SpherePoint sample(std::mt19937_64& rng) const;
};

/// Allocation of pieces over facets and the solved frame parameters.
struct FrameSolution {
  int d = 0;
  int n = 0;
  Parity parity = Parity::even;
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<int> facet_counts;      // pieces per facet
  std::vector<double> facet_masses;   // facet_counts / N
  bool fallback = false;              // small-N allocation used
  std::string note;
};

enum class Layout { frame, lunes, whole };

struct ConvexPartition {
  int d = 0;
  int n = 0;
  Layout layout = Layout::whole;
  std::optional<FrameSolution> solution;
  std::shared_ptr<const PolytopeFrame> frame;
  std::vector<Cell> cells;
  std::vector<std::pair<int, int>> facet_ranges;  // [begin, end) cell indices per facet
  double norm_estimate = 0.0;
  double k_emp = 0.0;  // norm_estimate * N^{1/d}
  double b_emp = 0.0;  // min inradius * N^{1/d}

  /// First cell containing x; boundary ties go to the smallest index.
  int locate(const SpherePoint& x) const;
};

/// Even N frame: bisection for lambda on the polar-facet mass.
FrameSolution solve_lambda_even(int d, int n);
/// Odd N frame: lambda for facet 0, then mu for facet 1.
FrameSolution solve_lambda_mu_odd(int d, int n);

ConvexPartition build_partition(int d, int n);

/// Rebuilds cells from a frame solution and the per-facet boxes.
ConvexPartition assemble_partition(const FrameSolution& solution, const std::vector<std::vector<Rect>>& facet_boxes);
ConvexPartition lune_partition(int d, int n);
ConvexPartition whole_sphere_partition(int d);

bool cell_contains(const Cell& cell, const SpherePoint& x, double tol = 1e-9);
std::pair<SpherePoint, double> incenter(const Cell& cell);
double cell_diameter(const Cell& cell);
double partition_norm(const ConvexPartition& partition);

/// Worker threads for partition construction and verification; results do not
/// depend on it.
void set_thread_count(int threads);
int thread_count();

}  // namespace wsd
