#include "wsd/sphere_partition.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <boost/math/tools/toms748_solve.hpp>

#include "parallel.hpp"

namespace wsd {

namespace {

std::atomic<int> g_threads{static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};

// Rows of A are the normals selected by mask.
Mat select_rows(const std::vector<Vec>& normals, unsigned mask, int width) {
  Mat a(std::popcount(mask), width);
  int row = 0;
  for (std::size_t k = 0; k < normals.size(); ++k) {
    if (mask & (1u << k)) a.row(row++) = normals[k].transpose();
  }
  return a;
}

// Gram inverse applied to rhs, or nullopt when the selected normals are dependent.
std::optional<Vec> gram_solve(const Mat& a, const Vec& rhs) {
  const Mat g = a * a.transpose();
  Eigen::FullPivLU<Mat> lu(g);
  lu.setThreshold(1e-12);
  if (lu.rank() < g.rows()) return std::nullopt;
  return Vec(lu.solve(rhs));
}

double min_margin(const std::vector<Vec>& normals, const Vec& z) {
  double m = std::numeric_limits<double>::infinity();
  for (const Vec& n : normals) m = std::min(m, n.dot(z));
  return m;
}

Vec unit(int size, int axis) {
  Vec e = Vec::Zero(size);
  e[axis] = 1.0;
  return e;
}

}  // namespace

SphericalPolytope::SphericalPolytope(int d, std::vector<Vec> normals) : d_(d), normals_(std::move(normals)) {
  if (d_ < 1) {
    throw GeometryError("SphericalPolytope: dimension must be >= 1");
  }
  if (normals_.size() > 30) {
    throw GeometryError("SphericalPolytope: too many half-spaces");
  }
  for (Vec& n : normals_) {
    if (n.size() != d_ + 1) {
      throw GeometryError("SphericalPolytope: normal dimension mismatch");
    }
    const double len = n.norm();
    if (!(len > 0.0)) {
      throw GeometryError("SphericalPolytope: zero normal");
    }
    n /= len;
  }
}

bool SphericalPolytope::contains(const SpherePoint& x, double tol) const {
  if (x.dim() != d_) return false;
  for (const Vec& n : normals_) {
    if (n.dot(x.coords()) < -tol) return false;
  }
  return true;
}

double SphericalPolytope::boundary_distance(const SpherePoint& x) const {
  if (normals_.empty()) return std::numbers::pi;
  const double m = min_margin(normals_, x.coords());
  return std::asin(std::clamp(m, -1.0, 1.0));
}

std::pair<SpherePoint, double> SphericalPolytope::largest_cap() const {
  const int w = d_ + 1;
  if (normals_.empty()) {
    return {SpherePoint(unit(w, 0)), std::numbers::pi};
  }
  // The optimal cap touches an independent subset of at most d+1 walls at equal
  // depth rho; for each subset the equal-depth direction is A^T (A A^T)^{-1} 1.
  double best_rho = -1.0;
  Vec best_z;
  const unsigned total = 1u << normals_.size();
  for (unsigned mask = 1; mask < total; ++mask) {
    const int s = std::popcount(mask);
    if (s > w) continue;
    const Mat a = select_rows(normals_, mask, w);
    const auto alpha = gram_solve(a, Vec::Ones(s));
    if (!alpha) continue;
    const Vec u = a.transpose() * *alpha;
    const double len = u.norm();
    if (!(len > 1e-300)) continue;
    const double rho = 1.0 / len;
    if (rho <= best_rho) continue;
    const Vec z = u / len;
    if (min_margin(normals_, z) >= rho - 1e-12) {
      best_rho = rho;
      best_z = z;
    }
  }
  if (best_rho <= 0.0) {
    throw GeometryError("SphericalPolytope: empty interior");
  }
  return {SpherePoint(best_z), std::asin(std::min(1.0, best_rho))};
}

SpherePoint SphericalPolytope::support_point(const Vec& y) const {
  if (y.size() != d_ + 1) {
    throw GeometryError("support_point: dimension mismatch");
  }
  const double scale = y.norm();
  if (!(scale > 0.0)) {
    throw GeometryError("support_point: zero direction");
  }
  if (min_margin(normals_, y) >= 0.0) return SpherePoint(y);
  // Projection of y onto the polyhedral cone; it lies on the span complement of
  // some active set of at most d normals, and maximizes |z| among feasible candidates.
  double best = -1.0;
  Vec best_z;
  const unsigned total = 1u << normals_.size();
  for (unsigned mask = 1; mask < total; ++mask) {
    if (std::popcount(mask) > d_) continue;
    const Mat a = select_rows(normals_, mask, d_ + 1);
    const auto coef = gram_solve(a, a * y);
    if (!coef) continue;
    const Vec z = y - a.transpose() * *coef;
    const double len = z.norm();
    if (len <= best) continue;
    if (min_margin(normals_, z) >= -1e-12 * scale) {
      best = len;
      best_z = z;
    }
  }
  if (best <= 1e-14 * scale) {
    throw GeometryError("support_point: direction lies in the polar cone");
  }
  return SpherePoint(best_z);
}

SpherePoint SphericalPolytope::project_to_depth(const SpherePoint& x, double depth) const {
  if (normals_.empty()) return x;
  const double c = std::sin(std::max(0.0, depth)) + 1e-12;
  const Vec& xv = x.coords();
  if (min_margin(normals_, xv) >= c) return x;
  // Maximize (x, z) over unit z with (n_k, z) >= c: on an active set S the
  // optimum is z_p + sqrt(1 - |z_p|^2) v / |v| with z_p = A^T G^{-1} c 1 and v the
  // part of x orthogonal to the rows of A.
  double best = -std::numeric_limits<double>::infinity();
  Vec best_z;
  const unsigned total = 1u << normals_.size();
  for (unsigned mask = 1; mask < total; ++mask) {
    const int s = std::popcount(mask);
    if (s > d_) continue;
    const Mat a = select_rows(normals_, mask, d_ + 1);
    const auto alpha = gram_solve(a, Vec::Constant(s, c));
    if (!alpha) continue;
    const Vec zp = a.transpose() * *alpha;
    const double zp2 = zp.squaredNorm();
    if (zp2 >= 1.0) continue;
    const auto beta = gram_solve(a, a * xv);
    Vec v = xv - a.transpose() * *beta;
    const double vlen = v.norm();
    if (vlen < 1e-15) continue;
    const Vec z = zp + std::sqrt(1.0 - zp2) * v / vlen;
    if (min_margin(normals_, z) < c - 1e-12) continue;
    const double val = xv.dot(z);
    if (val > best) {
      best = val;
      best_z = z;
    }
  }
  if (best_z.size() == 0) {
    return largest_cap().first;
  }
  return SpherePoint(best_z);
}

PolytopeFrame::PolytopeFrame(int d, double lambda, double mu) : d_(d), lambda_(lambda), mu_(mu) {
  if (d_ < 1) {
    throw GeometryError("PolytopeFrame: dimension must be >= 1");
  }
  if (!(lambda > 0.0 && lambda < 1.0 && mu > 0.0 && mu < 1.0)) {
    throw GeometryError("PolytopeFrame: lambda and mu must lie in (0, 1)");
  }
  const double sl = std::sqrt(1.0 - lambda * lambda);
  const double sm = std::sqrt(1.0 - mu * mu);
  const double rd = std::sqrt(static_cast<double>(d));
  axial_scale_ = 0.5 * (lambda + mu);
  axial_shift_ = 0.5 * (lambda - mu);
  width_slope_ = (sl - sm) / (2.0 * rd);
  width_mid_ = (sl + sm) / (2.0 * rd);
  sphere_area_ = sphere_area(d);
}

namespace {

void check_facet(const PolytopeFrame& f, int facet, std::size_t u_size) {
  if (facet < 0 || facet >= f.facet_count()) {
    throw GeometryError("PolytopeFrame: facet index out of range");
  }
  if (u_size != static_cast<std::size_t>(f.dim())) {
    throw GeometryError("PolytopeFrame: chart coordinate dimension mismatch");
  }
}

// Full (d+1)-vector of cube coordinates: fixed axis facet/2 at +-1, the rest from u.
std::vector<double> cube_coords(int facet, std::span<const double> u) {
  const int axis = facet / 2;
  std::vector<double> t;
  t.reserve(u.size() + 1);
  for (int j = 0, k = 0; j <= static_cast<int>(u.size()); ++j) {
    t.push_back(j == axis ? (facet % 2 == 0 ? 1.0 : -1.0) : u[static_cast<std::size_t>(k++)]);
  }
  return t;
}

}  // namespace

Vec PolytopeFrame::facet_point(int facet, std::span<const double> u) const {
  check_facet(*this, facet, u.size());
  const std::vector<double> t = cube_coords(facet, u);
  Vec w(d_ + 1);
  w[0] = axial_scale_ * t[0] + axial_shift_;
  const double c = width(t[0]);
  for (int j = 1; j <= d_; ++j) w[j] = c * t[static_cast<std::size_t>(j)];
  return w;
}

Mat PolytopeFrame::facet_jacobian(int facet, std::span<const double> u) const {
  check_facet(*this, facet, u.size());
  const std::vector<double> t = cube_coords(facet, u);
  const int axis = facet / 2;
  Mat jac = Mat::Zero(d_ + 1, d_);
  const double c = width(t[0]);
  for (int j = 0, k = 0; j <= d_; ++j) {
    if (j == axis) continue;
    if (j == 0) {
      jac(0, k) = axial_scale_;
      for (int i = 1; i <= d_; ++i) jac(i, k) = width_slope_ * t[static_cast<std::size_t>(i)];
    } else {
      jac(j, k) = c;
    }
    ++k;
  }
  return jac;
}

double PolytopeFrame::facet_density(int facet, std::span<const double> u) const {
  check_facet(*this, facet, u.size());
  // |det[w, dw/du]| in closed form: the fixed-axis minor times width^(free side axes)
  const int axis = facet / 2;
  const double t0 = axis == 0 ? (facet == 0 ? 1.0 : -1.0) : u[0];
  const double c = width(t0);
  double side2 = 0.0;
  for (std::size_t k = axis == 0 ? 0 : 1; k < u.size(); ++k) side2 += u[k] * u[k];
  if (axis != 0) side2 += 1.0;
  const double w0 = axial_scale_ * t0 + axial_shift_;
  const double r2 = w0 * w0 + c * c * side2;
  double det;
  if (axis == 0) {
    det = std::abs(w0) * std::pow(c, d_);
  } else {
    det = std::pow(c, d_ - 1) * std::abs(axial_scale_ * width_mid_ - axial_shift_ * width_slope_);
  }
  return det / (std::pow(r2, 0.5 * (d_ + 1)) * sphere_area_);
}

DensityMeasure PolytopeFrame::density(int facet) const {
  check_facet(*this, facet, static_cast<std::size_t>(d_));
  const PolytopeFrame frame = *this;
  auto fn = [frame, facet](std::span<const double> u) { return frame.facet_density(facet, u); };
  DensityMeasure probe(d_, fn);
  const double bound = probe.sampled_uniformity(Rect::cube(d_), 5);
  return DensityMeasure(d_, fn, bound);
}

double PolytopeFrame::facet_mass(int facet) const {
  return density(facet).mass(Rect::cube(d_));
}

PolytopeFrame::Plane PolytopeFrame::facet_plane(int facet) const {
  check_facet(*this, facet, static_cast<std::size_t>(d_));
  const int axis = facet / 2;
  const double sign = facet % 2 == 0 ? 1.0 : -1.0;
  Plane p;
  if (axis == 0) {
    p.normal = sign * unit(d_ + 1, 0);
    p.offset = facet == 0 ? lambda_ : mu_;
    return p;
  }
  // sign * w_axis = width((w_0 - shift) / scale)
  const double slope = width_slope_ / axial_scale_;
  p.normal = sign * unit(d_ + 1, axis);
  p.normal[0] = -slope;
  p.offset = width_mid_ - slope * axial_shift_;
  return p;
}

std::optional<std::vector<double>> PolytopeFrame::chart_coords(int facet, const SpherePoint& x) const {
  if (x.dim() != d_) {
    throw GeometryError("chart_coords: dimension mismatch");
  }
  const Plane p = facet_plane(facet);
  const double nx = p.normal.dot(x.coords());
  if (!(nx > 0.0)) return std::nullopt;
  const Vec w = (p.offset / nx) * x.coords();
  const int axis = facet / 2;
  const double t0 = axis == 0 ? (facet == 0 ? 1.0 : -1.0) : (w[0] - axial_shift_) / axial_scale_;
  const double c = width(t0);
  std::vector<double> u;
  u.reserve(static_cast<std::size_t>(d_));
  for (int j = 0; j <= d_; ++j) {
    if (j == axis) continue;
    u.push_back(j == 0 ? t0 : w[j] / c);
  }
  return u;
}

int PolytopeFrame::facet_of(const SpherePoint& x) const {
  if (x.dim() != d_) {
    throw GeometryError("facet_of: dimension mismatch");
  }
  int best = -1;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (int f = 0; f < facet_count(); ++f) {
    const Plane p = facet_plane(f);
    const double nx = p.normal.dot(x.coords());
    if (!(nx > 0.0)) continue;
    const double ratio = p.offset / nx;
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = f;
    }
  }
  return best;
}

double polar_facet_mass(int d, double lambda) {
  return PolytopeFrame(d, lambda, lambda).facet_mass(0);
}

SpherePoint FacetChart::map(std::span<const double> u) const {
  return radial_map(frame->facet_point(facet, u));
}

std::optional<std::vector<double>> FacetChart::inverse(const SpherePoint& x) const {
  return frame->chart_coords(facet, x);
}

SpherePoint Cell::sample(std::mt19937_64& rng) const {
  if (kind == CellKind::facet_box) {
    std::vector<double> u(box.lower.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      std::uniform_real_distribution<double> dist(box.lower[j], box.upper[j]);
      u[j] = dist(rng);
    }
    return chart->map(u);
  }
  std::normal_distribution<double> normal;
  const int w = anchor.ambient_dim();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vec g(w);
    for (int j = 0; j < w; ++j) g[j] = normal(rng);
    if (!(g.norm() > 0.0)) continue;
    SpherePoint z(g);
    if (polytope.contains(z, 0.0)) return z;
  }
  return anchor;
}

namespace {

constexpr double kBisectTol = 1e-12;

struct Allocation {
  int side = 0;
  int top = 0;     // facet 0
  int bottom = 0;  // facet 1
};

Allocation allocate(int d, int n, bool fallback) {
  const int q = n / (2 * d + 2);
  Allocation a;
  a.side = fallback ? q : q + 1;
  if (n % 2 == 0) {
    a.top = n / 2 - d * a.side;
    a.bottom = a.top;
  } else {
    a.top = (n - 1) / 2 - d * a.side;
    a.bottom = a.top + 1;
  }
  return a;
}

// lambda with polar_facet_mass(d, lambda) = target; nullopt when the target is
// outside the bracket's range.
std::optional<double> bisect_between(int d, double target, double lo, double hi) {
  // G is decreasing in lambda and tends to 1/2 (a hemisphere) as lambda -> 0
  double g_lo = lo == 0.0 ? 0.5 : polar_facet_mass(d, lo);
  double g_hi = polar_facet_mass(d, hi);
  if (std::abs(g_lo - target) < kBisectTol) return lo;
  if (std::abs(g_hi - target) < kBisectTol) return hi;
  if (!(g_hi < target && target < g_lo)) return std::nullopt;
  // a value within kBisectTol counts as an exact root, which stops the solver
  auto f = [&](double lambda) {
    const double g = polar_facet_mass(d, lambda) - target;
    return std::abs(g) < kBisectTol ? 0.0 : g;
  };
  boost::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(
      f, lo, hi, g_lo - target, g_hi - target, [](double a, double b) { return b - a < 1e-16; }, iters);
  return 0.5 * (root.first + root.second);
}

// Standard bracket first when N > 8 d^2, then the widened one; `widened` reports which.
std::optional<double> bisect_lambda(int d, int n, double target, bool& widened) {
  if (n > 8 * d * d) {
    if (auto r = bisect_between(d, target, 1.0 / std::sqrt(d + 1.0), 1.0 - 1.0 / (10.0 * d))) return r;
    widened = true;
  }
  return bisect_between(d, target, 0.0, 1.0 - 1e-6);
}

void require_frame_args(int d, int n) {
  if (d < 1) {
    throw GeometryError("frame: dimension must be >= 1");
  }
  if (n < 2 * d + 2) {
    throw GeometryError("frame: N must be at least 2d + 2");
  }
}

FrameSolution finish(int d, int n, const Allocation& a, double lambda, double mu, bool fallback, bool widened) {
  FrameSolution s;
  s.d = d;
  s.n = n;
  s.parity = n % 2 == 0 ? Parity::even : Parity::odd;
  s.lambda = lambda;
  s.mu = mu;
  s.fallback = fallback;
  s.facet_counts.assign(static_cast<std::size_t>(2 * d + 2), a.side);
  s.facet_counts[0] = a.top;
  s.facet_counts[1] = a.bottom;
  for (int c : s.facet_counts) s.facet_masses.push_back(static_cast<double>(c) / n);
  if (fallback) {
    s.note = "small-N allocation: " + std::to_string(a.side) + " pieces per side facet";
  }
  if (widened) {
    if (!s.note.empty()) s.note += "; ";
    s.note += "frame parameter outside [1/sqrt(d+1), 1-1/(10d)]";
  }
  return s;
}

}  // namespace

FrameSolution solve_lambda_even(int d, int n) {
  require_frame_args(d, n);
  if (n % 2 != 0) {
    throw GeometryError("solve_lambda_even: N must be even");
  }
  for (bool fallback : {false, true}) {
    const Allocation a = allocate(d, n, fallback);
    if (a.top < 1 || a.side < 1) continue;
    bool widened = false;
    const auto lambda = bisect_lambda(d, n, static_cast<double>(a.top) / n, widened);
    if (lambda) return finish(d, n, a, *lambda, *lambda, fallback, widened);
  }
  throw GeometryError("solve_lambda_even: no admissible frame");
}

FrameSolution solve_lambda_mu_odd(int d, int n) {
  require_frame_args(d, n);
  if (n % 2 == 0) {
    throw GeometryError("solve_lambda_mu_odd: N must be odd");
  }
  for (bool fallback : {false, true}) {
    const Allocation a = allocate(d, n, fallback);
    if (a.top < 1 || a.side < 1) continue;
    bool widened = false;
    const auto lambda = bisect_lambda(d, n, static_cast<double>(a.top) / n, widened);
    if (!lambda) continue;
    const auto mu = bisect_lambda(d, n, static_cast<double>(a.bottom) / n, widened);
    if (!mu) continue;
    return finish(d, n, a, *lambda, *mu, fallback, widened);
  }
  throw GeometryError("solve_lambda_mu_odd: no admissible frame");
}

namespace {

std::vector<Vec> box_normals(const FacetChart& chart, const Rect& box) {
  const int d = box.dim();
  const Vec center = chart.frame->facet_point(chart.facet, box.center());
  std::vector<Vec> normals;
  normals.reserve(static_cast<std::size_t>(2 * d));
  const int corners = 1 << (d - 1);
  for (int axis = 0; axis < d; ++axis) {
    for (int side = 0; side < 2; ++side) {
      Mat rows(corners, d + 1);
      std::vector<double> u(static_cast<std::size_t>(d));
      for (int c = 0; c < corners; ++c) {
        for (int j = 0, bit = 0; j < d; ++j) {
          if (j == axis) {
            u[j] = side == 0 ? box.lower[j] : box.upper[j];
          } else {
            u[j] = (c >> bit++) & 1 ? box.upper[j] : box.lower[j];
          }
        }
        rows.row(c) = chart.frame->facet_point(chart.facet, u).transpose();
      }
      Vec n;
      if (d == 1) {
        // single corner: normal is its perpendicular in the plane
        n = Vec(2);
        n << -rows(0, 1), rows(0, 0);
      } else {
        Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeFullV);
        n = svd.matrixV().col(d);
      }
      if (n.dot(center) < 0.0) n = -n;
      normals.push_back(n.normalized());
    }
  }
  return normals;
}

std::vector<SpherePoint> box_vertices(const FacetChart& chart, const Rect& box) {
  const int d = box.dim();
  std::vector<SpherePoint> out;
  std::vector<double> u(static_cast<std::size_t>(d));
  for (int c = 0; c < (1 << d); ++c) {
    for (int j = 0; j < d; ++j) u[j] = (c >> j) & 1 ? box.upper[j] : box.lower[j];
    out.push_back(chart.map(u));
  }
  return out;
}

void finalize_metrics(ConvexPartition& p) {
  p.norm_estimate = partition_norm(p);
  double min_in = std::numeric_limits<double>::infinity();
  for (const Cell& c : p.cells) min_in = std::min(min_in, c.inradius);
  const double scale = std::pow(static_cast<double>(p.n), 1.0 / p.d);
  p.k_emp = p.norm_estimate * scale;
  p.b_emp = min_in * scale;
}

ConvexPartition assemble(const FrameSolution& solution, const std::vector<std::vector<Rect>>& facet_boxes,
                         const std::vector<std::vector<double>>* measures) {
  const int d = solution.d;
  const int facets = 2 * d + 2;
  if (static_cast<int>(facet_boxes.size()) != facets) {
    throw GeometryError("assemble_partition: expected one box list per facet");
  }
  ConvexPartition p;
  p.d = d;
  p.n = solution.n;
  p.layout = Layout::frame;
  p.solution = solution;
  auto frame = std::make_shared<const PolytopeFrame>(d, solution.lambda, solution.mu);
  p.frame = frame;
  std::vector<std::pair<int, int>> ranges;
  std::vector<std::pair<int, int>> jobs;  // (facet, box)
  int total = 0;
  for (int f = 0; f < facets; ++f) {
    const int count = static_cast<int>(facet_boxes[static_cast<std::size_t>(f)].size());
    ranges.emplace_back(total, total + count);
    for (int b = 0; b < count; ++b) jobs.emplace_back(f, b);
    total += count;
  }
  if (total != solution.n) {
    throw GeometryError("assemble_partition: box count differs from N");
  }
  p.cells.resize(static_cast<std::size_t>(total));
  detail::parallel_for(jobs.size(), [&](std::size_t i) {
    const auto [f, b] = jobs[i];
    const Rect& box = facet_boxes[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)];
    if (box.dim() != d) {
      throw GeometryError("assemble_partition: box dimension mismatch");
    }
    Cell c;
    c.kind = CellKind::facet_box;
    c.chart = FacetChart{frame, f};
    c.box = box;
    c.measure = measures ? (*measures)[static_cast<std::size_t>(f)][static_cast<std::size_t>(b)]
                         : frame->density(f).mass(box);
    c.polytope = SphericalPolytope(d, box_normals(*c.chart, box));
    c.vertices = box_vertices(*c.chart, box);
    auto [center, radius] = c.polytope.largest_cap();
    c.anchor = center;
    c.inradius = radius;
    p.cells[i] = std::move(c);
  });
  p.facet_ranges = std::move(ranges);
  finalize_metrics(p);
  return p;
}

}  // namespace

ConvexPartition assemble_partition(const FrameSolution& solution, const std::vector<std::vector<Rect>>& facet_boxes) {
  return assemble(solution, facet_boxes, nullptr);
}

ConvexPartition lune_partition(int d, int n) {
  if (d < 1 || n < 2) {
    throw GeometryError("lune_partition: need d >= 1 and N >= 2");
  }
  ConvexPartition p;
  p.d = d;
  p.n = n;
  p.layout = Layout::lunes;
  const int w = d + 1;
  // lunes in the plane of the last two coordinates (the first two for d = 1)
  const int ax = d >= 2 ? 1 : 0;
  const int ay = ax + 1;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    const double b = 2.0 * std::numbers::pi * (k + 1) / n;
    Vec lo = Vec::Zero(w);
    lo[ax] = -std::sin(a);
    lo[ay] = std::cos(a);
    Vec hi = Vec::Zero(w);
    hi[ax] = std::sin(b);
    hi[ay] = -std::cos(b);
    Cell c;
    c.kind = CellKind::lune;
    c.measure = 1.0 / n;
    std::vector<Vec> normals{lo};
    if ((lo - hi).norm() > 1e-12) normals.push_back(hi);
    c.polytope = SphericalPolytope(d, normals);
    auto [center, radius] = c.polytope.largest_cap();
    c.anchor = center;
    c.inradius = radius;
    p.cells.push_back(std::move(c));
  }
  finalize_metrics(p);
  return p;
}

ConvexPartition whole_sphere_partition(int d) {
  if (d < 1) {
    throw GeometryError("whole_sphere_partition: dimension must be >= 1");
  }
  ConvexPartition p;
  p.d = d;
  p.n = 1;
  p.layout = Layout::whole;
  Cell c;
  c.kind = CellKind::whole;
  c.measure = 1.0;
  c.polytope = SphericalPolytope(d, {});
  auto [center, radius] = c.polytope.largest_cap();
  c.anchor = center;
  c.inradius = radius;
  p.cells.push_back(std::move(c));
  finalize_metrics(p);
  return p;
}

ConvexPartition build_partition(int d, int n) {
  if (d < 2) {
    throw GeometryError("build_partition: dimension must be >= 2");
  }
  if (n < 1) {
    throw GeometryError("build_partition: N must be >= 1");
  }
  if (n == 1) return whole_sphere_partition(d);
  if (n < 2 * d + 2) return lune_partition(d, n);
  const FrameSolution sol = n % 2 == 0 ? solve_lambda_even(d, n) : solve_lambda_mu_odd(d, n);
  const PolytopeFrame frame(d, sol.lambda, sol.mu);
  const int facets = frame.facet_count();
  std::vector<std::vector<Rect>> boxes(static_cast<std::size_t>(facets));
  std::vector<std::vector<double>> measures(static_cast<std::size_t>(facets));
  detail::parallel_for(static_cast<std::size_t>(facets), [&](std::size_t f) {
    RectPartition rp = partition_rect(Rect::cube(d), frame.density(static_cast<int>(f)), sol.facet_counts[f]);
    boxes[f] = std::move(rp.pieces);
    measures[f] = std::move(rp.measures);
  });
  return assemble(sol, boxes, &measures);
}

bool cell_contains(const Cell& cell, const SpherePoint& x, double tol) {
  if (cell.kind != CellKind::facet_box) {
    return cell.polytope.contains(x, tol);
  }
  if (x.dim() != cell.box.dim()) {
    throw GeometryError("cell_contains: dimension mismatch");
  }
  const auto u = cell.chart->inverse(x);
  return u && cell.box.contains(*u, tol);
}

int ConvexPartition::locate(const SpherePoint& x) const {
  if (x.dim() != d) {
    throw GeometryError("locate: dimension mismatch");
  }
  if (layout == Layout::frame) {
    const int f = frame->facet_of(x);
    if (f >= 0) {
      const auto u = frame->chart_coords(f, x);
      if (u) {
        const auto [begin, end] = facet_ranges[static_cast<std::size_t>(f)];
        for (int i = begin; i < end; ++i) {
          if (cells[static_cast<std::size_t>(i)].box.contains(*u, 1e-12)) return i;
        }
      }
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cell_contains(cells[i], x, 1e-12)) return static_cast<int>(i);
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cell_contains(cells[i], x, 1e-9)) return static_cast<int>(i);
  }
  return -1;
}

std::pair<SpherePoint, double> incenter(const Cell& cell) {
  return {cell.anchor, cell.inradius};
}

double cell_diameter(const Cell& cell) {
  if (cell.kind != CellKind::facet_box) return std::numbers::pi;
  std::vector<SpherePoint> pts = cell.vertices;
  // boundary samples: random points on random faces of the box
  std::mt19937_64 rng(0x5eed);
  const int d = cell.box.dim();
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  std::vector<double> u(static_cast<std::size_t>(d));
  for (int s = 0; s < 64; ++s) {
    const int axis = s % d;
    const bool upper = (s / d) % 2 == 1;
    for (int j = 0; j < d; ++j) {
      u[j] = cell.box.lower[j] + unit01(rng) * (cell.box.upper[j] - cell.box.lower[j]);
    }
    u[axis] = upper ? cell.box.upper[axis] : cell.box.lower[axis];
    pts.push_back(cell.chart->map(u));
  }
  double diam = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) diam = std::max(diam, geodesic_distance(pts[i], pts[j]));
  }
  return diam;
}

double partition_norm(const ConvexPartition& partition) {
  std::vector<double> diam(partition.cells.size());
  detail::parallel_for(diam.size(), [&](std::size_t i) { diam[i] = cell_diameter(partition.cells[i]); });
  return diam.empty() ? 0.0 : *std::max_element(diam.begin(), diam.end());
}

void set_thread_count(int threads) {
  if (threads < 1) {
    throw GeometryError("thread count must be >= 1");
  }
  g_threads = threads;
}

int thread_count() { return g_threads; }

}  // namespace wsd
