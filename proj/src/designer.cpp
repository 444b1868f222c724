#include "wsd/designer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "parallel.hpp"
#include "wsd/quadrature.hpp"

namespace wsd {

void DesignerConfig::validate() const {
  if (!(epsilon > 0.0)) throw GeometryError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw GeometryError("delta must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) throw GeometryError("eta must lie in (0, 1)");
  if (!(tol_residual >= 0.0)) throw GeometryError("tol_residual must be non-negative");
  if (max_iters < 0) throw GeometryError("max_iters must be non-negative");
}

double AnchoredConfiguration::required_depth(std::size_t i, const DesignerConfig& config) const {
  return 0.5 * config.delta * std::sin(radii.at(i));
}

AnchoredConfiguration anchor_configuration(std::shared_ptr<const ConvexPartition> partition) {
  if (!partition) {
    throw GeometryError("anchor_configuration: null partition");
  }
  AnchoredConfiguration a;
  a.partition = partition;
  for (const Cell& c : partition->cells) {
    a.anchors.push_back(c.anchor);
    // caps wider than a hemisphere add nothing to the depth requirement
    a.radii.push_back(std::min(c.inradius, 0.5 * std::numbers::pi));
  }
  a.points = a.anchors;
  return a;
}

double g_eps(const DesignerConfig& config, double v) {
  if (!(v >= 0.0)) {
    throw GeometryError("g_eps: argument must be non-negative");
  }
  return v <= config.epsilon ? v / config.epsilon : 1.0;
}

SpherePoint argmax_on_cell(const Cell& cell, const TangentVector& y) {
  if (!(y.norm() > 0.0)) {
    throw GeometryError("argmax_on_cell: zero direction");
  }
  return cell.polytope.support_point(y.vec());
}

SpherePoint map_point(const DesignerConfig& config, const Cell& cell, const SpherePoint& anchor, const Poly& p) {
  const Vec grad = spherical_gradient(p, anchor);
  const double g = grad.norm();
  if (!(g > 0.0)) return anchor;
  const SpherePoint z = argmax_on_cell(cell, TangentVector(anchor, grad));
  const double h = (1.0 - config.delta) * g_eps(config, g);
  return geodesic_point(GeodesicArc(anchor, z), h);
}

std::vector<SpherePoint> map_points(const DesignerConfig& config, const AnchoredConfiguration& anchored,
                                    const Poly& p) {
  std::vector<SpherePoint> out(anchored.anchors.size());
  detail::parallel_for(out.size(), [&](std::size_t i) {
    out[i] = map_point(config, anchored.partition->cells[i], anchored.anchors[i], p);
  });
  return out;
}

double pairing(const DesignerConfig& config, const AnchoredConfiguration& anchored, const Poly& p) {
  const std::vector<SpherePoint> x = map_points(config, anchored, p);
  double sum = 0.0;
  for (const SpherePoint& xi : x) sum += eval(p, xi);
  return sum / static_cast<double>(x.size());
}

namespace {

void require_points(const HarmonicSpace& space, const std::vector<SpherePoint>& points) {
  if (points.empty()) {
    throw GeometryError("design residual: empty point set");
  }
  for (const SpherePoint& x : points) {
    if (x.dim() != space.dim()) {
      throw GeometryError("design residual: point dimension does not match the space");
    }
  }
}

Mat stack(const std::vector<SpherePoint>& points) {
  Mat x(points.front().ambient_dim(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = points[i].coords();
  return x;
}

// Averaged kernel (1/N) sum_i K(x_i . y_q) at every node, times sqrt(w_q).
struct ResidualField {
  SphereRule rule;
  Vec sqrt_w;
  KernelEvaluator kernel;

  explicit ResidualField(const HarmonicSpace& space)
      : rule(sphere_product_rule(space.dim(), 2 * space.degree())), kernel(space) {
    sqrt_w.resize(static_cast<Eigen::Index>(rule.size()));
    for (std::size_t q = 0; q < rule.size(); ++q) sqrt_w[static_cast<Eigen::Index>(q)] = std::sqrt(rule.weights[q]);
  }

  Vec residual(const Mat& x) const {
    const Mat dots = rule.nodes.transpose() * x;  // Q x N
    const auto n = static_cast<double>(x.cols());
    Vec e(dots.rows());
    for (Eigen::Index q = 0; q < dots.rows(); ++q) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < dots.cols(); ++i) s += kernel.value(std::clamp(dots(q, i), -1.0, 1.0));
      e[q] = sqrt_w[q] * s / n;
    }
    return e;
  }
};

}  // namespace

ResidualReport design_residual(const HarmonicSpace& space, const std::vector<SpherePoint>& points) {
  require_points(space, points);
  const SphereRule rule = sphere_product_rule(space.dim(), 2 * space.degree());
  const KernelEvaluator kernel(space);
  const Mat x = stack(points);
  const Mat dots = rule.nodes.transpose() * x;
  const int t = space.degree();
  const auto n = static_cast<double>(points.size());
  ResidualReport rep;
  rep.per_degree.assign(static_cast<std::size_t>(t), 0.0);
  std::vector<double> terms;
  std::vector<double> field(static_cast<std::size_t>(t));
  for (Eigen::Index q = 0; q < dots.rows(); ++q) {
    std::fill(field.begin(), field.end(), 0.0);
    for (Eigen::Index i = 0; i < dots.cols(); ++i) {
      kernel.terms(std::clamp(dots(q, i), -1.0, 1.0), terms);
      for (int k = 0; k < t; ++k) field[k] += terms[k];
    }
    for (int k = 0; k < t; ++k) {
      const double f = field[k] / n;
      rep.per_degree[k] += rule.weights[static_cast<std::size_t>(q)] * f * f;
    }
  }
  double sum = 0.0;
  for (double v : rep.per_degree) sum += v;
  rep.total = std::sqrt(sum);
  return rep;
}

double design_residual_pairwise(const HarmonicSpace& space, const std::vector<SpherePoint>& points) {
  require_points(space, points);
  const KernelEvaluator kernel(space);
  const Mat x = stack(points);
  const Mat gram = x.transpose() * x;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.cols(); ++j) sum += kernel.value(std::clamp(gram(i, j), -1.0, 1.0));
  }
  const auto n = static_cast<double>(points.size());
  return std::sqrt(std::max(0.0, sum / (n * n)));
}

Mat residual_gradient(const HarmonicSpace& space, const std::vector<SpherePoint>& points) {
  require_points(space, points);
  const KernelEvaluator kernel(space);
  const Mat x = stack(points);
  const Mat gram = x.transpose() * x;
  const auto n = static_cast<double>(points.size());
  Mat g = Mat::Zero(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    Vec acc = Vec::Zero(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double s = std::clamp(gram(i, j), -1.0, 1.0);
      acc += kernel.value_and_derivative(s).second * (x.col(j) - s * x.col(i));
    }
    g.col(i) = 2.0 / (n * n) * acc;
  }
  return g;
}

double min_separation(const std::vector<SpherePoint>& points) {
  double best = std::numbers::pi;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) best = std::min(best, geodesic_distance(points[i], points[j]));
  }
  return best;
}

int depth_violations(const AnchoredConfiguration& anchored, const DesignerConfig& config, double tol) {
  int bad = 0;
  for (std::size_t i = 0; i < anchored.size(); ++i) {
    const Cell& cell = anchored.partition->cells[i];
    const double dist = cell.polytope.boundary_distance(anchored.points[i]);
    if (!cell_contains(cell, anchored.points[i]) || dist < anchored.required_depth(i, config) - tol) ++bad;
  }
  return bad;
}

namespace {

void finish_report(SolverReport& rep, const HarmonicSpace& space, const AnchoredConfiguration& conf,
                   const DesignerConfig& config) {
  const ResidualReport r = design_residual(space, conf.points);
  rep.final_residual = r.total;
  rep.per_degree = r.per_degree;
  rep.min_separation = conf.size() > 1 ? min_separation(conf.points) : std::numbers::pi;
  double min_r = std::numeric_limits<double>::infinity();
  for (double v : conf.radii) min_r = std::min(min_r, v);
  rep.min_required_separation = config.delta * std::sin(min_r);
  rep.depth_violations = depth_violations(conf, config);
  rep.converged = rep.final_residual <= config.tol_residual && rep.depth_violations == 0;
  rep.config = config;
}

void check_start(const HarmonicSpace& space, const AnchoredConfiguration& start) {
  if (!start.partition) {
    throw GeometryError("solver: configuration has no partition");
  }
  if (start.points.size() != start.partition->cells.size() || start.anchors.size() != start.points.size() ||
      start.radii.size() != start.points.size()) {
    throw GeometryError("solver: configuration and partition sizes differ");
  }
  if (start.partition->d != space.dim()) {
    throw GeometryError("solver: partition dimension does not match the space");
  }
}

// Orthonormal basis of the tangent directions at x that do not decrease any of
// the given (blocking) constraints to first order.
Mat reduced_basis(const SpherePoint& x, const std::vector<Vec>& blocking) {
  Mat basis = tangent_basis(x);
  for (const Vec& n : blocking) {
    Vec c = basis.transpose() * n;
    const double len = c.norm();
    if (len < 1e-14 || basis.cols() == 0) continue;
    c /= len;
    // drop the direction c from the span of basis
    Mat proj = Mat::Identity(basis.cols(), basis.cols()) - c * c.transpose();
    Eigen::JacobiSVD<Mat> svd(basis * proj, Eigen::ComputeThinU);
    const Eigen::Index keep = basis.cols() - 1;
    basis = svd.matrixU().leftCols(keep);
  }
  return basis;
}

}  // namespace

SolveResult solve_positions(const HarmonicSpace& space, const AnchoredConfiguration& start,
                            const DesignerConfig& config) {
  config.validate();
  check_start(space, start);
  const ConvexPartition& part = *start.partition;
  const int d = space.dim();
  const auto n = static_cast<Eigen::Index>(start.size());
  const ResidualField field(space);
  const Eigen::Index nodes = field.rule.nodes.cols();

  SolveResult out;
  out.configuration = start;
  SolverReport& rep = out.report;
  rep.method = "positions";
  if (static_cast<long long>(n) * d < space.total_dim()) {
    rep.underdetermined = true;
    rep.message = "warning: fewer unknowns than polynomial constraints";
  }

  std::vector<double> depth(static_cast<std::size_t>(n));
  std::vector<double> depth_sin(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    depth[i] = start.required_depth(static_cast<std::size_t>(i), config);
    depth_sin[i] = std::sin(depth[i]);
  }
  auto clip = [&](Eigen::Index i, const SpherePoint& x) {
    return part.cells[static_cast<std::size_t>(i)].polytope.project_to_depth(x, depth[i]);
  };

  std::vector<SpherePoint>& pts = out.configuration.points;
  for (Eigen::Index i = 0; i < n; ++i) pts[i] = clip(i, pts[i]);
  Mat x = stack(pts);
  Vec e = field.residual(x);
  double r2 = e.squaredNorm();
  rep.residual_trajectory.push_back(std::sqrt(r2));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;
  double mu = 1e-6;
  int stall = 0;
  int perturbations = 0;
  double checkpoint = r2;
  const auto inv_n = 1.0 / static_cast<double>(n);

  int it = 0;
  while (std::sqrt(r2) > config.tol_residual && it < config.max_iters) {
    ++it;
    // blocking constraints for points sitting on their shrunk-cell boundary
    std::vector<std::vector<Vec>> blocking(static_cast<std::size_t>(n));
    std::vector<Mat> basis(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) basis[i] = tangent_basis(pts[i]);

    Vec step;
    Vec grad;
    std::vector<Eigen::Index> offset(static_cast<std::size_t>(n) + 1);
    for (int pass = 0; pass <= d; ++pass) {
      offset[0] = 0;
      for (Eigen::Index i = 0; i < n; ++i) offset[i + 1] = offset[i] + basis[i].cols();
      const Eigen::Index vars = offset[n];
      Mat jac = Mat::Zero(nodes, vars);
      const Mat dots = field.rule.nodes.transpose() * x;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (basis[i].cols() == 0) continue;
        const Mat proj = field.rule.nodes.transpose() * basis[i];  // Q x k
        for (Eigen::Index q = 0; q < nodes; ++q) {
          const double dk = field.kernel.value_and_derivative(std::clamp(dots(q, i), -1.0, 1.0)).second;
          jac.block(q, offset[i], 1, basis[i].cols()) = (field.sqrt_w[q] * inv_n * dk) * proj.row(q);
        }
      }
      grad = 2.0 * jac.transpose() * e;
      if (nodes <= vars) {
        Mat m = jac * jac.transpose();
        const double scale = std::max(1e-300, m.diagonal().maxCoeff());
        m.diagonal().array() += mu * scale;
        step = -jac.transpose() * m.ldlt().solve(e);
      } else {
        Mat m = jac.transpose() * jac;
        const double scale = std::max(1e-300, m.diagonal().maxCoeff());
        m.diagonal().array() += mu * scale;
        step = -m.ldlt().solve(jac.transpose() * e);
      }
      bool changed = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (basis[i].cols() == 0) continue;
        const Vec v = basis[i] * step.segment(offset[i], basis[i].cols());
        for (const Vec& nk : part.cells[static_cast<std::size_t>(i)].polytope.normals()) {
          if (nk.dot(x.col(i)) <= depth_sin[i] + 1e-9 && nk.dot(v) < 0.0) {
            auto& blk = blocking[static_cast<std::size_t>(i)];
            if (std::find_if(blk.begin(), blk.end(), [&](const Vec& b) { return (b - nk).norm() == 0.0; }) ==
                blk.end()) {
              blk.push_back(nk);
              changed = true;
            }
          }
        }
        if (changed) basis[i] = reduced_basis(pts[i], blocking[static_cast<std::size_t>(i)]);
      }
      if (!changed) break;
    }

    const double slope = grad.dot(step);
    double tau = 1.0;
    bool accepted = false;
    std::vector<SpherePoint> trial(pts.size());
    for (int halving = 0; halving <= 30; ++halving) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index k = basis[i].cols();
        const Vec moved = k == 0 ? Vec(x.col(i)) : Vec(x.col(i) + tau * basis[i] * step.segment(offset[i], k));
        trial[i] = clip(i, SpherePoint(moved));
      }
      const Mat tx = stack(trial);
      const Vec te = field.residual(tx);
      const double tr2 = te.squaredNorm();
      if (tr2 <= r2 + 1e-4 * tau * std::min(0.0, slope) && tr2 < r2) {
        pts = trial;
        x = tx;
        e = te;
        r2 = tr2;
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (accepted) {
      mu = tau == 1.0 ? std::max(1e-15, mu / 3.0) : mu;
    } else {
      mu = std::min(1e6, mu * 100.0);
    }
    rep.residual_trajectory.push_back(std::sqrt(r2));

    // stall detection: seeded perturbation within the cells
    if (it % 25 == 0) {
      if (r2 > 0.999 * checkpoint) {
        ++stall;
      } else {
        stall = 0;
      }
      checkpoint = r2;
      if (stall >= 2 && perturbations < 20) {
        ++perturbations;
        stall = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Mat b = tangent_basis(pts[i]);
          Vec g(b.cols());
          for (Eigen::Index j = 0; j < g.size(); ++j) g[j] = normal(rng);
          const double r = 0.1 * start.radii[static_cast<std::size_t>(i)];
          pts[i] = clip(i, SpherePoint(Vec(x.col(i) + r * b * g / std::max(1.0, g.norm()))));
        }
        x = stack(pts);
        e = field.residual(x);
        r2 = e.squaredNorm();
        mu = 1e-6;
        checkpoint = r2;
      }
    }
  }
  rep.iterations = it;
  finish_report(rep, space, out.configuration, config);
  if (!rep.converged && rep.message.empty()) {
    rep.message = "residual above tolerance after " + std::to_string(it) + " iterations";
  }
  return out;
}

FixedPointResult solve_fixed_point(const HarmonicSpace& space, const AnchoredConfiguration& start,
                                   const DesignerConfig& config) {
  config.validate();
  check_start(space, start);
  require_explicit_basis(space);
  const int t = space.degree();
  Poly p = Poly::zero(space);

  auto field_of = [&](const std::vector<SpherePoint>& pts) {
    Vec f = Vec::Zero(space.total_dim());
    for (const SpherePoint& x : pts) f += basis_values(t, x);
    return Vec(f / static_cast<double>(pts.size()));
  };

  std::vector<SpherePoint> pts = map_points(config, start, p);
  Vec f = field_of(pts);
  double r = f.norm();
  SolverReport rep;
  rep.method = "fixedpoint";
  rep.residual_trajectory.push_back(r);
  double tau = 1.0;
  int it = 0;
  while (r > config.tol_residual && it < config.max_iters) {
    ++it;
    bool accepted = false;
    while (tau > 1e-12) {
      Poly trial(space, p.coeffs - tau * f);
      if (grad_l1_norm(trial, 1e-4) < 1.0) {
        std::vector<SpherePoint> tp = map_points(config, start, trial);
        Vec tf = field_of(tp);
        const double tr = tf.norm();
        if (tr < r) {
          p = trial;
          pts = std::move(tp);
          f = tf;
          r = tr;
          accepted = true;
          tau = std::min(1e6, 2.0 * tau);
          break;
        }
      }
      tau *= 0.5;
    }
    rep.residual_trajectory.push_back(r);
    if (!accepted) {
      rep.message = "step size underflow: no admissible decrease";
      break;
    }
  }
  rep.iterations = it;
  AnchoredConfiguration conf = start;
  conf.points = pts;
  finish_report(rep, space, conf, config);
  if (!rep.converged && rep.message.empty()) {
    rep.message = "residual above tolerance after " + std::to_string(it) + " iterations";
  }
  return FixedPointResult{p, conf, rep};
}

}  // namespace wsd
