#pragma once

#include <functional>
#include <span>
#include <vector>

#include "wsd/geom.hpp"

namespace wsd {

struct Rule1d {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss rule for the weight (1 - s^2)^a on [-1, 1] with n nodes (Golub-Welsch),
/// weights normalized to sum 1. a = 0 is Gauss-Legendre.
Rule1d gauss_symmetric_jacobi(int n, double a);

/// Gauss-Legendre on [-1, 1] with the standard weights (sum 2).
Rule1d gauss_legendre(int n);

/// Equal-weight product rule on S^d, weights summing to 1, exact for
/// polynomials of total degree <= degree.
struct SphereRule {
  int d = 0;
  int degree = 0;
  Mat nodes;  // (d+1) x count
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  SpherePoint point(std::size_t i) const { return SpherePoint(Vec(nodes.col(static_cast<Eigen::Index>(i)))); }
};

SphereRule sphere_product_rule(int d, int degree);

/// Integrates a function of one variable with adaptive Gauss-Kronrod.
double integrate_1d(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-13);

/// Nested adaptive Gauss-Kronrod over an axis-parallel box.
double integrate_box(const std::function<double(std::span<const double>)>& f, std::span<const double> lower,
                     std::span<const double> upper, double rel_tol = 1e-13);

/// Integrates a function on S^2 (normalized measure) by nested adaptive
/// Gauss-Kronrod in (cos colatitude, longitude); copes with kinks such as |P|.
double integrate_s2_adaptive(const std::function<double(const Eigen::Ref<const Vec>&)>& f, double rel_tol);

}  // namespace wsd
