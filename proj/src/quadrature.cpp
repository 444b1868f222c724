#include "wsd/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace wsd {

Rule1d gauss_symmetric_jacobi(int n, double a) {
  if (n < 1) {
    throw GeometryError("gauss rule needs at least one node");
  }
  // Jacobi matrix for weight (1-s^2)^a: zero diagonal, b_k = k(k+2a)/((2k+2a)^2 - 1).
  Mat jacobi = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double num = k * (k + 2.0 * a);
    const double den = (2.0 * k + 2.0 * a + 1.0) * (2.0 * k + 2.0 * a - 1.0);
    const double off = std::sqrt(num / den);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
  Rule1d rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()[i];
    rule.weights[i] = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
  }
  // symmetrize: the rule is exactly symmetric about 0
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (double& w : rule.weights) w /= total;
  return rule;
}

Rule1d gauss_legendre(int n) {
  Rule1d rule = gauss_symmetric_jacobi(n, 0.0);
  // polish nodes with Newton on P_n, weights from the derivative
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 0 ? 1.0 : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      x -= pn / dp;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

namespace {

SphereRule circle_rule(int degree) {
  const int m = degree + 2;
  SphereRule rule;
  rule.d = 1;
  rule.degree = degree;
  rule.nodes.resize(2, m);
  rule.weights.assign(m, 1.0 / m);
  for (int k = 0; k < m; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / m;
    rule.nodes(0, k) = std::cos(phi);
    rule.nodes(1, k) = std::sin(phi);
  }
  return rule;
}

}  // namespace

SphereRule sphere_product_rule(int d, int degree) {
  if (d < 1 || degree < 0) {
    throw GeometryError("sphere_product_rule: invalid arguments");
  }
  if (d == 1) {
    return circle_rule(degree);
  }
  const SphereRule sub = sphere_product_rule(d - 1, degree);
  const Rule1d axis = gauss_symmetric_jacobi(degree / 2 + 1, 0.5 * (d - 2));
  SphereRule rule;
  rule.d = d;
  rule.degree = degree;
  const auto count = static_cast<Eigen::Index>(axis.nodes.size() * sub.size());
  rule.nodes.resize(d + 1, count);
  rule.weights.reserve(static_cast<std::size_t>(count));
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < axis.nodes.size(); ++j) {
    const double s = axis.nodes[j];
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    for (std::size_t q = 0; q < sub.size(); ++q, ++col) {
      rule.nodes(0, col) = s;
      rule.nodes.col(col).tail(d) = c * sub.nodes.col(static_cast<Eigen::Index>(q));
      rule.weights.push_back(axis.weights[j] * sub.weights[q]);
    }
  }
  return rule;
}

double integrate_1d(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, rel_tol);
}

namespace {

double integrate_axis(const std::function<double(std::span<const double>)>& f, std::vector<double>& x,
                      std::span<const double> lower, std::span<const double> upper, int axis, double rel_tol) {
  if (axis < 0) {
    return f(x);
  }
  auto inner = [&](double v) {
    x[static_cast<std::size_t>(axis)] = v;
    return integrate_axis(f, x, lower, upper, axis - 1, rel_tol);
  };
  return integrate_1d(inner, lower[static_cast<std::size_t>(axis)], upper[static_cast<std::size_t>(axis)],
                      rel_tol);
}

}  // namespace

double integrate_box(const std::function<double(std::span<const double>)>& f, std::span<const double> lower,
                     std::span<const double> upper, double rel_tol) {
  if (lower.size() != upper.size()) {
    throw GeometryError("integrate_box: bound dimension mismatch");
  }
  std::vector<double> x(lower.size(), 0.0);
  if (lower.empty()) {
    return f(x);
  }
  return integrate_axis(f, x, lower, upper, static_cast<int>(lower.size()) - 1, rel_tol);
}

double integrate_s2_adaptive(const std::function<double(const Eigen::Ref<const Vec>&)>& f, double rel_tol) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  Vec x(3);
  auto ring = [&](double s) {
    const double r = std::sqrt(std::max(0.0, 1.0 - s * s));
    return integrate_1d(
        [&](double phi) {
          x << r * std::cos(phi), r * std::sin(phi), s;
          return f(x);
        },
        0.0, kTwoPi, 1e-3 * rel_tol);
  };
  return integrate_1d(ring, -1.0, 1.0, rel_tol) / (2.0 * kTwoPi);
}

}  // namespace wsd
