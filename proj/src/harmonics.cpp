#include "wsd/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/tools/toms748_solve.hpp>

#include "wsd/quadrature.hpp"

namespace wsd {

namespace {

long long binom(int n, int k) {
  if (k < 0 || n < k) return 0;
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<long long>(std::llround(r));
}

void check_cosine(double s) {
  if (!(std::abs(s) <= 1.0 + 1e-12)) {
    throw GeometryError("kernel: |s| must not exceed 1");
  }
}

}  // namespace

long long harmonic_dim(int d, int k) {
  if (d < 1 || k < 0) {
    throw GeometryError("harmonic_dim: invalid arguments");
  }
  if (k == 0) return 1;
  return binom(k + d, d) - binom(k + d - 2, d);
}

HarmonicSpace::HarmonicSpace(int d, int t) : d_(d), t_(t), total_(0) {
  if (d < 1) {
    throw GeometryError("HarmonicSpace: dimension must be >= 1");
  }
  if (t < 1 || t > kMaxDegree) {
    throw GeometryError("HarmonicSpace: degree must lie in [1, 100]");
  }
  for (int k = 1; k <= t; ++k) {
    dims_.push_back(harmonic_dim(d, k));
    total_ += dims_.back();
  }
}

KernelEvaluator::KernelEvaluator(const HarmonicSpace& space)
    : t_(space.degree()), index_(0.5 * (space.dim() - 1)) {
  for (long long n : space.dims()) dims_.push_back(static_cast<double>(n));
}

void KernelEvaluator::terms(double s, std::vector<double>& out) const {
  out.resize(static_cast<std::size_t>(t_));
  double p0 = 1.0;
  double p1 = s;
  out[0] = dims_[0] * p1;
  for (int k = 1; k < t_; ++k) {
    const double p2 = ((2.0 * k + 2.0 * index_) * s * p1 - k * p0) / (k + 2.0 * index_);
    p0 = p1;
    p1 = p2;
    out[static_cast<std::size_t>(k)] = dims_[static_cast<std::size_t>(k)] * p1;
  }
}

double KernelEvaluator::value(double s) const {
  double p0 = 1.0;
  double p1 = s;
  double sum = dims_[0] * p1;
  for (int k = 1; k < t_; ++k) {
    const double p2 = ((2.0 * k + 2.0 * index_) * s * p1 - k * p0) / (k + 2.0 * index_);
    p0 = p1;
    p1 = p2;
    sum += dims_[static_cast<std::size_t>(k)] * p1;
  }
  return sum;
}

std::pair<double, double> KernelEvaluator::value_and_derivative(double s) const {
  double p0 = 1.0;
  double p1 = s;
  double q0 = 0.0;
  double q1 = 1.0;
  double sum = dims_[0] * p1;
  double dsum = dims_[0];
  for (int k = 1; k < t_; ++k) {
    const double a = 2.0 * k + 2.0 * index_;
    const double b = k + 2.0 * index_;
    const double p2 = (a * s * p1 - k * p0) / b;
    const double q2 = (a * (p1 + s * q1) - k * q0) / b;
    p0 = p1;
    p1 = p2;
    q0 = q1;
    q1 = q2;
    sum += dims_[static_cast<std::size_t>(k)] * p1;
    dsum += dims_[static_cast<std::size_t>(k)] * q1;
  }
  return {sum, dsum};
}

KernelValue kernel(const HarmonicSpace& space, double s) {
  check_cosine(s);
  KernelEvaluator ev(space);
  KernelValue kv;
  ev.terms(std::clamp(s, -1.0, 1.0), kv.terms);
  for (double z : kv.terms) kv.value += z;
  return kv;
}

double kernel_derivative(const HarmonicSpace& space, double s) {
  check_cosine(s);
  return KernelEvaluator(space).value_and_derivative(std::clamp(s, -1.0, 1.0)).second;
}

Poly::Poly(HarmonicSpace s, Vec c) : space(std::move(s)), coeffs(std::move(c)) {
  if (coeffs.size() != space.total_dim()) {
    throw GeometryError("Poly: coefficient count does not match the space");
  }
}

Poly Poly::zero(const HarmonicSpace& s) { return Poly(s, Vec::Zero(s.total_dim())); }

void require_explicit_basis(const HarmonicSpace& space) {
  if (space.dim() != 2) {
    throw GeometryError("explicit harmonic basis is available only for d = 2");
  }
}

namespace {

// Real harmonics with polar axis x2: Y = sqrt2 * L_l^m(x2) * Re/Im (x0 + i x1)^|m|,
// L the normalized associated Legendre factor without its sin^m part.
void basis_eval(int t, const Vec& x, Vec* values, Mat* grads) {
  const double x0 = x[0];
  const double x1 = x[1];
  const double z = x[2];
  const int count = (t + 1) * (t + 1) - 1;
  std::vector<double> re(static_cast<std::size_t>(t + 1));
  std::vector<double> im(static_cast<std::size_t>(t + 1));
  re[0] = 1.0;
  im[0] = 0.0;
  for (int m = 1; m <= t; ++m) {
    re[m] = re[m - 1] * x0 - im[m - 1] * x1;
    im[m] = re[m - 1] * x1 + im[m - 1] * x0;
  }
  if (values) values->resize(count);
  Mat amb;
  if (grads) amb = Mat::Zero(3, count);
  std::vector<double> leg(static_cast<std::size_t>(t + 1));
  std::vector<double> dleg(static_cast<std::size_t>(t + 1));
  double diag = 1.0;
  for (int m = 0; m <= t; ++m) {
    if (m > 0) diag *= std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    leg[m] = diag;
    dleg[m] = 0.0;
    if (m + 1 <= t) {
      leg[m + 1] = std::sqrt(2.0 * m + 3.0) * z * diag;
      dleg[m + 1] = std::sqrt(2.0 * m + 3.0) * diag;
    }
    for (int l = m + 2; l <= t; ++l) {
      const double den = static_cast<double>(l) * l - static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * l * l - 1.0) / den);
      const double b = std::sqrt((2.0 * l + 1.0) * ((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) /
                                 ((2.0 * l - 3.0) * den));
      leg[l] = a * z * leg[l - 1] - b * leg[l - 2];
      dleg[l] = a * (leg[l - 1] + z * dleg[l - 1]) - b * dleg[l - 2];
    }
    const double scale = m == 0 ? 1.0 : std::numbers::sqrt2;
    for (int l = std::max(m, 1); l <= t; ++l) {
      const double f = scale * leg[l];
      const double df = scale * dleg[l];
      const int ic = basis_index(l, m);
      if (values) (*values)[ic] = f * re[m];
      if (grads) {
        if (m > 0) {
          amb(0, ic) = f * m * re[m - 1];
          amb(1, ic) = -f * m * im[m - 1];
        }
        amb(2, ic) = df * re[m];
      }
      if (m > 0) {
        const int is = basis_index(l, -m);
        if (values) (*values)[is] = f * im[m];
        if (grads) {
          amb(0, is) = f * m * im[m - 1];
          amb(1, is) = f * m * re[m - 1];
          amb(2, is) = df * im[m];
        }
      }
    }
  }
  if (grads) {
    // tangential part of the ambient gradient
    const Eigen::RowVectorXd radial = x.transpose() * amb;
    *grads = amb - x * radial;
  }
}

void check_basis_point(const SpherePoint& x) {
  if (x.dim() != 2) {
    throw GeometryError("explicit harmonic basis is available only for d = 2");
  }
}

}  // namespace

Vec basis_values(int t, const SpherePoint& x) {
  check_basis_point(x);
  Vec v;
  basis_eval(t, x.coords(), &v, nullptr);
  return v;
}

Mat basis_gradients(int t, const SpherePoint& x) {
  check_basis_point(x);
  Mat g;
  basis_eval(t, x.coords(), nullptr, &g);
  return g;
}

double eval(const Poly& p, const SpherePoint& x) {
  require_explicit_basis(p.space);
  return basis_values(p.space.degree(), x).dot(p.coeffs);
}

Vec spherical_gradient(const Poly& p, const SpherePoint& x) {
  require_explicit_basis(p.space);
  return basis_gradients(p.space.degree(), x) * p.coeffs;
}

Poly kernel_poly(const HarmonicSpace& space, const SpherePoint& x) {
  require_explicit_basis(space);
  return Poly(space, basis_values(space.degree(), x));
}

namespace {

void require_same_space(const Poly& p, const Poly& q) {
  if (!(p.space == q.space)) {
    throw GeometryError("inner_product: polynomials live in different spaces");
  }
}

}  // namespace

double inner_product(const Poly& p, const Poly& q) {
  require_same_space(p, q);
  return p.coeffs.dot(q.coeffs);
}

double inner_product_quadrature(const Poly& p, const Poly& q) {
  require_same_space(p, q);
  require_explicit_basis(p.space);
  const SphereRule rule = sphere_product_rule(2, 2 * p.space.degree());
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Vec y = basis_values(p.space.degree(), rule.point(i));
    sum += rule.weights[i] * y.dot(p.coeffs) * y.dot(q.coeffs);
  }
  return sum;
}

namespace {

double grid_mean(int n, const std::function<double(const Vec&)>& f) {
  const Rule1d lat = gauss_legendre(n);
  const int lon = 2 * n;
  Vec x(3);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double z = lat.nodes[static_cast<std::size_t>(j)];
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double ring = 0.0;
    for (int k = 0; k < lon; ++k) {
      const double phi = 2.0 * std::numbers::pi * (k + 0.5) / lon;
      x << r * std::cos(phi), r * std::sin(phi), z;
      ring += f(x);
    }
    sum += 0.5 * lat.weights[static_cast<std::size_t>(j)] * ring / lon;
  }
  return sum;
}

}  // namespace

double grad_l1_norm(const Poly& p, double rel_tol) {
  require_explicit_basis(p.space);
  if (p.coeffs.isZero(0.0)) return 0.0;
  const int t = p.space.degree();
  Mat g;
  auto f = [&](const Vec& x) {
    basis_eval(t, x, nullptr, &g);
    return (g * p.coeffs).norm();
  };
  // dyadic refinement of a Gauss-Legendre x uniform grid; the integrand only
  // has conical kinks at isolated critical points
  int n = std::max(64, 16 * t);
  double prev = grid_mean(n, f);
  for (int level = 0; level < 5; ++level) {
    n *= 2;
    const double cur = grid_mean(n, f);
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

double abs_l1_norm(const Poly& p, double rel_tol) {
  require_explicit_basis(p.space);
  if (p.coeffs.isZero(0.0)) return 0.0;
  const int t = p.space.degree();
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const Rule1d gl = gauss_legendre(20);
  const int samples = 16 * (t + 1);
  Vec x(3);
  Vec v;
  // On each latitude the restriction is a trigonometric polynomial: split the
  // circle at its sign changes and integrate the signed pieces.
  auto ring = [&](double z) {
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    auto at = [&](double phi) {
      x << r * std::cos(phi), r * std::sin(phi), z;
      basis_eval(t, x, &v, nullptr);
      return v.dot(p.coeffs);
    };
    std::vector<double> cuts;
    double phi0 = 0.0;
    double f0 = at(phi0);
    for (int k = 1; k <= samples; ++k) {
      const double phi1 = kTwoPi * k / samples;
      const double f1 = at(phi1);
      if ((f0 < 0.0) != (f1 < 0.0) && f0 != 0.0 && f1 != 0.0) {
        boost::uintmax_t iters = 100;
        const auto root = boost::math::tools::toms748_solve(
            at, phi0, phi1, f0, f1, boost::math::tools::eps_tolerance<double>(50), iters);
        cuts.push_back(0.5 * (root.first + root.second));
      }
      phi0 = phi1;
      f0 = f1;
    }
    if (cuts.empty()) cuts.push_back(0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      const double a = cuts[i];
      const double b = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + kTwoPi;
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (a + b);
      double piece = 0.0;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) piece += gl.weights[q] * at(mid + half * gl.nodes[q]);
      total += std::abs(piece * half);
    }
    return total;
  };
  return integrate_1d(ring, -1.0, 1.0, rel_tol) / (2.0 * kTwoPi);
}

Poly random_poly(const HarmonicSpace& space, std::uint64_t seed, PolyNormalization norm) {
  require_explicit_basis(space);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec c(space.total_dim());
  do {
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = normal(rng);
  } while (!(c.norm() > 0.0));
  Poly p(space, c / c.norm());
  if (norm == PolyNormalization::boundary) {
    p.coeffs /= grad_l1_norm(p);
  }
  return p;
}

}  // namespace wsd
