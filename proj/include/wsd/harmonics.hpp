#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "wsd/geom.hpp"

namespace wsd {

constexpr int kMaxDegree = 100;

/// dim H_k on S^d: binom(k+d, d) - binom(k+d-2, d).
long long harmonic_dim(int d, int k);

/// Mean-zero polynomials of degree <= t on S^d.
class HarmonicSpace {
public:
  HarmonicSpace(int d, int t);

  int dim() const { return d_; }
  int degree() const { return t_; }
  /// dim H_k for k = 1..t.
  const std::vector<long long>& dims() const { return dims_; }
  long long total_dim() const { return total_; }

  bool operator==(const HarmonicSpace& other) const { return d_ == other.d_ && t_ == other.t_; }

private:
  int d_;
  int t_;
  std::vector<long long> dims_;
  long long total_;
};

struct KernelValue {
  std::vector<double> terms;  // Z_k(s), k = 1..t
  double value = 0.0;         // K_t(s)
};

/// Z_k(s) = dim H_k P_k(s) with P_k the Gegenbauer polynomial of index
/// (d-1)/2 scaled to P_k(1) = 1; K_t = sum of Z_k.
KernelValue kernel(const HarmonicSpace& space, double s);
double kernel_derivative(const HarmonicSpace& space, double s);

/// K_t(s) and K_t'(s) in one recurrence pass; the hot path for solvers.
class KernelEvaluator {
public:
  explicit KernelEvaluator(const HarmonicSpace& space);

  double value(double s) const;
  std::pair<double, double> value_and_derivative(double s) const;
  /// Z_k(s) for k = 1..t written into out (size t).
  void terms(double s, std::vector<double>& out) const;

private:
  int t_;
  double index_;  // (d-1)/2
  std::vector<double> dims_;
};

/// Element of P_t in the orthonormal real harmonic basis (d = 2), ordered
/// degree-major l = 1..t and order-minor m = -l..l.
struct Poly {
  HarmonicSpace space;
  Vec coeffs;

  Poly(HarmonicSpace s, Vec c);
  static Poly zero(const HarmonicSpace& s);

  Poly operator-() const { return Poly(space, -coeffs); }
};

/// Basis index of degree l, order m.
inline int basis_index(int l, int m) { return l * l - 1 + m + l; }

/// Values of all basis functions at x (d = 2), length (t+1)^2 - 1.
Vec basis_values(int t, const SpherePoint& x);
/// Spherical gradients of all basis functions at x: 3 x ((t+1)^2 - 1).
Mat basis_gradients(int t, const SpherePoint& x);

double eval(const Poly& p, const SpherePoint& x);
Vec spherical_gradient(const Poly& p, const SpherePoint& x);

/// G_x as a polynomial: coefficients are the basis values at x.
Poly kernel_poly(const HarmonicSpace& space, const SpherePoint& x);

/// (P, Q) from coefficients.
double inner_product(const Poly& p, const Poly& q);
/// (P, Q) by a product rule exact to degree 2t.
double inner_product_quadrature(const Poly& p, const Poly& q);

/// Integral of |grad P| over S^2, refining the grid until two levels agree to rel_tol.
double grad_l1_norm(const Poly& p, double rel_tol = 1e-6);
/// Integral of |P| over S^2: adaptive in latitude, split at sign changes along each ring.
double abs_l1_norm(const Poly& p, double rel_tol = 1e-7);

enum class PolyNormalization { unit_coeff, boundary };

/// Gaussian coefficients from seed, scaled to unit coefficient norm or to
/// grad_l1_norm = 1.
Poly random_poly(const HarmonicSpace& space, std::uint64_t seed, PolyNormalization norm);

void require_explicit_basis(const HarmonicSpace& space);

}  // namespace wsd
