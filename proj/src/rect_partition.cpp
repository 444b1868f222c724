#include "wsd/rect_partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsd/quadrature.hpp"

namespace wsd {

Rect::Rect(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) {
    throw GeometryError("Rect: bound dimension mismatch");
  }
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (!(lower[j] < upper[j])) {
      throw GeometryError("Rect: lower bound must be below upper bound on every axis");
    }
  }
}

Rect Rect::cube(int m) {
  return Rect(std::vector<double>(static_cast<std::size_t>(m), -1.0), std::vector<double>(static_cast<std::size_t>(m), 1.0));
}

double Rect::diameter() const {
  double s = 0.0;
  for (std::size_t j = 0; j < lower.size(); ++j) {
    s += (upper[j] - lower[j]) * (upper[j] - lower[j]);
  }
  return std::sqrt(s);
}

std::vector<double> Rect::center() const {
  std::vector<double> c(lower.size());
  for (std::size_t j = 0; j < lower.size(); ++j) c[j] = 0.5 * (lower[j] + upper[j]);
  return c;
}

bool Rect::contains(std::span<const double> x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (x[j] < lower[j] - tol || x[j] > upper[j] + tol) return false;
  }
  return true;
}

Rect Rect::with_last_axis(double lo, double hi) const {
  Rect r = *this;
  r.lower.back() = lo;
  r.upper.back() = hi;
  return r;
}

Rect Rect::drop_last_axis() const {
  Rect r = *this;
  r.lower.pop_back();
  r.upper.pop_back();
  return r;
}

DensityMeasure::DensityMeasure(int dim, Fn density, double uniformity_bound)
    : dim_(dim), density_(std::move(density)), uniformity_bound_(uniformity_bound) {
  if (dim_ < 1) {
    throw GeometryError("DensityMeasure: dimension must be >= 1");
  }
  if (!density_) {
    throw GeometryError("DensityMeasure: empty density");
  }
}

double DensityMeasure::mass(const Rect& box) const {
  if (box.dim() != dim_) {
    throw GeometryError("DensityMeasure::mass: box dimension mismatch");
  }
  const double m = integrate_box(density_, box.lower, box.upper);
  if (!std::isfinite(m)) {
    throw GeometryError("DensityMeasure::mass: non-integrable density");
  }
  return m;
}

double DensityMeasure::mass_below(const Rect& box, double c) const {
  if (c <= box.lower.back()) return 0.0;
  Rect cut = box;
  cut.upper.back() = std::min(c, box.upper.back());
  return mass(cut);
}

double DensityMeasure::sampled_uniformity(const Rect& box, int per_axis) const {
  const int m = box.dim();
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  std::vector<double> x(static_cast<std::size_t>(m));
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  while (true) {
    for (int j = 0; j < m; ++j) {
      const double f = per_axis == 1 ? 0.5 : static_cast<double>(idx[j]) / (per_axis - 1);
      x[j] = box.lower[j] + f * (box.upper[j] - box.lower[j]);
    }
    const double v = density_(x);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    int j = 0;
    while (j < m && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == m) break;
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

int RectPartition::locate(std::span<const double> x, double tol) const {
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].contains(x, tol)) return static_cast<int>(i);
  }
  return -1;
}

SplitCounts split_counts(int n, int l) {
  if (n < 1 || l < 1) {
    throw GeometryError("split_counts: need N >= 1 and l >= 1");
  }
  // largest k with k^l <= n, in integers
  int k = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(n), 1.0 / l))));
  auto ipow = [l](long long b) {
    long long p = 1;
    for (int i = 0; i < l; ++i) p *= b;
    return p;
  };
  while (ipow(k + 1) <= n) ++k;
  while (k > 1 && ipow(k) > n) --k;
  SplitCounts sc;
  sc.k = k;
  sc.s = n / k;
  sc.r = n - k * sc.s;
  return sc;
}

double measure_1d_cut(const std::function<double(double)>& cumulative, double lo, double hi, double target_mass,
                      double rel_tol) {
  const double total = cumulative(hi);
  if (target_mass < 0.0 || target_mass > total * (1.0 + 1e-12)) {
    throw GeometryError("measure_1d_cut: target exceeds the available mass");
  }
  if (target_mass <= 0.0) return lo;
  if (target_mass >= total) return hi;
  double a = lo;
  double b = hi;
  const double mass_tol = rel_tol * total;
  // smallest c with cumulative(c) >= target
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    const double fm = cumulative(mid);
    if (fm < target_mass) {
      a = mid;
    } else {
      b = mid;
    }
    if (std::abs(fm - target_mass) <= 1e-3 * mass_tol &&
        b - a <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid))) {
      break;
    }
  }
  return 0.5 * (a + b);
}

double measure_1d_cut(const std::function<double(double)>& cumulative, const std::function<double(double)>& rate,
                      double lo, double hi, double target_mass, double rel_tol) {
  const double total = cumulative(hi);
  if (target_mass < 0.0 || target_mass > total * (1.0 + 1e-12)) {
    throw GeometryError("measure_1d_cut: target exceeds the available mass");
  }
  if (target_mass <= 0.0) return lo;
  if (target_mass >= total) return hi;
  const double mass_tol = 1e-2 * rel_tol * total;
  double a = lo;
  double b = hi;
  double x = lo + (hi - lo) * target_mass / total;
  for (int it = 0; it < 200; ++it) {
    const double fx = cumulative(x);
    if (std::abs(fx - target_mass) <= mass_tol) {
      if (rate(x) > 0.0) return x;
      break;
    }
    if (fx < target_mass) {
      a = x;
    } else {
      b = x;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return 0.5 * (a + b);
    const double r = rate(x);
    const double step = r > 0.0 ? x + (target_mass - fx) / r : a;
    x = step > a && step < b ? step : 0.5 * (a + b);
  }
  return measure_1d_cut(cumulative, lo, hi, target_mass, rel_tol);
}

double measure_1d_cut(const DensityMeasure& density, double lo, double hi, double target_mass, double rel_tol) {
  if (density.dim() != 1) {
    throw GeometryError("measure_1d_cut: density must be one-dimensional");
  }
  if (!(lo < hi)) {
    throw GeometryError("measure_1d_cut: empty interval");
  }
  auto cumulative = [&](double c) {
    if (c <= lo) return 0.0;
    return integrate_1d([&](double v) { return density(std::span<const double>(&v, 1)); }, lo, c);
  };
  return measure_1d_cut(cumulative, lo, hi, target_mass, rel_tol);
}

DensityMeasure marginal_density(const DensityMeasure& density, double slab_lo, double slab_hi) {
  if (density.dim() < 2) {
    throw GeometryError("marginal_density: density must have dimension >= 2");
  }
  if (!(slab_lo < slab_hi)) {
    throw GeometryError("marginal_density: empty slab");
  }
  DensityMeasure::Fn parent = density.fn();
  const int m = density.dim();
  auto fn = [parent, slab_lo, slab_hi, m](std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    y.resize(static_cast<std::size_t>(m));
    return integrate_1d(
        [&](double v) {
          y.back() = v;
          return parent(y);
        },
        slab_lo, slab_hi);
  };
  const double bound = density.uniformity_bound();
  return DensityMeasure(m - 1, fn, 2.0 * bound * bound);
}

namespace {

void partition_recursive(const Rect& rect, const DensityMeasure& density, int n, std::vector<Rect>& out) {
  const int m = rect.dim();
  if (n == 1) {
    out.push_back(rect);
    return;
  }
  if (m == 1) {
    const double lo = rect.lower[0];
    const double hi = rect.upper[0];
    auto cumulative = [&](double c) {
      if (c <= lo) return 0.0;
      return integrate_1d([&](double v) { return density(std::span<const double>(&v, 1)); }, lo, c);
    };
    auto rate = [&](double c) { return density(std::span<const double>(&c, 1)); };
    const double total = cumulative(hi);
    double prev = lo;
    for (int i = 1; i <= n; ++i) {
      const double cut = i == n ? hi : measure_1d_cut(cumulative, rate, lo, hi, total * i / n);
      if (!(cut > prev)) {
        throw GeometryError("partition_rect: degenerate cut (density vanishes on a slab)");
      }
      out.emplace_back(std::vector<double>{prev}, std::vector<double>{cut});
      prev = cut;
    }
    return;
  }
  const SplitCounts sc = split_counts(n, m);
  const double total = density.mass(rect);
  const double lo = rect.lower.back();
  const double hi = rect.upper.back();
  auto cumulative = [&](double c) { return density.mass_below(rect, c); };
  const Rect face = rect.drop_last_axis();
  const DensityMeasure::Fn& fn = density.fn();
  auto rate = [&](double c) {
    return integrate_box(
        [&](std::span<const double> x) {
          std::vector<double> y(x.begin(), x.end());
          y.push_back(c);
          return fn(y);
        },
        face.lower, face.upper);
  };
  double prev = lo;
  int assigned = 0;
  for (int i = 1; i <= sc.k; ++i) {
    const int pieces = i <= sc.r ? sc.s + 1 : sc.s;
    assigned += pieces;
    const double cut = i == sc.k ? hi : measure_1d_cut(cumulative, rate, lo, hi, total * assigned / n);
    if (!(cut > prev)) {
      throw GeometryError("partition_rect: degenerate slab");
    }
    const DensityMeasure marginal = marginal_density(density, prev, cut);
    std::vector<Rect> sub;
    partition_recursive(face, marginal, pieces, sub);
    for (Rect& p : sub) {
      p.lower.push_back(prev);
      p.upper.push_back(cut);
      out.push_back(std::move(p));
    }
    prev = cut;
  }
}

}  // namespace

RectPartition partition_rect(const Rect& rect, const DensityMeasure& density, int n) {
  if (n < 1) {
    throw GeometryError("partition_rect: N must be >= 1");
  }
  if (rect.dim() != density.dim()) {
    throw GeometryError("partition_rect: density and rectangle dimensions differ");
  }
  RectPartition result;
  result.parent = rect;
  result.pieces.reserve(static_cast<std::size_t>(n));
  partition_recursive(rect, density, n, result.pieces);
  result.measures.reserve(result.pieces.size());
  for (const Rect& p : result.pieces) {
    result.measures.push_back(density.mass(p));
  }
  return result;
}

}  // namespace wsd
