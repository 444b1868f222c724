#include "wsd/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "parallel.hpp"

namespace wsd {

namespace {

long long binom(int n, int k) {
  if (k < 0 || n < k) return 0;
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<long long>(std::llround(r));
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 step on seed ^ index, to decorrelate per-chunk streams
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

long long lower_bound(int d, int t) {
  if (d < 1 || t < 0) {
    throw GeometryError("lower_bound: need d >= 1 and t >= 0");
  }
  if (t == 0) return 1;
  const int k = t / 2;
  if (t % 2 == 0) return binom(d + k, d) + binom(d + k - 1, d);
  return 2 * binom(d + k, d);
}

DesignReport verify_design(const HarmonicSpace& space, const std::vector<SpherePoint>& points, double tolerance,
                           std::uint64_t seed) {
  if (!(tolerance >= 0.0)) {
    throw GeometryError("verify_design: tolerance must be non-negative");
  }
  DesignReport rep;
  rep.d = space.dim();
  rep.t = space.degree();
  rep.n = static_cast<int>(points.size());
  rep.tolerance = tolerance;
  const ResidualReport r = design_residual(space, points);
  rep.residual_total = r.total;
  rep.residual_per_degree = r.per_degree;
  rep.is_design = r.total <= tolerance;
  rep.min_separation = points.size() > 1 ? min_separation(points) : std::numbers::pi;
  rep.separation_scaled = rep.min_separation * std::pow(static_cast<double>(points.size()), 1.0 / rep.d);
  rep.lower_bound = lower_bound(rep.d, rep.t);

  // random unit-norm members of P_t built from kernel slices; their means over
  // the points are bounded by the residual
  const KernelEvaluator kernel(space);
  const int centers = static_cast<int>(std::min<long long>(space.total_dim(), 40));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<SpherePoint> ys = mc_sphere_sample(rep.d, static_cast<std::size_t>(centers), mix(seed, trial));
    Vec c(centers);
    for (int j = 0; j < centers; ++j) c[j] = normal(rng);
    Mat gram(centers, centers);
    for (int a = 0; a < centers; ++a) {
      for (int b = 0; b < centers; ++b) {
        gram(a, b) = kernel.value(std::clamp(ys[a].coords().dot(ys[b].coords()), -1.0, 1.0));
      }
    }
    const double norm = std::sqrt(std::max(0.0, c.dot(gram * c)));
    if (!(norm > 0.0)) continue;
    double mean = 0.0;
    for (const SpherePoint& x : points) {
      for (int j = 0; j < centers; ++j) mean += c[j] * kernel.value(std::clamp(x.coords().dot(ys[j].coords()), -1.0, 1.0));
    }
    mean /= static_cast<double>(points.size()) * norm;
    worst = std::max(worst, std::abs(mean));
  }
  rep.crosscheck_max_mean = worst;
  rep.crosscheck_pass = worst <= tolerance * std::sqrt(static_cast<double>(space.total_dim()));
  return rep;
}

PartitionReport verify_partition(const ConvexPartition& partition, std::size_t samples, std::uint64_t seed,
                                 int convexity_pairs) {
  if (partition.cells.empty()) {
    throw GeometryError("verify_partition: empty partition");
  }
  PartitionReport rep;
  rep.d = partition.d;
  rep.n = partition.n;
  rep.samples = samples;
  const std::size_t cells = partition.cells.size();

  constexpr std::size_t kChunk = 1 << 16;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::vector<std::size_t>> chunk_counts(chunks, std::vector<std::size_t>(cells, 0));
  std::vector<std::size_t> chunk_missing(chunks, 0);
  detail::parallel_for(chunks, [&](std::size_t c) {
    const std::size_t count = std::min(kChunk, samples - c * kChunk);
    for (const SpherePoint& x : mc_sphere_sample(partition.d, count, mix(seed, c))) {
      const int k = partition.locate(x);
      if (k < 0) {
        ++chunk_missing[c];
      } else {
        ++chunk_counts[c][static_cast<std::size_t>(k)];
      }
    }
  });
  rep.counts.assign(cells, 0);
  for (std::size_t c = 0; c < chunks; ++c) {
    rep.uncovered += chunk_missing[c];
    for (std::size_t i = 0; i < cells; ++i) rep.counts[i] += chunk_counts[c][i];
  }
  const double p = 1.0 / static_cast<double>(partition.n);
  const double expected = static_cast<double>(samples) * p;
  const double sigma = std::sqrt(static_cast<double>(samples) * p * (1.0 - p));
  for (std::size_t i = 0; i < cells; ++i) {
    const double z = sigma > 0.0 ? std::abs(static_cast<double>(rep.counts[i]) - expected) / sigma : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, z);
    if (z > 4.0) ++rep.area_failures;
  }

  rep.convexity_pairs = convexity_pairs;
  std::vector<int> failures(cells, 0);
  detail::parallel_for(cells, [&](std::size_t i) {
    std::mt19937_64 rng(mix(seed ^ 0xc0ffeeULL, i));
    const Cell& cell = partition.cells[i];
    for (int k = 0; k < convexity_pairs; ++k) {
      const SpherePoint a = cell.sample(rng);
      const SpherePoint b = cell.sample(rng);
      const Vec mid = a.coords() + b.coords();
      if (mid.norm() < 1e-12) continue;
      if (!cell_contains(cell, SpherePoint(mid), 1e-9)) ++failures[i];
    }
  });
  for (int f : failures) rep.convexity_failures += f;

  rep.norm = partition.norm_estimate;
  rep.k_emp = partition.k_emp;
  rep.b_emp = partition.b_emp;
  rep.min_measure = partition.cells.front().measure;
  rep.max_measure = rep.min_measure;
  for (const Cell& c : partition.cells) {
    rep.min_measure = std::min(rep.min_measure, c.measure);
    rep.max_measure = std::max(rep.max_measure, c.measure);
  }
  rep.pass = rep.area_failures == 0 && rep.uncovered == 0 && rep.convexity_failures == 0;
  return rep;
}

MZReport mz_check(const Poly& p, const ConvexPartition& partition, const std::vector<SpherePoint>& xs,
                  const std::vector<SpherePoint>& ys, double eta) {
  require_explicit_basis(p.space);
  if (xs.size() != partition.cells.size() || ys.size() != partition.cells.size()) {
    throw GeometryError("mz_check: one point per cell required");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!cell_contains(partition.cells[i], xs[i]) || !cell_contains(partition.cells[i], ys[i])) {
      throw GeometryError("mz_check: point " + std::to_string(i) + " lies outside its cell");
    }
  }
  MZReport rep;
  rep.degree = p.space.degree();
  rep.eta = eta;
  rep.norm = partition.norm_estimate;
  rep.norm_times_degree = rep.norm * rep.degree;
  rep.integral_abs = abs_l1_norm(p);
  rep.integral_grad = grad_l1_norm(p);
  double sum_abs = 0.0;
  double sum_grad = 0.0;
  double sum_diff = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Vec gx = spherical_gradient(p, xs[i]);
    sum_abs += std::abs(eval(p, xs[i]));
    sum_grad += gx.norm();
    sum_diff += (gx - spherical_gradient(p, ys[i])).norm();
  }
  const auto n = static_cast<double>(xs.size());
  rep.ratio_abs = rep.integral_abs > 0.0 ? sum_abs / n / rep.integral_abs : 0.0;
  rep.ratio_grad = rep.integral_grad > 0.0 ? sum_grad / n / rep.integral_grad : 0.0;
  rep.diff_grad = sum_diff / n;
  rep.diff_grad_bound = 8.0 * partition.d * eta * rep.integral_grad;
  return rep;
}

namespace {

struct Potential {
  const std::vector<SpherePoint>& points;

  double value(const Vec& x) const {
    double s = 0.0;
    for (const SpherePoint& p : points) s += 1.0 / (x - p.coords()).norm();
    return std::abs(s / static_cast<double>(points.size()) - 1.0);
  }

  Vec gradient(const Vec& x) const {
    double s = 0.0;
    Vec g = Vec::Zero(x.size());
    for (const SpherePoint& p : points) {
      const Vec diff = x - p.coords();
      const double len = diff.norm();
      s += 1.0 / len;
      g -= diff / (len * len * len);
    }
    const auto n = static_cast<double>(points.size());
    return (s / n - 1.0 >= 0.0 ? 1.0 : -1.0) * g / n;
  }
};

}  // namespace

FaradayReport faraday_potential(const std::vector<SpherePoint>& points, double r, int probes, int ascent_steps) {
  if (!(r > 0.0 && r < 1.0)) {
    throw GeometryError("faraday_potential: r must lie in (0, 1)");
  }
  if (points.empty() || probes < 1 || ascent_steps < 0) {
    throw GeometryError("faraday_potential: need points and a positive probe count");
  }
  for (const SpherePoint& p : points) {
    if (p.dim() != 2) {
      throw GeometryError("faraday_potential: points must lie on S^2");
    }
  }
  const Potential pot{points};
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<std::pair<double, Vec>> scored;
  scored.reserve(static_cast<std::size_t>(probes));
  for (int k = 0; k < probes; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / probes;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec u(3);
    u << rho * std::cos(golden * k), rho * std::sin(golden * k), z;
    scored.emplace_back(pot.value(r * u), u);
  }
  const std::size_t starts = std::min<std::size_t>(8, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(starts), scored.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });
  const double spacing = 2.0 * std::sqrt(std::numbers::pi / probes);

  FaradayReport rep;
  rep.r = r;
  rep.probes = probes;
  rep.ascent_steps = ascent_steps;
  double best = scored.front().first;
  Vec best_u = scored.front().second;
  for (std::size_t s = 0; s < starts; ++s) {
    Vec u = scored[s].second;
    double val = scored[s].first;
    for (int step = 0; step < ascent_steps; ++step) {
      Vec g = pot.gradient(r * u);
      g -= g.dot(u) * u;
      const double gn = g.norm();
      if (!(gn > 0.0)) break;
      const Vec dir = g / gn;
      auto along = [&](double a) { return Vec(std::cos(a) * u + std::sin(a) * dir); };
      double alpha = spacing;
      double v = pot.value(r * along(alpha));
      if (v > val) {
        // expand while improving
        for (int k = 0; k < 20; ++k) {
          const double v2 = pot.value(r * along(2.0 * alpha));
          if (!(v2 > v) || 2.0 * alpha > std::numbers::pi / 2) break;
          alpha *= 2.0;
          v = v2;
        }
      } else {
        int k = 0;
        while (!(v > val) && k++ < 40) {
          alpha *= 0.5;
          v = pot.value(r * along(alpha));
        }
        if (!(v > val)) break;
      }
      // parabolic refinement through alpha/2, alpha, 2 alpha
      const double va = pot.value(r * along(0.5 * alpha));
      const double vb = v;
      const double vc = pot.value(r * along(2.0 * alpha));
      const double den = va - 2.0 * vb + vc;
      if (den < 0.0) {
        // vertex of the parabola through (a/2, va), (a, vb), (2a, vc) in the variable a
        const double x1 = 0.5 * alpha;
        const double x2 = alpha;
        const double x3 = 2.0 * alpha;
        const double num = (x2 - x1) * (x2 - x1) * (vb - vc) - (x2 - x3) * (x2 - x3) * (vb - va);
        const double dd = (x2 - x1) * (vb - vc) - (x2 - x3) * (vb - va);
        if (dd != 0.0) {
          const double xa = x2 - 0.5 * num / dd;
          if (xa > 0.0 && xa < 4.0 * alpha) {
            const double vx = pot.value(r * along(xa));
            if (vx > v) {
              v = vx;
              alpha = xa;
            }
          }
        }
      }
      u = along(alpha).normalized();
      val = v;
    }
    if (val > best) {
      best = val;
      best_u = u;
    }
  }
  rep.value = best;
  rep.argmax = SpherePoint(best_u);
  return rep;
}

std::string sweep_csv_header() { return "d,t,N,residual,min_sep,min_sep_scaled,K_emp,b_emp,ratio_abs,ratio_grad"; }

std::string sweep_csv_row(const SweepRow& row) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", row.d, row.t, row.n,
                row.residual, row.min_sep, row.min_sep_scaled, row.k_emp, row.b_emp, row.ratio_abs, row.ratio_grad);
  return buf;
}

}  // namespace wsd
