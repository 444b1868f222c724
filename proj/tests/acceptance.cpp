// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "wsd/designer.hpp"
#include "wsd/harmonics.hpp"
#include "wsd/sphere_partition.hpp"
#include "wsd/verifier.hpp"

using namespace wsd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<SpherePoint> tetrahedron() {
  return {SpherePoint{1, 1, 1}, SpherePoint{1, -1, -1}, SpherePoint{-1, 1, -1}, SpherePoint{-1, -1, 1}};
}

std::vector<SpherePoint> octahedron() {
  return {SpherePoint{1, 0, 0}, SpherePoint{-1, 0, 0}, SpherePoint{0, 1, 0},
          SpherePoint{0, -1, 0}, SpherePoint{0, 0, 1}, SpherePoint{0, 0, -1}};
}

std::vector<SpherePoint> icosahedron() {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<SpherePoint> out;
  for (double a : {-1.0, 1.0}) {
    for (double b : {-phi, phi}) {
      out.push_back(SpherePoint{0, a, b});
      out.push_back(SpherePoint{a, b, 0});
      out.push_back(SpherePoint{b, 0, a});
    }
  }
  return out;
}

std::vector<SpherePoint> anchors_of(const ConvexPartition& p) {
  std::vector<SpherePoint> out;
  for (const Cell& c : p.cells) out.push_back(c.anchor);
  return out;
}

long long binom(int n, int k) {
  if (k < 0 || n < k) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Outcome lower_bound_table() {
  const long long expected[] = {2, 4, 6, 9, 12};
  Outcome o{true, "lower_bound(2, 1..5) ="};
  for (int t = 1; t <= 5; ++t) {
    const int k = t / 2;
    const long long direct = t % 2 == 0 ? binom(2 + k, 2) + binom(1 + k, 2) : 2 * binom(2 + k, 2);
    const long long got = lower_bound(2, t);
    o.pass = o.pass && got == expected[t - 1] && got == direct;
    o.detail += " " + std::to_string(got);
  }
  return o;
}

struct PartitionRuns {
  Outcome area;
  Outcome convexity;
};

PartitionRuns equal_area_and_convexity() {
  PartitionRuns r{{true, ""}, {true, ""}};
  for (int n : {6, 7, 24, 97, 400}) {
    const PartitionReport rep = verify_partition(build_partition(2, n), 1000000, 2024, 1000);
    r.area.pass = r.area.pass && rep.area_failures == 0 && rep.uncovered == 0;
    r.convexity.pass = r.convexity.pass && rep.convexity_failures == 0;
    r.area.detail += fmt(" N=%d max|z|=%.2f;", n, rep.max_abs_z);
    r.convexity.detail += fmt(" N=%d failures=%d/%d;", n, rep.convexity_failures,
                              rep.convexity_pairs * static_cast<int>(rep.counts.size()));
  }
  return r;
}

struct ScalingRuns {
  Outcome diameter;
  Outcome caps;
};

ScalingRuns scaling() {
  std::vector<double> k;
  std::vector<double> b;
  ScalingRuns r;
  for (int n : {24, 96, 384, 1536}) {
    const ConvexPartition p = build_partition(2, n);
    k.push_back(partition_norm(p) * std::sqrt(static_cast<double>(n)));
    b.push_back(p.b_emp);
    r.diameter.detail += fmt(" N=%d K_emp=%.4f;", n, k.back());
    r.caps.detail += fmt(" N=%d b_emp=%.4f;", n, b.back());
  }
  const auto [kmin, kmax] = std::minmax_element(k.begin(), k.end());
  const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
  r.diameter.pass = *kmax <= 1.5 * *kmin;
  r.caps.pass = *bmin > 0.0 && *bmax <= 2.0 * *bmin;
  r.diameter.detail += fmt(" spread %.3f", *kmax / *kmin);
  r.caps.detail += fmt(" spread %.3f", *bmax / *bmin);
  return r;
}

Outcome known_designs() {
  const double tet = verify_design(HarmonicSpace(2, 2), tetrahedron(), 1e-12).residual_total;
  const double oct = verify_design(HarmonicSpace(2, 3), octahedron(), 1e-12).residual_total;
  const double ico = verify_design(HarmonicSpace(2, 5), icosahedron(), 1e-12).residual_total;
  const DesignReport oct4 = verify_design(HarmonicSpace(2, 4), octahedron(), 1e-12);
  Outcome o;
  o.pass = tet < 1e-12 && oct < 1e-12 && ico < 1e-12 && !oct4.is_design;
  o.detail = fmt(" tetrahedron t=2 %.2e; octahedron t=3 %.2e; icosahedron t=5 %.2e; octahedron t=4 %.3f (design=%s)", tet,
                 oct, ico, oct4.residual_total, oct4.is_design ? "yes" : "no");
  return o;
}

Outcome solver_runs(std::vector<SpherePoint>& t5_design) {
  Outcome o{true, ""};
  for (int t = 1; t <= 5; ++t) {
    const int n = 2 * (t + 1) * (t + 1);
    const auto start = std::chrono::steady_clock::now();
    const auto part = std::make_shared<const ConvexPartition>(build_partition(2, n));
    DesignerConfig config;
    config.max_iters = 2000;
    const SolveResult res = solve_positions(HarmonicSpace(2, t), anchor_configuration(part), config);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const SolverReport& rep = res.report;
    const double root_n = std::sqrt(static_cast<double>(n));
    const bool ok = rep.final_residual <= 1e-9 && rep.iterations <= 2000 && rep.depth_violations == 0 &&
                    rep.min_separation >= rep.min_required_separation && rep.min_required_separation > 0.0 &&
                    secs < 120.0;
    o.pass = o.pass && ok;
    o.detail += fmt(" t=%d N=%d r=%.1e it=%d sep*sqrtN=%.3f>=%.3f %.1fs;", t, n, rep.final_residual, rep.iterations,
                    rep.min_separation * root_n, rep.min_required_separation * root_n, secs);
    if (t == 5) t5_design = res.configuration.points;
  }
  return o;
}

Outcome pairing_positivity() {
  const auto part = std::make_shared<const ConvexPartition>(build_partition(2, 600));
  const AnchoredConfiguration anchored = anchor_configuration(part);
  const DesignerConfig config;
  const HarmonicSpace space(2, 3);
  int positive = 0;
  double worst = std::numeric_limits<double>::infinity();
  double norm_dev = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Poly p = random_poly(space, seed, PolyNormalization::boundary);
    if (seed <= 3) norm_dev = std::max(norm_dev, std::abs(grad_l1_norm(p, 1e-7) - 1.0));
    const double v = pairing(config, anchored, p);
    worst = std::min(worst, v);
    if (v > 0.0) ++positive;
  }
  Outcome o;
  o.pass = positive == 100 && norm_dev <= 1e-6;
  o.detail = fmt(" %d/100 positive, min pairing %.4e, boundary normalization error %.1e", positive, worst, norm_dev);
  return o;
}

Outcome mz_sweep() {
  constexpr int kPolys = 20;
  const int sizes[] = {100, 400, 1600};
  double mean_err[3] = {0.0, 0.0, 0.0};
  bool ratios_ok = true;
  std::vector<std::vector<double>> err(kPolys, std::vector<double>(3));
  for (int k = 0; k < 3; ++k) {
    const ConvexPartition part = build_partition(2, sizes[k]);
    const std::vector<SpherePoint> xs = anchors_of(part);
    for (int s = 0; s < kPolys; ++s) {
      const Poly p = random_poly(HarmonicSpace(2, 3), static_cast<std::uint64_t>(s + 1), PolyNormalization::unit_coeff);
      const double ratio = mz_check(p, part, xs, xs).ratio_abs;
      err[s][k] = std::abs(ratio - 1.0);
      mean_err[k] += err[s][k] / kPolys;
      if (sizes[k] == 400) ratios_ok = ratios_ok && ratio >= 0.8 && ratio <= 1.2;
    }
  }
  int monotone = 0;
  for (const auto& e : err) monotone += e[1] <= 1.1 * e[0] && e[2] <= 1.1 * e[1];
  Poly linear = Poly::zero(HarmonicSpace(2, 1));
  linear.coeffs[basis_index(1, 0)] = 1.0 / std::sqrt(3.0);
  const double anchor = abs_l1_norm(linear);
  Outcome o;
  o.pass = mean_err[1] <= 1.1 * mean_err[0] && mean_err[2] <= 1.1 * mean_err[1] && ratios_ok &&
           std::abs(anchor - 0.5) <= 1e-6;
  o.detail = fmt(" mean |ratio-1| over %d polys: %.2e, %.2e, %.2e; monotone for %d/%d; N=400 ratios in [0.8,1.2]: %s;"
                 " int|x.e| = %.10f",
                 kPolys, mean_err[0], mean_err[1], mean_err[2], monotone, kPolys, ratios_ok ? "yes" : "no", anchor);
  return o;
}

Outcome kernel_analytics() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> degree(1, 10);
  auto random_point = [&] { return SpherePoint{g(rng), g(rng), g(rng)}; };

  double reproduce = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const HarmonicSpace space(2, degree(rng));
    const Poly q = random_poly(space, 500 + static_cast<std::uint64_t>(trial), PolyNormalization::unit_coeff);
    const SpherePoint x = random_point();
    reproduce = std::max(reproduce, std::abs(inner_product_quadrature(kernel_poly(space, x), q) - eval(q, x)));
  }

  double grad_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const HarmonicSpace space(2, degree(rng));
    const Poly q = random_poly(space, 900 + static_cast<std::uint64_t>(trial), PolyNormalization::unit_coeff);
    const SpherePoint x = random_point();
    const Mat basis = tangent_basis(x);
    const Vec grad = spherical_gradient(q, x);
    const double h = 1e-5;
    Vec fd(3);
    fd.setZero();
    for (int k = 0; k < 2; ++k) {
      const Vec v = basis.col(k);
      const double up = eval(q, SpherePoint(Vec(std::cos(h) * x.coords() + std::sin(h) * v)));
      const double down = eval(q, SpherePoint(Vec(std::cos(h) * x.coords() - std::sin(h) * v)));
      fd += (up - down) / (2 * h) * v;
    }
    grad_err = std::max(grad_err, (fd - grad).norm() / std::max(grad.norm(), 1e-300));
  }

  double parseval = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int t = degree(rng);
    std::vector<SpherePoint> pts;
    for (int i = 0; i < 25; ++i) pts.push_back(random_point());
    Vec mean = Vec::Zero((t + 1) * (t + 1) - 1);
    for (const SpherePoint& x : pts) mean += basis_values(t, x);
    mean /= static_cast<double>(pts.size());
    parseval = std::max(parseval, std::abs(design_residual(HarmonicSpace(2, t), pts).total - mean.norm()));
  }
  Outcome o;
  o.pass = reproduce < 1e-10 && grad_err < 1e-6 && parseval <= 1e-10;
  o.detail = fmt(" reproducing %.1e; gradient vs differences %.1e; kernel vs explicit residual %.1e", reproduce,
                 grad_err, parseval);
  return o;
}

Outcome faraday_decay(const std::vector<SpherePoint>& design) {
  if (design.empty()) return {false, " no t=5 design available"};
  const double u2 = faraday_potential(design, 0.2).value;
  const double u4 = faraday_potential(design, 0.4).value;
  const double slope = std::log(u4 / u2) / std::log(2.0);
  const double residual = design_residual(HarmonicSpace(2, 5), design).total;
  Outcome o;
  o.pass = slope >= 5.0 && residual <= 1e-9;
  o.detail = fmt(" N=%zu U(0.2)=%.3e U(0.4)=%.3e slope %.3f", design.size(), u2, u4, slope);
  return o;
}

Outcome argmax_grid() {
  const ConvexPartition small = build_partition(2, 24);
  const ConvexPartition large = build_partition(2, 97);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  double worst = std::numeric_limits<double>::infinity();
  int beaten = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const ConvexPartition& part = trial % 2 == 0 ? small : large;
    const Cell& cell = part.cells[std::uniform_int_distribution<std::size_t>(0, part.cells.size() - 1)(rng)];
    const Mat basis = tangent_basis(cell.anchor);
    const Vec y = basis * Vec((Vec(2) << g(rng), g(rng)).finished());
    const double found = argmax_on_cell(cell, TangentVector(cell.anchor, y)).coords().dot(y);
    double grid = -2.0;
    std::vector<double> u(2);
    for (int a = 0; a < 100; ++a) {
      for (int b = 0; b < 100; ++b) {
        u[0] = cell.box.lower[0] + (cell.box.upper[0] - cell.box.lower[0]) * a / 99.0;
        u[1] = cell.box.lower[1] + (cell.box.upper[1] - cell.box.lower[1]) * b / 99.0;
        grid = std::max(grid, cell.chart->map(u).coords().dot(y));
      }
    }
    worst = std::min(worst, found - grid);
    if (found >= grid - 1e-8) ++beaten;
  }
  Outcome o;
  o.pass = beaten == 50;
  o.detail = fmt(" %d/50 at or above the 10^4-point grid, worst margin %.2e", beaten, worst);
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string(" exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %2d %s:%s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "lower bound table", lower_bound_table);
  PartitionRuns partitions;
  report(2, "equal area", [&] {
    partitions = equal_area_and_convexity();
    return partitions.area;
  });
  report(3, "convexity", [&] { return partitions.convexity; });
  ScalingRuns scales;
  report(4, "diameter scaling", [&] {
    scales = scaling();
    return scales.diameter;
  });
  report(5, "inscribed caps", [&] { return scales.caps; });
  report(6, "known designs", known_designs);
  std::vector<SpherePoint> t5_design;
  report(7, "solver", [&] { return solver_runs(t5_design); });
  report(8, "pairing positivity", pairing_positivity);
  report(9, "sampling inequality sweep", mz_sweep);
  report(10, "kernel and gradient analytics", kernel_analytics);
  report(11, "potential decay", [&] { return faraday_decay(t5_design); });
  report(12, "argmax against grid", argmax_grid);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
