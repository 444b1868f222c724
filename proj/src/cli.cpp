#include "wsd/cli.hpp"

#include <chrono>
#include <memory>
#include <ostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "wsd/io.hpp"

namespace wsd {

namespace {

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ManifestSink {
  std::string path;
  RunManifest manifest;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write() {
    if (path.empty()) return;
    manifest.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text_file(path, to_json(manifest).dump(2) + "\n");
  }
};

void emit(std::ostream& out, const Json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (!path.empty()) write_text_file(path, text);
}

struct PartitionArgs {
  int dim = 2;
  int count = 0;
  std::string out;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::string report;
};

int cmd_partition(const PartitionArgs& a, ManifestSink& sink, std::ostream& out) {
  if (a.dim < 2) throw UsageError("--dim must be at least 2");
  if (a.count < 1) throw UsageError("--count must be at least 1");
  if (a.samples < 100000) throw UsageError("--verify-samples must be at least 100000");
  const ConvexPartition partition = build_partition(a.dim, a.count);
  const PartitionReport report = verify_partition(partition, a.samples, a.seed);
  write_text_file(a.out, to_json(partition).dump(2) + "\n");
  emit(out, to_json(report, true), a.report);

  if (sink.path.empty()) sink.path = a.out + ".manifest.json";
  sink.manifest.parameters = {{"dim", a.dim}, {"count", a.count}, {"verify_samples", a.samples}};
  sink.manifest.seed = a.seed;
  sink.manifest.outputs.push_back(a.out);
  if (!a.report.empty()) sink.manifest.outputs.push_back(a.report);
  return report.pass ? kExitOk : kExitVerifyFailed;
}

struct SolveArgs {
  int dim = 2;
  int t = 0;
  int n = 0;
  std::string method = "positions";
  DesignerConfig config;
  std::string out;
  std::string report;
};

int cmd_solve(const SolveArgs& a, ManifestSink& sink, std::ostream& out) {
  if (a.dim < 2) throw UsageError("--dim must be at least 2");
  if (a.n < 1) throw UsageError("--n must be at least 1");
  if (a.method == "fixedpoint" && a.dim != 2) throw UsageError("--method fixedpoint needs --dim 2");
  a.config.validate();
  const HarmonicSpace space(a.dim, a.t);
  auto partition = std::make_shared<const ConvexPartition>(build_partition(a.dim, a.n));
  const AnchoredConfiguration start = anchor_configuration(partition);

  SolverReport report;
  std::vector<SpherePoint> points;
  if (a.method == "positions") {
    SolveResult res = solve_positions(space, start, a.config);
    report = std::move(res.report);
    points = std::move(res.configuration.points);
  } else {
    FixedPointResult res = solve_fixed_point(space, start, a.config);
    report = std::move(res.report);
    points = std::move(res.configuration.points);
  }
  write_points_csv(a.out, points);

  Json j = to_json(report);
  j["d"] = a.dim;
  j["t"] = a.t;
  j["N"] = a.n;
  j["lower_bound"] = lower_bound(a.dim, a.t);
  emit(out, j, a.report);

  if (sink.path.empty()) sink.path = a.out + ".manifest.json";
  sink.manifest.parameters = {{"dim", a.dim}, {"t", a.t}, {"n", a.n}, {"method", a.method},
                              {"config", to_json(a.config)}};
  sink.manifest.seed = a.config.seed;
  sink.manifest.outputs.push_back(a.out);
  if (!a.report.empty()) sink.manifest.outputs.push_back(a.report);
  const bool ok = report.final_residual <= a.config.tol_residual && report.depth_violations == 0;
  return ok ? kExitOk : kExitNotConverged;
}

struct VerifyArgs {
  std::string points;
  int t = 0;
  double tol = 1e-9;
  std::string partition;
  std::uint64_t seed = 1;
};

int cmd_verify(const VerifyArgs& a, ManifestSink& sink, std::ostream& out) {
  const std::vector<SpherePoint> points = read_points_csv(a.points);
  const int d = points.front().dim();
  const HarmonicSpace space(d, a.t);
  const DesignReport report = verify_design(space, points, a.tol, a.seed);
  Json j = to_json(report);
  bool ok = report.is_design;
  sink.manifest.inputs.push_back(a.points);
  if (!a.partition.empty()) {
    const ConvexPartition partition = partition_from_json(read_json_file(a.partition));
    if (partition.d != d || partition.n != static_cast<int>(points.size())) {
      throw FormatError("partition does not match the point set");
    }
    int outside = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!cell_contains(partition.cells[i], points[i])) ++outside;
    }
    j["points_outside_cells"] = outside;
    ok = ok && outside == 0;
    sink.manifest.inputs.push_back(a.partition);
  }
  emit(out, j, "");
  sink.manifest.parameters = {{"t", a.t}, {"tol", a.tol}};
  sink.manifest.seed = a.seed;
  return ok ? kExitOk : kExitVerifyFailed;
}

int cmd_bound(int d, int t, ManifestSink& sink, std::ostream& out) {
  if (d < 1 || t < 0) throw UsageError("need --dim >= 1 and --t >= 0");
  emit(out,
       Json{{"schema_version", kSchemaVersion}, {"kind", "lower_bound"}, {"d", d}, {"t", t},
            {"lower_bound", lower_bound(d, t)}},
       "");
  sink.manifest.parameters = {{"dim", d}, {"t", t}};
  return kExitOk;
}

int cmd_faraday(const std::string& path, double r, int probes, int steps, ManifestSink& sink, std::ostream& out) {
  const std::vector<SpherePoint> points = read_points_csv(path);
  if (points.front().dim() != 2) throw FormatError("faraday: points must lie on S^2");
  emit(out, to_json(faraday_potential(points, r, probes, steps)), "");
  sink.manifest.inputs.push_back(path);
  sink.manifest.parameters = {{"r", r}, {"probes", probes}, {"ascent_steps", steps}};
  return kExitOk;
}

int cmd_mz(const std::string& path, int degree, std::uint64_t seed, double eta, ManifestSink& sink,
           std::ostream& out) {
  const ConvexPartition partition = partition_from_json(read_json_file(path));
  if (partition.d != 2) throw FormatError("mz: partition must live on S^2");
  const Poly p = random_poly(HarmonicSpace(2, degree), seed, PolyNormalization::unit_coeff);
  std::vector<SpherePoint> xs;
  std::vector<SpherePoint> ys;
  std::mt19937_64 rng(seed);
  for (const Cell& cell : partition.cells) {
    xs.push_back(cell.anchor);
    ys.push_back(cell.sample(rng));
  }
  emit(out, to_json(mz_check(p, partition, xs, ys, eta)), "");
  sink.manifest.inputs.push_back(path);
  sink.manifest.parameters = {{"degree", degree}, {"eta", eta}};
  sink.manifest.seed = seed;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Well-separated spherical designs: partitions, solvers and verifiers", "wsd"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  int threads = 0;
  std::string manifest;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  app.add_option("--manifest", manifest, "Run manifest path");

  PartitionArgs pa;
  auto* part = app.add_subcommand("partition", "Build and verify an equal-area convex partition");
  part->add_option("--dim", pa.dim, "Sphere dimension d")->capture_default_str();
  part->add_option("--count", pa.count, "Number of cells N")->required();
  part->add_option("--out", pa.out, "Partition JSON path")->required();
  part->add_option("--verify-samples", pa.samples, "Monte Carlo samples")->capture_default_str();
  part->add_option("--seed", pa.seed, "Sampling seed")->capture_default_str();
  part->add_option("--report", pa.report, "Also write the report here");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Find a well-separated design");
  solve->add_option("--dim", sa.dim, "Sphere dimension d")->capture_default_str();
  solve->add_option("--t", sa.t, "Design strength")->required();
  solve->add_option("--n", sa.n, "Number of points")->required();
  solve->add_option("--method", sa.method, "Solver")
      ->check(CLI::IsMember({"positions", "fixedpoint"}))
      ->capture_default_str();
  solve->add_option("--tol", sa.config.tol_residual, "Residual tolerance")->capture_default_str();
  solve->add_option("--max-iters", sa.config.max_iters, "Iteration cap")->capture_default_str();
  solve->add_option("--seed", sa.config.seed, "Solver seed")->capture_default_str();
  solve->add_option("--epsilon", sa.config.epsilon, "Clamp width")->capture_default_str();
  solve->add_option("--delta", sa.config.delta, "Shrink factor")->capture_default_str();
  solve->add_option("--eta", sa.config.eta, "Sampling slack")->capture_default_str();
  solve->add_option("--out", sa.out, "Points CSV path")->required();
  solve->add_option("--report", sa.report, "Also write the report here");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Check that a point set is a t-design");
  verify->add_option("--points", va.points, "Points CSV")->required();
  verify->add_option("--t", va.t, "Design strength")->required();
  verify->add_option("--tol", va.tol, "Residual tolerance")->capture_default_str();
  verify->add_option("--partition", va.partition, "Partition JSON; point i must lie in cell i");
  verify->add_option("--seed", va.seed, "Cross-check seed")->capture_default_str();

  int bd = 2;
  int bt = 0;
  auto* bound = app.add_subcommand("bound", "Lower bound on the size of a t-design");
  bound->add_option("--dim", bd, "Sphere dimension d")->capture_default_str();
  bound->add_option("--t", bt, "Design strength")->required();

  std::string fpoints;
  double fr = 0.0;
  int fprobes = 4096;
  int fsteps = 10;
  auto* faraday = app.add_subcommand("faraday", "Faraday potential deviation on S^2");
  faraday->add_option("--points", fpoints, "Points CSV")->required();
  faraday->add_option("--r", fr, "Probe radius in (0, 1)")->required();
  faraday->add_option("--probes", fprobes, "Probe count")->capture_default_str();
  faraday->add_option("--ascent-steps", fsteps, "Local ascent steps")->capture_default_str();

  std::string mpart;
  int mdeg = 3;
  std::uint64_t mseed = 1;
  double meta = 0.02;
  auto* mz = app.add_subcommand("mz", "Sampling inequality ratios for a random polynomial");
  mz->add_option("--partition", mpart, "Partition JSON")->required();
  mz->add_option("--degree", mdeg, "Polynomial degree")->capture_default_str();
  mz->add_option("--seed", mseed, "Polynomial and sampling seed")->capture_default_str();
  mz->add_option("--eta", meta, "Reference eta")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  ManifestSink sink;
  sink.path = manifest;
  try {
    if (threads > 0) set_thread_count(threads);
    int code = kExitOk;
    if (*part) {
      sink.manifest.command = "partition";
      code = cmd_partition(pa, sink, out);
    } else if (*solve) {
      sink.manifest.command = "solve";
      code = cmd_solve(sa, sink, out);
    } else if (*verify) {
      sink.manifest.command = "verify";
      code = cmd_verify(va, sink, out);
    } else if (*bound) {
      sink.manifest.command = "bound";
      code = cmd_bound(bd, bt, sink, out);
    } else if (*faraday) {
      sink.manifest.command = "faraday";
      code = cmd_faraday(fpoints, fr, fprobes, fsteps, sink, out);
    } else if (*mz) {
      sink.manifest.command = "mz";
      code = cmd_mz(mpart, mdeg, mseed, meta, sink, out);
    }
    sink.manifest.parameters["threads"] = threads;
    sink.write();
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GeometryError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace wsd
