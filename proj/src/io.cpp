#include "wsd/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace wsd {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

const char* layout_name(Layout l) {
  switch (l) {
    case Layout::frame:
      return "frame";
    case Layout::lunes:
      return "lunes";
    case Layout::whole:
      return "whole";
  }
  return "frame";
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json to_json(const Rect& r) { return Json{{"lower", r.lower}, {"upper", r.upper}}; }

Rect rect_from_json(const Json& j) {
  try {
    return Rect(get<std::vector<double>>(j, "lower"), get<std::vector<double>>(j, "upper"));
  } catch (const GeometryError& e) {
    throw FormatError(std::string("invalid box: ") + e.what());
  }
}

Json to_json(const RectPartition& p) {
  Json pieces = Json::array();
  for (const Rect& r : p.pieces) pieces.push_back(to_json(r));
  return Json{{"parent", to_json(p.parent)}, {"pieces", pieces}, {"measures", p.measures}};
}

Json to_json(const ConvexPartition& p) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "partition";
  j["d"] = p.d;
  j["N"] = p.n;
  j["parity"] = p.n % 2 == 0 ? "even" : "odd";
  j["layout"] = layout_name(p.layout);
  if (p.solution) {
    j["lambda"] = p.solution->lambda;
    j["mu"] = p.solution->mu;
    j["fallback"] = p.solution->fallback;
    j["note"] = p.solution->note;
  } else {
    j["lambda"] = nullptr;
    j["mu"] = nullptr;
    j["fallback"] = false;
  }
  Json facets = Json::array();
  if (p.layout == Layout::frame) {
    for (std::size_t f = 0; f < p.facet_ranges.size(); ++f) {
      Json boxes = Json::array();
      const auto [begin, end] = p.facet_ranges[f];
      for (int i = begin; i < end; ++i) boxes.push_back(to_json(p.cells[static_cast<std::size_t>(i)].box));
      facets.push_back(Json{{"index", f + 1}, {"mass", p.solution->facet_masses[f]}, {"boxes", boxes}});
    }
  }
  j["facets"] = facets;
  j["K_emp"] = p.k_emp;
  j["b_emp"] = p.b_emp;
  return j;
}

ConvexPartition partition_from_json(const Json& j) {
  const int d = get<int>(j, "d");
  const int n = get<int>(j, "N");
  if (d < 2 || n < 1) {
    throw FormatError("partition: need d >= 2 and N >= 1");
  }
  const std::string layout = get<std::string>(j, "layout");
  try {
    if (layout == "whole") {
      if (n != 1) throw FormatError("partition: whole-sphere layout needs N = 1");
      return whole_sphere_partition(d);
    }
    if (layout == "lunes") return lune_partition(d, n);
    if (layout != "frame") throw FormatError("partition: unknown layout '" + layout + "'");
    FrameSolution sol;
    sol.d = d;
    sol.n = n;
    sol.parity = n % 2 == 0 ? Parity::even : Parity::odd;
    sol.lambda = get<double>(j, "lambda");
    sol.mu = get<double>(j, "mu");
    sol.fallback = j.contains("fallback") && j.at("fallback").is_boolean() && j.at("fallback").get<bool>();
    if (j.contains("note") && j.at("note").is_string()) sol.note = j.at("note").get<std::string>();
    const Json& facets = field(j, "facets");
    if (!facets.is_array() || static_cast<int>(facets.size()) != 2 * d + 2) {
      throw FormatError("partition: expected 2d + 2 facets");
    }
    std::vector<std::vector<Rect>> boxes(facets.size());
    for (std::size_t f = 0; f < facets.size(); ++f) {
      const Json& fj = facets[f];
      if (get<int>(fj, "index") != static_cast<int>(f) + 1) {
        throw FormatError("partition: facets must be listed in index order");
      }
      const Json& bj = field(fj, "boxes");
      if (!bj.is_array()) throw FormatError("partition: boxes must be an array");
      for (const Json& b : bj) {
        Rect r = rect_from_json(b);
        if (r.dim() != d) throw FormatError("partition: box dimension differs from d");
        boxes[f].push_back(std::move(r));
      }
      sol.facet_counts.push_back(static_cast<int>(boxes[f].size()));
      sol.facet_masses.push_back(static_cast<double>(boxes[f].size()) / n);
    }
    return assemble_partition(sol, boxes);
  } catch (const GeometryError& e) {
    throw FormatError(std::string("partition: ") + e.what());
  }
}

Json to_json(const Poly& p) {
  std::vector<double> c(p.coeffs.data(), p.coeffs.data() + p.coeffs.size());
  return Json{{"d", p.space.dim()}, {"t", p.space.degree()}, {"coeffs", c}};
}

Poly poly_from_json(const Json& j) {
  try {
    const HarmonicSpace space(get<int>(j, "d"), get<int>(j, "t"));
    const auto c = get<std::vector<double>>(j, "coeffs");
    return Poly(space, Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size())));
  } catch (const GeometryError& e) {
    throw FormatError(std::string("polynomial: ") + e.what());
  }
}

Json to_json(const DesignerConfig& c) {
  return Json{{"epsilon", c.epsilon},       {"delta", c.delta},         {"eta", c.eta},
              {"tol_residual", c.tol_residual}, {"max_iters", c.max_iters}, {"seed", c.seed}};
}

Json to_json(const SolverReport& r) {
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "solver_report"},
              {"method", r.method},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"residual_trajectory", r.residual_trajectory},
              {"final_residual", r.final_residual},
              {"per_degree", r.per_degree},
              {"min_separation", r.min_separation},
              {"min_required_separation", r.min_required_separation},
              {"depth_violations", r.depth_violations},
              {"underdetermined", r.underdetermined},
              {"config", to_json(r.config)},
              {"message", r.message}};
}

Json to_json(const DesignReport& r) {
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "design_report"},
              {"d", r.d},
              {"t", r.t},
              {"N", r.n},
              {"tolerance", r.tolerance},
              {"residual_total", r.residual_total},
              {"residual_per_degree", r.residual_per_degree},
              {"is_design", r.is_design},
              {"min_separation", r.min_separation},
              {"separation_scaled", r.separation_scaled},
              {"crosscheck_max_mean", r.crosscheck_max_mean},
              {"crosscheck_pass", r.crosscheck_pass},
              {"lower_bound", r.lower_bound}};
}

Json to_json(const PartitionReport& r, bool include_counts) {
  Json j{{"schema_version", kSchemaVersion},
         {"kind", "partition_report"},
         {"d", r.d},
         {"N", r.n},
         {"samples", r.samples},
         {"max_abs_z", r.max_abs_z},
         {"area_failures", r.area_failures},
         {"uncovered", r.uncovered},
         {"convexity_pairs", r.convexity_pairs},
         {"convexity_failures", r.convexity_failures},
         {"norm", r.norm},
         {"K_emp", r.k_emp},
         {"b_emp", r.b_emp},
         {"min_measure", r.min_measure},
         {"max_measure", r.max_measure},
         {"pass", r.pass}};
  if (include_counts) j["counts"] = r.counts;
  return j;
}

Json to_json(const MZReport& r) {
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "mz_report"},
              {"degree", r.degree},
              {"norm", r.norm},
              {"norm_times_degree", r.norm_times_degree},
              {"integral_abs", r.integral_abs},
              {"integral_grad", r.integral_grad},
              {"ratio_abs", r.ratio_abs},
              {"ratio_grad", r.ratio_grad},
              {"diff_grad", r.diff_grad},
              {"diff_grad_bound", r.diff_grad_bound},
              {"eta", r.eta}};
}

Json to_json(const FaradayReport& r) {
  const Vec& a = r.argmax.coords();
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "faraday_report"},
              {"r", r.r},
              {"value", r.value},
              {"probes", r.probes},
              {"ascent_steps", r.ascent_steps},
              {"argmax", std::vector<double>(a.data(), a.data() + a.size())}};
}

void write_points_csv(std::ostream& out, const std::vector<SpherePoint>& points) {
  if (points.empty()) {
    throw FormatError("points: nothing to write");
  }
  const int w = points.front().ambient_dim();
  for (int j = 0; j < w; ++j) out << (j ? "," : "") << 'x' << j;
  out << '\n';
  for (const SpherePoint& p : points) {
    if (p.ambient_dim() != w) throw FormatError("points: mixed dimensions");
    for (int j = 0; j < w; ++j) out << (j ? "," : "") << format_double(p[j]);
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) {
    const auto b = cur.find_first_not_of(" \t\r");
    const auto e = cur.find_last_not_of(" \t\r");
    parts.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
  }
  return parts;
}

}  // namespace

std::vector<SpherePoint> read_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("points: empty file");
  const auto header = split_csv(line);
  if (header.size() < 2) throw FormatError("points: header needs at least x0,x1");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] != "x" + std::to_string(j)) throw FormatError("points: unexpected header '" + line + "'");
  }
  std::vector<SpherePoint> points;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto parts = split_csv(line);
    if (parts.size() != header.size()) {
      throw FormatError("points: row " + std::to_string(row) + " has the wrong number of columns");
    }
    Vec v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t j = 0; j < parts.size(); ++j) {
      std::size_t used = 0;
      try {
        v[static_cast<Eigen::Index>(j)] = std::stod(parts[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != parts[j].size()) {
        throw FormatError("points: row " + std::to_string(row) + " has a malformed number");
      }
    }
    try {
      points.emplace_back(v);
    } catch (const GeometryError& e) {
      throw FormatError("points: row " + std::to_string(row) + ": " + e.what());
    }
  }
  if (points.empty()) throw FormatError("points: no rows");
  return points;
}

void write_points_csv(const std::string& path, const std::vector<SpherePoint>& points) {
  std::ostringstream ss;
  write_points_csv(ss, points);
  write_text_file(path, ss.str());
}

std::vector<SpherePoint> read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return read_points_csv(in);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
  if (!out) throw FormatError("write failed: " + path);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw FormatError("sha256 failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

Json to_json(const RunManifest& m) {
  auto digests = [](const std::vector<std::string>& paths) {
    Json arr = Json::array();
    for (const std::string& p : paths) arr.push_back(Json{{"path", p}, {"sha256", sha256_file(p)}});
    return arr;
  };
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "run_manifest"},
              {"command", m.command},
              {"parameters", m.parameters},
              {"seed", m.seed},
              {"version", kVersion},
              {"inputs", digests(m.inputs)},
              {"outputs", digests(m.outputs)},
              {"wall_time_s", m.wall_time_s}};
}

}  // namespace wsd
