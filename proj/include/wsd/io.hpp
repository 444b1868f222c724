#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsd/designer.hpp"
#include "wsd/harmonics.hpp"
#include "wsd/rect_partition.hpp"
#include "wsd/sphere_partition.hpp"
#include "wsd/verifier.hpp"

namespace wsd {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

/// Thrown for unreadable or inconsistent input files.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

Json to_json(const Rect& r);
Rect rect_from_json(const Json& j);
Json to_json(const RectPartition& p);

/// {d, N, parity, lambda, mu, layout, facets: [{index, mass, boxes}], K_emp, b_emp}; facet indices are 1-based.
Json to_json(const ConvexPartition& p);
/// Rebuilds cells from the frame parameters and boxes.
ConvexPartition partition_from_json(const Json& j);

Json to_json(const Poly& p);
Poly poly_from_json(const Json& j);

Json to_json(const DesignerConfig& c);
Json to_json(const SolverReport& r);
Json to_json(const DesignReport& r);
Json to_json(const PartitionReport& r, bool include_counts = false);
Json to_json(const MZReport& r);
Json to_json(const FaradayReport& r);

/// Header x0,...,xd then one point per row with 17 significant digits.
void write_points_csv(std::ostream& out, const std::vector<SpherePoint>& points);
std::vector<SpherePoint> read_points_csv(std::istream& in);

void write_points_csv(const std::string& path, const std::vector<SpherePoint>& points);
std::vector<SpherePoint> read_points_csv(const std::string& path);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

struct RunManifest {
  std::string command;
  Json parameters = Json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_time_s = 0.0;
};

Json to_json(const RunManifest& m);

}  // namespace wsd
