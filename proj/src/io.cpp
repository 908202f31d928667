#include "pcgeom/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pcgeom/kdtree.hpp"

namespace pcgeom {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  return in;
}

// Line reader that tracks 1-based line numbers and strips trailing CR.
class LineReader {
 public:
  LineReader(std::ifstream& in, std::string path) : in_(in), path_(std::move(path)) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++line_;
    return true;
  }

  std::string require(const std::string& what) {
    std::string line;
    if (!next(line)) throw ParseError(path_, line_ + 1, "unexpected end of file, expected " + what);
    return line;
  }

  long line() const { return line_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(path_, line_, message);
  }

 private:
  std::ifstream& in_;
  std::string path_;
  long line_ = 0;
};

double parse_double(const std::string& field, const LineReader& reader) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw ParseError(reader.path(), reader.line(), "not a number: '" + field + "'");
  return v;
}

long long parse_int(const std::string& field, const LineReader& reader) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw ParseError(reader.path(), reader.line(), "not an integer: '" + field + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream stream(line);
  std::string field;
  while (stream >> field) fields.push_back(field);
  return fields;
}

// Presence conventions shared by both cloud formats: normals are dropped
// when every row is exactly zero, the outlier mask when every flag is
// clear, and chart data when every id is the -1 placeholder.
void apply_presence_conventions(PointCloud& cloud, bool any_normal, bool any_flag,
                                bool any_chart) {
  if (!any_normal) cloud.normals.clear();
  if (!any_flag) cloud.outlier_mask.clear();
  if (!any_chart) {
    cloud.chart_coords.clear();
    cloud.chart_ids.clear();
  }
}

void check_parallel_arrays(const PointCloud& cloud, const std::string& context) {
  const std::size_t n = cloud.size();
  if (!cloud.normals.empty() && cloud.normals.size() != n)
    throw ConfigError(context + ": normals length mismatch");
  if (!cloud.outlier_mask.empty() && cloud.outlier_mask.size() != n)
    throw ConfigError(context + ": outlier mask length mismatch");
  if (cloud.chart_coords.size() != cloud.chart_ids.size())
    throw ConfigError(context + ": chart coordinate arrays mismatch");
  if (!cloud.chart_ids.empty() && cloud.chart_ids.size() != n)
    throw ConfigError(context + ": chart data length mismatch");
}

void validate_table(const ErrorTable& table, const std::string& context) {
  for (const ErrorTableRow& row : table.rows) {
    const double values[] = {row.err.normal, row.err.metric_inverse, row.err.shape,
                             row.err.gaussian, row.err.mean};
    for (double v : values)
      if (!std::isfinite(v) || v < 0.0)
        throw ConfigError(context + ": error entries must be finite and nonnegative");
    if (row.model.empty() || row.noise.empty() || row.family.empty() || row.k <= 0)
      throw ConfigError(context + ": incomplete row key");
  }
}

json table_row_json(const ErrorTableRow& row) {
  return json{{"model", row.model},
              {"noise", row.noise},
              {"k", row.k},
              {"family", row.family},
              {"normal", row.err.normal},
              {"metric_inverse", row.err.metric_inverse},
              {"shape", row.err.shape},
              {"gaussian", row.err.gaussian},
              {"mean", row.err.mean}};
}

}  // namespace

ParseError::ParseError(const std::string& path, long line, const std::string& message)
    : ConfigError(line > 0 ? path + ":" + std::to_string(line) + ": " + message
                           : path + ": " + message),
      line_(line) {}

void write_cloud_ply(const std::string& path, const PointCloud& cloud) {
  check_parallel_arrays(cloud, "write ply");
  std::ofstream out = open_out(path);
  out << "ply\nformat ascii 1.0\n";
  if (!cloud.shape_ref.empty()) out << "comment shape_ref " << cloud.shape_ref << "\n";
  out << "comment sample_seed " << cloud.sample_seed << "\n";
  out << "comment noise_mode " << cloud.noise_mode << "\n";
  out << "comment noise_sigma " << fmt_double(cloud.noise_sigma) << "\n";
  out << "comment outlier_fraction " << fmt_double(cloud.outlier_fraction) << "\n";
  out << "comment noise_seed " << cloud.noise_seed << "\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  out << "property double nx\nproperty double ny\nproperty double nz\n";
  out << "property uchar outlier_flag\nend_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const Eigen::Vector3d nrm =
        cloud.normals.empty() ? Eigen::Vector3d::Zero().eval() : cloud.normals[i];
    const unsigned flag = cloud.is_outlier(i) ? 1 : 0;
    out << fmt_double(p.x()) << ' ' << fmt_double(p.y()) << ' ' << fmt_double(p.z()) << ' '
        << fmt_double(nrm.x()) << ' ' << fmt_double(nrm.y()) << ' ' << fmt_double(nrm.z()) << ' '
        << flag << "\n";
  }
  if (!out) throw ConfigError("write failed: " + path);
}

PointCloud read_cloud_ply(const std::string& path) {
  std::ifstream in = open_in(path);
  LineReader reader(in, path);

  if (reader.require("ply magic") != "ply") reader.fail("not a PLY file (missing 'ply' magic)");
  if (reader.require("format line") != "format ascii 1.0")
    reader.fail("unsupported PLY format (want 'format ascii 1.0')");

  PointCloud cloud;
  long vertex_count = -1;
  const char* expected_props[] = {"property double x",  "property double y",
                                  "property double z",  "property double nx",
                                  "property double ny", "property double nz",
                                  "property uchar outlier_flag"};
  int prop_index = 0;
  while (true) {
    const std::string line = reader.require("end_header");
    if (line == "end_header") break;
    if (line.rfind("comment ", 0) == 0) {
      const std::string rest = line.substr(8);
      const std::size_t space = rest.find(' ');
      const std::string key = rest.substr(0, space);
      const std::string value = space == std::string::npos ? std::string() : rest.substr(space + 1);
      if (key == "shape_ref") cloud.shape_ref = value;
      else if (key == "sample_seed") cloud.sample_seed = std::strtoull(value.c_str(), nullptr, 10);
      else if (key == "noise_mode") cloud.noise_mode = value;
      else if (key == "noise_sigma") cloud.noise_sigma = parse_double(value, reader);
      else if (key == "outlier_fraction") cloud.outlier_fraction = parse_double(value, reader);
      else if (key == "noise_seed") cloud.noise_seed = std::strtoull(value.c_str(), nullptr, 10);
      continue;  // unknown comments are ignored
    }
    if (line.rfind("element vertex ", 0) == 0) {
      if (vertex_count >= 0) reader.fail("duplicate vertex element");
      vertex_count = parse_int(line.substr(15), reader);
      if (vertex_count < 0) reader.fail("negative vertex count");
      continue;
    }
    if (line.rfind("element ", 0) == 0) reader.fail("unsupported element: " + line);
    if (line.rfind("property ", 0) == 0) {
      if (vertex_count < 0) reader.fail("property before element vertex");
      if (prop_index >= 7 || line != expected_props[prop_index])
        reader.fail("unexpected property (want '" +
                    std::string(prop_index < 7 ? expected_props[prop_index] : "none") + "')");
      ++prop_index;
      continue;
    }
    reader.fail("unrecognized header line: " + line);
  }
  if (vertex_count < 0) reader.fail("missing 'element vertex' declaration");
  if (prop_index != 7) reader.fail("incomplete property list (want 7 properties)");

  bool any_normal = false, any_flag = false;
  for (long i = 0; i < vertex_count; ++i) {
    const std::string line = reader.require("vertex row");
    const std::vector<std::string> fields = split_ws(line);
    if (fields.size() != 7) reader.fail("expected 7 fields, got " + std::to_string(fields.size()));
    double v[6];
    for (int c = 0; c < 6; ++c) v[c] = parse_double(fields[static_cast<std::size_t>(c)], reader);
    const long long flag = parse_int(fields[6], reader);
    if (flag < 0 || flag > 255) reader.fail("outlier_flag out of byte range");
    cloud.points.emplace_back(v[0], v[1], v[2]);
    cloud.normals.emplace_back(v[3], v[4], v[5]);
    cloud.outlier_mask.push_back(static_cast<std::uint8_t>(flag != 0));
    any_normal = any_normal || v[3] != 0.0 || v[4] != 0.0 || v[5] != 0.0;
    any_flag = any_flag || flag != 0;
  }
  apply_presence_conventions(cloud, any_normal, any_flag, false);
  return cloud;
}

void write_cloud_csv(const std::string& path, const PointCloud& cloud) {
  check_parallel_arrays(cloud, "write csv");
  std::ofstream out = open_out(path);
  out << "# pcgeom-cloud\n";
  out << "# shape_ref=" << cloud.shape_ref << "\n";
  out << "# sample_seed=" << cloud.sample_seed << "\n";
  out << "# noise_mode=" << cloud.noise_mode << "\n";
  out << "# noise_sigma=" << fmt_double(cloud.noise_sigma) << "\n";
  out << "# outlier_fraction=" << fmt_double(cloud.outlier_fraction) << "\n";
  out << "# noise_seed=" << cloud.noise_seed << "\n";
  out << "x,y,z,nx,ny,nz,u,v,chart,outlier\n";
  const bool charts = !cloud.chart_ids.empty();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const Eigen::Vector3d nrm =
        cloud.normals.empty() ? Eigen::Vector3d::Zero().eval() : cloud.normals[i];
    const double cu = charts ? cloud.chart_coords[i][0] : 0.0;
    const double cv = charts ? cloud.chart_coords[i][1] : 0.0;
    const int chart = charts ? cloud.chart_ids[i] : -1;
    out << fmt_double(p.x()) << ',' << fmt_double(p.y()) << ',' << fmt_double(p.z()) << ','
        << fmt_double(nrm.x()) << ',' << fmt_double(nrm.y()) << ',' << fmt_double(nrm.z()) << ','
        << fmt_double(cu) << ',' << fmt_double(cv) << ',' << chart << ','
        << (cloud.is_outlier(i) ? 1 : 0) << "\n";
  }
  if (!out) throw ConfigError("write failed: " + path);
}

PointCloud read_cloud_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  LineReader reader(in, path);

  PointCloud cloud;
  std::string line = reader.require("pcgeom-cloud marker");
  if (line != "# pcgeom-cloud") reader.fail("not a cloud CSV (missing '# pcgeom-cloud' marker)");
  while (true) {
    line = reader.require("column header");
    if (line.rfind("# ", 0) != 0) break;
    const std::string rest = line.substr(2);
    const std::size_t eq = rest.find('=');
    if (eq == std::string::npos) reader.fail("malformed metadata line: " + line);
    const std::string key = rest.substr(0, eq);
    const std::string value = rest.substr(eq + 1);
    if (key == "shape_ref") cloud.shape_ref = value;
    else if (key == "sample_seed") cloud.sample_seed = std::strtoull(value.c_str(), nullptr, 10);
    else if (key == "noise_mode") cloud.noise_mode = value;
    else if (key == "noise_sigma") cloud.noise_sigma = parse_double(value, reader);
    else if (key == "outlier_fraction") cloud.outlier_fraction = parse_double(value, reader);
    else if (key == "noise_seed") cloud.noise_seed = std::strtoull(value.c_str(), nullptr, 10);
    else reader.fail("unknown metadata key: " + key);
  }
  if (line != "x,y,z,nx,ny,nz,u,v,chart,outlier") reader.fail("unexpected column header: " + line);

  bool any_normal = false, any_flag = false, any_chart = false;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 10)
      reader.fail("expected 10 fields, got " + std::to_string(fields.size()));
    double v[8];
    for (int c = 0; c < 8; ++c) v[c] = parse_double(fields[static_cast<std::size_t>(c)], reader);
    const long long chart = parse_int(fields[8], reader);
    const long long flag = parse_int(fields[9], reader);
    if (flag != 0 && flag != 1) reader.fail("outlier column must be 0 or 1");
    cloud.points.emplace_back(v[0], v[1], v[2]);
    cloud.normals.emplace_back(v[3], v[4], v[5]);
    cloud.chart_coords.push_back({v[6], v[7]});
    cloud.chart_ids.push_back(static_cast<int>(chart));
    cloud.outlier_mask.push_back(static_cast<std::uint8_t>(flag));
    any_normal = any_normal || v[3] != 0.0 || v[4] != 0.0 || v[5] != 0.0;
    any_flag = any_flag || flag != 0;
    any_chart = any_chart || chart != -1;
  }
  apply_presence_conventions(cloud, any_normal, any_flag, any_chart);
  return cloud;
}

void write_shape_json(const std::string& path, const Shape& shape) {
  json j;
  if (const auto* radial = dynamic_cast<const RadialShape*>(&shape)) {
    j["type"] = "radial";
    j["max_degree"] = radial->max_degree;
    j["seed"] = radial->seed;
    json coeff = json::array();
    for (const std::complex<double>& c : radial->coeff)
      coeff.push_back(json::array({c.real(), c.imag()}));
    j["coeff"] = std::move(coeff);
  } else if (const auto* torus = dynamic_cast<const ToroidalShape*>(&shape)) {
    j["type"] = "toroidal";
    j["seed"] = torus->seed;
    j["a0"] = torus->a0;
    j["b0"] = torus->b0;
    j["r0"] = torus->r0;
    j["r1"] = torus->r1;
    j["A0"] = torus->A0;
    j["B0"] = torus->B0;
    j["A1"] = torus->A1;
    j["B1"] = torus->B1;
  } else {
    throw ConfigError("write shape: unsupported shape class");
  }
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
  if (!out) throw ConfigError("write failed: " + path);
}

std::unique_ptr<Shape> read_shape_json(const std::string& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  }

  const auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
      if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
            return item.key() == k;
          }) == allowed.end())
        throw ParseError(path, 0, "unknown shape key: " + item.key());
    }
  };

  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "radial") {
      reject_unknown({"type", "max_degree", "seed", "coeff"});
      auto shape = std::make_unique<RadialShape>();
      shape->max_degree = j.at("max_degree").get<int>();
      shape->seed = j.at("seed").get<std::uint64_t>();
      const json& coeff = j.at("coeff");
      const std::size_t expected =
          static_cast<std::size_t>((shape->max_degree + 1) * (shape->max_degree + 1));
      if (!coeff.is_array() || coeff.size() != expected)
        throw ParseError(path, 0,
                         "coeff must hold " + std::to_string(expected) + " [re, im] pairs");
      for (const json& pair : coeff) {
        if (!pair.is_array() || pair.size() != 2)
          throw ParseError(path, 0, "coefficient entries must be [re, im] pairs");
        shape->coeff.emplace_back(pair[0].get<double>(), pair[1].get<double>());
      }
      shape->refresh_real_coefficients();
      return shape;
    }
    if (type == "toroidal") {
      reject_unknown({"type", "seed", "a0", "b0", "r0", "r1", "A0", "B0", "A1", "B1"});
      auto shape = std::make_unique<ToroidalShape>();
      shape->seed = j.at("seed").get<std::uint64_t>();
      shape->a0 = j.at("a0").get<double>();
      shape->b0 = j.at("b0").get<double>();
      shape->r0 = j.at("r0").get<double>();
      shape->r1 = j.at("r1").get<double>();
      shape->A0 = j.at("A0").get<int>();
      shape->B0 = j.at("B0").get<int>();
      shape->A1 = j.at("A1").get<int>();
      shape->B1 = j.at("B1").get<int>();
      return shape;
    }
    throw ParseError(path, 0, "unknown shape type: " + type);
  } catch (const json::exception& e) {
    throw ParseError(path, 0, e.what());
  }
}

void write_error_table_csv(const std::string& path, const ErrorTable& table) {
  validate_table(table, "write table");
  std::ofstream out = open_out(path);
  out << "model,noise,k,family,normal,metric_inverse,shape,gaussian,mean\n";
  for (const ErrorTableRow& row : table.rows) {
    out << row.model << ',' << row.noise << ',' << row.k << ',' << row.family << ','
        << fmt_double(row.err.normal) << ',' << fmt_double(row.err.metric_inverse) << ','
        << fmt_double(row.err.shape) << ',' << fmt_double(row.err.gaussian) << ','
        << fmt_double(row.err.mean) << "\n";
  }
  if (!out) throw ConfigError("write failed: " + path);
}

ErrorTable read_error_table_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  LineReader reader(in, path);
  const std::string header = reader.require("table header");
  if (header != "model,noise,k,family,normal,metric_inverse,shape,gaussian,mean")
    reader.fail("unexpected table header: " + header);

  ErrorTable table;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 9) reader.fail("expected 9 fields, got " + std::to_string(fields.size()));
    ErrorTableRow row;
    row.model = fields[0];
    row.noise = fields[1];
    row.k = static_cast<int>(parse_int(fields[2], reader));
    row.family = fields[3];
    row.err.normal = parse_double(fields[4], reader);
    row.err.metric_inverse = parse_double(fields[5], reader);
    row.err.shape = parse_double(fields[6], reader);
    row.err.gaussian = parse_double(fields[7], reader);
    row.err.mean = parse_double(fields[8], reader);
    table.rows.push_back(std::move(row));
  }
  validate_table(table, "read table");
  return table;
}

void write_error_table_json(const std::string& path, const ErrorTable& table) {
  validate_table(table, "write table");
  json rows = json::array();
  for (const ErrorTableRow& row : table.rows) rows.push_back(table_row_json(row));
  std::ofstream out = open_out(path);
  out << json{{"rows", std::move(rows)}}.dump(2) << "\n";
  if (!out) throw ConfigError("write failed: " + path);
}

void write_matrix_mtx(const std::string& path,
                      const Eigen::SparseMatrix<double, Eigen::RowMajor>& matrix) {
  std::ofstream out = open_out(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << "\n";
  for (int r = 0; r < matrix.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(matrix, r); it; ++it)
      out << (r + 1) << ' ' << (it.col() + 1) << ' ' << fmt_double(it.value()) << "\n";
  if (!out) throw ConfigError("write failed: " + path);
}

Eigen::SparseMatrix<double, Eigen::RowMajor> read_matrix_mtx(const std::string& path) {
  std::ifstream in = open_in(path);
  LineReader reader(in, path);
  const std::string banner = reader.require("MatrixMarket banner");
  if (banner != "%%MatrixMarket matrix coordinate real general")
    reader.fail("unsupported MatrixMarket banner: " + banner);

  std::string line;
  do {
    line = reader.require("size line");
  } while (!line.empty() && line[0] == '%');

  const std::vector<std::string> sizes = split_ws(line);
  if (sizes.size() != 3) reader.fail("size line must hold rows cols nnz");
  const long long rows = parse_int(sizes[0], reader);
  const long long cols = parse_int(sizes[1], reader);
  const long long nnz = parse_int(sizes[2], reader);
  if (rows < 0 || cols < 0 || nnz < 0) reader.fail("negative dimension");

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz));
  for (long long e = 0; e < nnz; ++e) {
    const std::string entry = reader.require("matrix entry");
    const std::vector<std::string> fields = split_ws(entry);
    if (fields.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(fields.size()));
    const long long r = parse_int(fields[0], reader);
    const long long c = parse_int(fields[1], reader);
    const double v = parse_double(fields[2], reader);
    if (r < 1 || r > rows || c < 1 || c > cols) reader.fail("entry index out of range");
    triplets.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), v);
  }

  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix(static_cast<int>(rows),
                                                      static_cast<int>(cols));
  matrix.setFromTriplets(triplets.begin(), triplets.end());
  return matrix;
}

void write_vector_csv(const std::string& path, const std::string& name,
                      const Eigen::VectorXd& values) {
  std::ofstream out = open_out(path);
  out << name << "\n";
  for (Eigen::Index i = 0; i < values.size(); ++i) out << fmt_double(values(i)) << "\n";
  if (!out) throw ConfigError("write failed: " + path);
}

Eigen::VectorXd read_vector_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  LineReader reader(in, path);
  reader.require("column header");
  std::vector<double> values;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    values.push_back(parse_double(line, reader));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) out(static_cast<Eigen::Index>(i)) = values[i];
  return out;
}

std::vector<std::string> write_trajectory(const std::string& dir,
                                          const std::vector<FlowState>& snapshots) {
  std::filesystem::create_directories(dir);
  json manifest_snapshots = json::array();
  std::vector<std::string> files;
  files.push_back("trajectory.json");

  for (const FlowState& state : snapshots) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%04d.ply", state.step);
    PointCloud cloud;
    KahanSum abs_h;
    for (std::size_t i = 0; i < state.points.size(); ++i) {
      if (!state.alive[i]) continue;
      cloud.points.push_back(state.points[i]);
      cloud.normals.push_back(state.normal[i]);
      abs_h.add(std::abs(state.curvature[i]));
    }
    write_cloud_ply(dir + "/" + name, cloud);

    const double spacing = min_alive_spacing(state);
    const int alive = state.alive_count();
    manifest_snapshots.push_back(
        json{{"file", name},
             {"step", state.step},
             {"time", state.time},
             {"alive", alive},
             // -1 marks an undefined spacing (fewer than two alive points)
             {"min_spacing", std::isfinite(spacing) ? spacing : -1.0},
             {"mean_abs_h", alive > 0 ? abs_h.value() / alive : 0.0}});
    files.emplace_back(name);
  }

  std::ofstream out = open_out(dir + "/trajectory.json");
  out << json{{"snapshots", std::move(manifest_snapshots)}}.dump(2) << "\n";
  if (!out) throw ConfigError("write failed: " + dir + "/trajectory.json");
  return files;
}

void write_manifest(const std::string& dir,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::vector<std::pair<std::string, std::string>> sorted = entries;
  std::sort(sorted.begin(), sorted.end());
  json files = json::array();
  for (const auto& [name, kind] : sorted) files.push_back(json{{"file", name}, {"kind", kind}});
  std::filesystem::create_directories(dir);
  std::ofstream out = open_out(dir + "/manifest.json");
  out << json{{"files", std::move(files)}}.dump(2) << "\n";
  if (!out) throw ConfigError("write failed: " + dir + "/manifest.json");
}

}  // namespace pcgeom
