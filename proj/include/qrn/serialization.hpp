#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrn/operators.hpp"
#include "qrn/region.hpp"

namespace qrn {

using Json = nlohmann::ordered_json;

// Fixed report formatting: 12 significant digits.
inline std::string format_margin(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Round to the 12-digit wire representation so serialized and in-memory
// values agree exactly.
inline double round_margin(double v) { return std::strtod(format_margin(v).c_str(), nullptr); }

// Matrix layout: row-major [re, im] pairs.
inline Json matrix_to_json(const Matrix& m) {
  Json entries = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      entries.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
  return entries;
}

inline Matrix matrix_from_json(const Json& entries, int dim) {
  if (!entries.is_array() || entries.size() != static_cast<std::size_t>(dim) * dim)
    throw Error(ErrorKind::io_failure, "entry list does not match dim*dim");
  Matrix m(dim, dim);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) {
      const Json& pair = entries[k++];
      if (!pair.is_array() || pair.size() != 2)
        throw Error(ErrorKind::io_failure, "matrix entries must be [re, im] pairs");
      m(i, j) = Complex(pair[0].get<double>(), pair[1].get<double>());
    }
  return m;
}

inline Json operator_to_json(const HermitianOperator& op) {
  Json j;
  j["dim"] = op.dim();
  j["label"] = op.label();
  j["entries"] = matrix_to_json(op.entries());
  return j;
}

inline HermitianOperator operator_from_json(const Json& j) {
  if (!j.contains("dim") || !j.contains("entries"))
    throw Error(ErrorKind::io_failure, "operator needs dim and entries");
  int dim = j["dim"].get<int>();
  Matrix m = matrix_from_json(j["entries"], dim);
  if (!approx_hermitian(m, 1e-9))
    throw Error(ErrorKind::io_failure, "loaded operator is not hermitian");
  return HermitianOperator(std::move(m), j.value("label", std::string{}));
}

inline Json state_to_json(const DensityMatrix& rho) {
  Json j;
  j["dim"] = rho.dim();
  j["entries"] = matrix_to_json(rho.entries());
  return j;
}

// Loading revalidates every invariant.
inline DensityMatrix state_from_json(const Json& j) {
  if (!j.contains("dim") || !j.contains("entries"))
    throw Error(ErrorKind::io_failure, "state needs dim and entries");
  int dim = j["dim"].get<int>();
  return DensityMatrix(matrix_from_json(j["entries"], dim));
}

// Regions travel as (center, radius, seed, n); samples regenerate from the
// documented sampling law.
inline Json region_to_json(const StateRegion& region) {
  Json j;
  j["center"] = state_to_json(region.center());
  j["radius"] = region.radius();
  j["seed"] = region.seed();
  j["n"] = region.size();
  return j;
}

inline StateRegion region_from_json(const Json& j) {
  for (const char* key : {"center", "radius", "seed", "n"})
    if (!j.contains(key)) throw Error(ErrorKind::io_failure, "region is missing a field");
  DensityMatrix center = state_from_json(j["center"]);
  return sample_region(center, j["radius"].get<double>(), j["n"].get<std::size_t>(),
                       j["seed"].get<std::uint64_t>());
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
  return out;
}

inline std::string qrn_to_csv(const QuantumRealNumber& value) {
  std::string out = "sample_index,value\n";
  for (std::size_t i = 0; i < value.per_sample.size(); ++i)
    out += csv_line({std::to_string(i), format_margin(value.per_sample[i])});
  return out;
}

inline void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io_failure, "cannot open " + path);
  out << body;
  if (!out) throw Error(ErrorKind::io_failure, "failed writing " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace qrn
