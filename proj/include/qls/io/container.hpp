#pragma once

// QLS1 result container.
//
//   bytes 0..3   "QLS1"
//   bytes 4..11  header length H, uint64 little-endian
//   next H bytes UTF-8 JSON header:
//                  {"format": "QLS1", "version": 1,
//                   "arrays": [{"name", "dtype": "f64"|"c128", "shape": [...],
//                               "offset": bytes from payload start, "nbytes"}],
//                   "config": {...}, "diagnostics": {...}, "metadata": {...}}
//   payload      arrays back to back, little-endian, row-major; c128 is
//                (re, im) pairs of f64.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qls {

enum class DType { F64, C128 };

struct ContainerArray {
  std::string name;
  DType dtype = DType::F64;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;  // c128: interleaved re/im

  std::uint64_t element_count() const;
};

class Container {
 public:
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json diagnostics = nlohmann::json::object();
  nlohmann::json metadata = nlohmann::json::object();

  void add(const std::string& name, const Eigen::VectorXd& v);
  void add(const std::string& name, const Eigen::MatrixXd& m);  // stored row-major
  void add(const std::string& name, const Eigen::VectorXcd& v);
  void add(const std::string& name, const Eigen::MatrixXcd& m);
  void add_scalar(const std::string& name, double value);

  bool has(const std::string& name) const;
  const ContainerArray& array(const std::string& name) const;
  const std::vector<ContainerArray>& arrays() const { return arrays_; }

  Eigen::VectorXd vector(const std::string& name) const;   // any f64 array, flattened
  Eigen::MatrixXd matrix(const std::string& name) const;   // 2-D f64
  Eigen::VectorXcd cvector(const std::string& name) const;
  Eigen::MatrixXcd cmatrix(const std::string& name) const;
  double scalar(const std::string& name) const;

  nlohmann::json header() const;
  std::string serialize() const;
  static Container deserialize(const std::string& bytes);

  void write(const std::string& path) const;
  static Container read(const std::string& path);

 private:
  void insert(ContainerArray a);
  std::vector<ContainerArray> arrays_;
};

// Normalized L1 (sum|a-b| / max(sum|a|, sum|b|)) or max|a-b| between two
// same-shaped f64 arrays.
double compare_arrays(const Container& a, const Container& b, const std::string& name,
                      const std::string& metric);

}  // namespace qls
