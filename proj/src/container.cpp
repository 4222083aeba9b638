#include "qls/io/container.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qls/error.hpp"

namespace qls {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'Q', 'L', 'S', '1'};

Error io_error(const std::string& what) { return Error(ErrorKind::Io, "io", what); }

const char* dtype_name(DType d) { return d == DType::F64 ? "f64" : "c128"; }

std::size_t doubles_per_element(DType d) { return d == DType::F64 ? 1 : 2; }

}  // namespace

std::uint64_t ContainerArray::element_count() const {
  std::uint64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

void Container::insert(ContainerArray a) {
  if (a.name.empty()) throw invalid_parameter("array name must not be empty");
  if (has(a.name)) throw invalid_parameter("duplicate array '" + a.name + "'");
  arrays_.push_back(std::move(a));
}

void Container::add(const std::string& name, const Eigen::VectorXd& v) {
  insert({name, DType::F64, {static_cast<std::uint64_t>(v.size())}, {v.data(), v.data() + v.size()}});
}

void Container::add(const std::string& name, const Eigen::MatrixXd& m) {
  ContainerArray a{name, DType::F64, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
  a.data.resize(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(a.data.data(), m.rows(), m.cols()) = m;
  insert(std::move(a));
}

void Container::add(const std::string& name, const Eigen::VectorXcd& v) {
  ContainerArray a{name, DType::C128, {static_cast<std::uint64_t>(v.size())}, {}};
  a.data.resize(2 * static_cast<std::size_t>(v.size()));
  std::memcpy(a.data.data(), v.data(), a.data.size() * sizeof(double));
  insert(std::move(a));
}

void Container::add(const std::string& name, const Eigen::MatrixXcd& m) {
  ContainerArray a{name, DType::C128, {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())}, {}};
  a.data.resize(2 * static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      reinterpret_cast<std::complex<double>*>(a.data.data()), m.rows(), m.cols()) = m;
  insert(std::move(a));
}

void Container::add_scalar(const std::string& name, double value) {
  insert({name, DType::F64, {1}, {value}});
}

bool Container::has(const std::string& name) const {
  return std::any_of(arrays_.begin(), arrays_.end(), [&](const auto& a) { return a.name == name; });
}

const ContainerArray& Container::array(const std::string& name) const {
  for (const auto& a : arrays_)
    if (a.name == name) return a;
  throw invalid_parameter("container has no array '" + name + "'");
}

Eigen::VectorXd Container::vector(const std::string& name) const {
  const auto& a = array(name);
  if (a.dtype != DType::F64) throw invalid_parameter("array '" + name + "' is not f64");
  return Eigen::Map<const Eigen::VectorXd>(a.data.data(), static_cast<Eigen::Index>(a.data.size()));
}

Eigen::MatrixXd Container::matrix(const std::string& name) const {
  const auto& a = array(name);
  if (a.dtype != DType::F64 || a.shape.size() != 2) throw invalid_parameter("array '" + name + "' is not a 2-D f64 array");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      a.data.data(), static_cast<Eigen::Index>(a.shape[0]), static_cast<Eigen::Index>(a.shape[1]));
}

Eigen::VectorXcd Container::cvector(const std::string& name) const {
  const auto& a = array(name);
  if (a.dtype != DType::C128) throw invalid_parameter("array '" + name + "' is not c128");
  return Eigen::Map<const Eigen::VectorXcd>(reinterpret_cast<const std::complex<double>*>(a.data.data()),
                                            static_cast<Eigen::Index>(a.data.size() / 2));
}

Eigen::MatrixXcd Container::cmatrix(const std::string& name) const {
  const auto& a = array(name);
  if (a.dtype != DType::C128 || a.shape.size() != 2) throw invalid_parameter("array '" + name + "' is not a 2-D c128 array");
  return Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      reinterpret_cast<const std::complex<double>*>(a.data.data()), static_cast<Eigen::Index>(a.shape[0]),
      static_cast<Eigen::Index>(a.shape[1]));
}

double Container::scalar(const std::string& name) const {
  const auto& a = array(name);
  if (a.dtype != DType::F64 || a.data.size() != 1) throw invalid_parameter("array '" + name + "' is not an f64 scalar");
  return a.data[0];
}

json Container::header() const {
  json h;
  h["format"] = "QLS1";
  h["version"] = 1;
  json list = json::array();
  std::uint64_t offset = 0;
  for (const auto& a : arrays_) {
    const std::uint64_t nbytes = a.data.size() * sizeof(double);
    list.push_back({{"name", a.name}, {"dtype", dtype_name(a.dtype)}, {"shape", a.shape},
                    {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  h["arrays"] = list;
  h["config"] = config;
  h["diagnostics"] = diagnostics;
  h["metadata"] = metadata;
  return h;
}

std::string Container::serialize() const {
  const std::string text = header().dump(1);
  std::string out;
  std::size_t payload = 0;
  for (const auto& a : arrays_) payload += a.data.size() * sizeof(double);
  out.reserve(12 + text.size() + payload);
  out.append(kMagic, 4);
  const std::uint64_t len = text.size();
  out.append(reinterpret_cast<const char*>(&len), sizeof(len));
  out += text;
  for (const auto& a : arrays_)
    out.append(reinterpret_cast<const char*>(a.data.data()), a.data.size() * sizeof(double));
  return out;
}

Container Container::deserialize(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw io_error("not a QLS1 container");
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 4, sizeof(len));
  if (len > bytes.size() - 12) throw io_error("truncated container header");
  json h;
  try {
    h = json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<std::ptrdiff_t>(len));
  } catch (const json::parse_error& e) {
    throw io_error(std::string("malformed container header: ") + e.what());
  }
  if (h.value("format", "") != "QLS1") throw io_error("container header does not declare QLS1");
  Container c;
  c.config = h.value("config", json::object());
  c.diagnostics = h.value("diagnostics", json::object());
  c.metadata = h.value("metadata", json::object());
  const std::size_t base = 12 + static_cast<std::size_t>(len);
  for (const auto& e : h.at("arrays")) {
    ContainerArray a;
    a.name = e.at("name").get<std::string>();
    const auto dt = e.at("dtype").get<std::string>();
    if (dt == "f64") a.dtype = DType::F64;
    else if (dt == "c128") a.dtype = DType::C128;
    else throw io_error("unknown dtype '" + dt + "' for array '" + a.name + "'");
    a.shape = e.at("shape").get<std::vector<std::uint64_t>>();
    const auto offset = e.at("offset").get<std::uint64_t>();
    const std::uint64_t count = a.element_count() * doubles_per_element(a.dtype);
    if (base + offset + count * sizeof(double) > bytes.size()) throw io_error("array '" + a.name + "' runs past end of file");
    a.data.resize(count);
    std::memcpy(a.data.data(), bytes.data() + base + offset, count * sizeof(double));
    c.insert(std::move(a));
  }
  return c;
}

void Container::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  const std::string bytes = serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write to '" + path + "' failed");
}

Container Container::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

double compare_arrays(const Container& a, const Container& b, const std::string& name,
                      const std::string& metric) {
  const auto& x = a.array(name);
  const auto& y = b.array(name);
  if (x.dtype != DType::F64 || y.dtype != DType::F64) throw invalid_parameter("compare needs f64 arrays");
  if (x.shape != y.shape) throw invalid_parameter("array '" + name + "' has different shapes");
  const Eigen::Map<const Eigen::ArrayXd> u(x.data.data(), static_cast<Eigen::Index>(x.data.size()));
  const Eigen::Map<const Eigen::ArrayXd> v(y.data.data(), static_cast<Eigen::Index>(y.data.size()));
  if (metric == "linf") return u.size() ? (u - v).abs().maxCoeff() : 0.0;
  if (metric == "l1") {
    const double scale = std::max(u.abs().sum(), v.abs().sum());
    return scale > 0.0 ? (u - v).abs().sum() / scale : 0.0;
  }
  throw Error(ErrorKind::Config, "config", "unknown metric '" + metric + "' (l1 | linf)");
}

}  // namespace qls
