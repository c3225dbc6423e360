#include "gsd/splat_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string_view>

#include "gsd/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "PLY binary I/O assumes a little-endian host");

namespace gsd {
namespace {

constexpr double kMinLogScale = -20.0;

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> parse_scalar_type(std::string_view name) {
  static const std::map<std::string_view, ScalarType> kTypes = {
      {"char", ScalarType::Int8},     {"int8", ScalarType::Int8},
      {"uchar", ScalarType::UInt8},   {"uint8", ScalarType::UInt8},
      {"short", ScalarType::Int16},   {"int16", ScalarType::Int16},
      {"ushort", ScalarType::UInt16}, {"uint16", ScalarType::UInt16},
      {"int", ScalarType::Int32},     {"int32", ScalarType::Int32},
      {"uint", ScalarType::UInt32},   {"uint32", ScalarType::UInt32},
      {"float", ScalarType::Float32}, {"float32", ScalarType::Float32},
      {"double", ScalarType::Float64}, {"float64", ScalarType::Float64},
  };
  auto it = kTypes.find(name);
  if (it == kTypes.end()) return std::nullopt;
  return it->second;
}

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::Float32;
  bool is_list = false;
  ScalarType count_type = ScalarType::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  bool ascii = false;
  std::vector<Element> elements;
  std::size_t data_offset = 0;
};

Header parse_header(std::span<const std::uint8_t> bytes) {
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  const auto end_marker = text.find("end_header");
  if (text.substr(0, 3) != "ply" || end_marker == std::string_view::npos)
    throw FormatError("not a PLY file: missing 'ply' magic or 'end_header'");
  auto data_start = text.find('\n', end_marker);
  if (data_start == std::string_view::npos) throw FormatError("PLY header not terminated by newline");

  Header header;
  bool have_format = false;
  std::istringstream lines{std::string(text.substr(0, end_marker))};
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tok(line);
    std::string keyword;
    tok >> keyword;
    if (keyword == "format") {
      std::string fmt;
      tok >> fmt;
      if (fmt == "ascii") {
        header.ascii = true;
      } else if (fmt != "binary_little_endian") {
        throw FormatError("unsupported PLY format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      tok >> e.name >> count;
      if (e.name.empty() || count < 0) throw FormatError("malformed element line: " + line);
      e.count = static_cast<std::size_t>(count);
      header.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (header.elements.empty()) throw FormatError("property before any element");
      Property p;
      std::string type;
      tok >> type;
      if (type == "list") {
        std::string count_type, item_type;
        tok >> count_type >> item_type >> p.name;
        auto ct = parse_scalar_type(count_type);
        auto it = parse_scalar_type(item_type);
        if (!ct || !it) throw FormatError("unknown list property type: " + line);
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
      } else {
        auto t = parse_scalar_type(type);
        if (!t) throw FormatError("unknown property type '" + type + "'");
        p.type = *t;
        tok >> p.name;
      }
      if (p.name.empty()) throw FormatError("property without a name: " + line);
      header.elements.back().properties.push_back(std::move(p));
    }
    // comment / obj_info / ply lines are ignored
  }
  if (!have_format) throw FormatError("PLY header has no format line");
  header.data_offset = data_start + 1;
  return header;
}

double read_binary_scalar(const std::uint8_t* at, ScalarType t) {
  switch (t) {
    case ScalarType::Int8: { std::int8_t v; std::memcpy(&v, at, 1); return v; }
    case ScalarType::UInt8: return *at;
    case ScalarType::Int16: { std::int16_t v; std::memcpy(&v, at, 2); return v; }
    case ScalarType::UInt16: { std::uint16_t v; std::memcpy(&v, at, 2); return v; }
    case ScalarType::Int32: { std::int32_t v; std::memcpy(&v, at, 4); return v; }
    case ScalarType::UInt32: { std::uint32_t v; std::memcpy(&v, at, 4); return v; }
    case ScalarType::Float32: { float v; std::memcpy(&v, at, 4); return v; }
    case ScalarType::Float64: { double v; std::memcpy(&v, at, 8); return v; }
  }
  return 0.0;
}

// Sequential reader over the data section in either encoding.
class DataReader {
 public:
  DataReader(std::span<const std::uint8_t> bytes, std::size_t offset, bool ascii)
      : bytes_(bytes), pos_(offset), ascii_(ascii) {}

  double next(ScalarType t) {
    if (!ascii_) {
      const std::size_t n = type_size(t);
      if (pos_ + n > bytes_.size()) throw FormatError("PLY data truncated");
      const double v = read_binary_scalar(bytes_.data() + pos_, t);
      pos_ += n;
      return v;
    }
    const char* begin = reinterpret_cast<const char*>(bytes_.data());
    while (pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(begin[pos_]))) ++pos_;
    std::size_t end = pos_;
    while (end < bytes_.size() && !std::isspace(static_cast<unsigned char>(begin[end]))) ++end;
    if (end == pos_) throw FormatError("PLY data truncated");
    const std::string token(begin + pos_, begin + end);
    pos_ = end;
    char* parsed_end = nullptr;
    const double v = std::strtod(token.c_str(), &parsed_end);
    if (parsed_end != token.c_str() + token.size())
      throw FormatError("unparsable ascii value '" + token + "'");
    return v;
  }

  void skip_property(const Property& p) {
    if (!p.is_list) {
      next(p.type);
      return;
    }
    const double count = next(p.count_type);
    if (count < 0) throw FormatError("negative list length in property " + p.name);
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) next(p.type);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  bool ascii_;
};

std::optional<std::size_t> rest_suffix(const std::string& name) {
  constexpr std::string_view prefix = "f_rest_";
  if (name.rfind(prefix, 0) != 0) return std::nullopt;
  std::size_t value = 0;
  const char* first = name.data() + prefix.size();
  const char* last = name.data() + name.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
  return value;
}

double sigmoid(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return std::clamp(s, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

void GaussianCloud::validate() const {
  const std::size_t n = centers.size();
  if (n == 0) throw EmptyCloudError("cloud has no Gaussians");
  if (opacities.size() != n || scales.size() != n || rotations.size() != n ||
      colors_dc.size() != n)
    throw ValidationError("cloud arrays have mismatched lengths");
  if (colors_rest.size() != n * rest_count)
    throw ValidationError("colors_rest length does not match rest_count");
  for (std::size_t i = 0; i < n; ++i) {
    if (!centers[i].allFinite()) throw ValidationError("non-finite center", i);
    if (!colors_dc[i].allFinite()) throw ValidationError("non-finite color", i);
    if (!std::isfinite(opacities[i]) || opacities[i] <= 0.0 || opacities[i] >= 1.0)
      throw ValidationError("opacity outside (0,1)", i);
    if (!scales[i].allFinite() || (scales[i].array() <= 0.0).any())
      throw ValidationError("scale not strictly positive", i);
    if (!rotations[i].coeffs().allFinite() || std::abs(rotations[i].norm() - 1.0) > 1e-6)
      throw ValidationError("rotation is not a unit quaternion", i);
  }
}

GaussianCloud load_ply(std::span<const std::uint8_t> bytes, const PlyOptions& opts) {
  const Header header = parse_header(bytes);
  auto vertex_it = std::find_if(header.elements.begin(), header.elements.end(),
                                [](const Element& e) { return e.name == "vertex"; });
  if (vertex_it == header.elements.end()) throw FormatError("PLY has no vertex element");
  const Element& vertex = *vertex_it;

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < vertex.properties.size(); ++i) {
    if (!vertex.properties[i].is_list) column.emplace(vertex.properties[i].name, i);
  }
  static const char* kRequired[] = {"x", "y", "z", "opacity", "scale_0", "scale_1", "scale_2",
                                    "rot_0", "rot_1", "rot_2", "rot_3",
                                    "f_dc_0", "f_dc_1", "f_dc_2"};
  for (const char* name : kRequired) {
    if (!column.count(name)) throw FormatError(std::string("missing required property '") + name + "'");
  }
  std::vector<std::pair<std::size_t, std::size_t>> rest_columns;  // (suffix, column)
  for (const auto& [name, col] : column) {
    if (auto k = rest_suffix(name)) rest_columns.emplace_back(*k, col);
  }
  std::sort(rest_columns.begin(), rest_columns.end());
  for (std::size_t k = 0; k < rest_columns.size(); ++k) {
    if (rest_columns[k].first != k)
      throw FormatError("f_rest properties are not contiguous: missing 'f_rest_" + std::to_string(k) + "'");
  }
  if (vertex.count == 0) throw EmptyCloudError("PLY vertex element is empty");

  const std::size_t n = vertex.count;
  GaussianCloud cloud;
  cloud.rest_count = rest_columns.size();
  cloud.centers.resize(n);
  cloud.opacities.resize(n);
  cloud.scales.resize(n);
  cloud.rotations.resize(n);
  cloud.colors_dc.resize(n);
  cloud.colors_rest.resize(n * cloud.rest_count);

  DataReader reader(bytes, header.data_offset, header.ascii);
  std::vector<double> row(vertex.properties.size());
  for (const Element& element : header.elements) {
    if (&element != &vertex) {
      for (std::size_t r = 0; r < element.count; ++r)
        for (const Property& p : element.properties) reader.skip_property(p);
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < vertex.properties.size(); ++c) {
        const Property& p = vertex.properties[c];
        if (p.is_list) {
          reader.skip_property(p);
          continue;
        }
        row[c] = reader.next(p.type);
        if (!std::isfinite(row[c]))
          throw ValidationError("non-finite value in property '" + p.name + "'", i);
      }
      auto at = [&](const char* name) { return row[column.at(name)]; };
      cloud.centers[i] = {at("x"), at("y"), at("z")};
      cloud.colors_dc[i] = {at("f_dc_0"), at("f_dc_1"), at("f_dc_2")};
      for (std::size_t k = 0; k < cloud.rest_count; ++k)
        cloud.colors_rest[i * cloud.rest_count + k] = static_cast<float>(row[rest_columns[k].second]);

      Eigen::Quaterniond q(at("rot_0"), at("rot_1"), at("rot_2"), at("rot_3"));
      Eigen::Vector3d s(at("scale_0"), at("scale_1"), at("scale_2"));
      double o = at("opacity");
      if (!opts.activated) {
        const double norm = q.norm();
        if (norm == 0.0) throw ValidationError("zero-length rotation quaternion", i);
        q.coeffs() /= norm;
        s = s.cwiseMax(kMinLogScale).array().exp().matrix();
        o = sigmoid(o);
      }
      cloud.rotations[i] = q;
      cloud.scales[i] = s;
      cloud.opacities[i] = o;
    }
  }
  cloud.validate();
  return cloud;
}

std::vector<std::uint8_t> save_ply(const GaussianCloud& cloud, const PlyOptions& opts) {
  const std::size_t n = cloud.size();
  std::ostringstream hdr;
  hdr << "ply\nformat binary_little_endian 1.0\nelement vertex " << n << "\n";
  std::vector<std::string> names = {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"};
  for (std::size_t k = 0; k < cloud.rest_count; ++k) names.push_back("f_rest_" + std::to_string(k));
  for (const char* name : {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
    names.emplace_back(name);
  for (const auto& name : names) hdr << "property float " << name << "\n";
  hdr << "end_header\n";
  const std::string header = hdr.str();

  std::vector<std::uint8_t> out(header.begin(), header.end());
  const std::size_t stride = names.size();
  out.resize(header.size() + n * stride * sizeof(float));
  std::vector<float> row(stride);
  std::uint8_t* dst = out.data() + header.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    const auto put = [&](double v) { row[c++] = static_cast<float>(v); };
    put(cloud.centers[i].x());
    put(cloud.centers[i].y());
    put(cloud.centers[i].z());
    put(0.0);
    put(0.0);
    put(0.0);
    put(cloud.colors_dc[i].x());
    put(cloud.colors_dc[i].y());
    put(cloud.colors_dc[i].z());
    for (std::size_t k = 0; k < cloud.rest_count; ++k) row[c++] = cloud.colors_rest[i * cloud.rest_count + k];
    const double o = cloud.opacities[i];
    put(opts.activated ? o : logit(o));
    for (int a = 0; a < 3; ++a) {
      const double s = cloud.scales[i][a];
      put(opts.activated ? s : std::log(s));
    }
    const Eigen::Quaterniond& q = cloud.rotations[i];
    put(q.w());
    put(q.x());
    put(q.y());
    put(q.z());
    std::memcpy(dst, row.data(), stride * sizeof(float));
    dst += stride * sizeof(float);
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path + "'");
}

GaussianCloud load_ply_file(const std::string& path, const PlyOptions& opts) {
  const auto bytes = read_file_bytes(path);
  return load_ply(bytes, opts);
}

void save_ply_file(const std::string& path, const GaussianCloud& cloud, const PlyOptions& opts) {
  write_file_bytes(path, save_ply(cloud, opts));
}

}  // namespace gsd
