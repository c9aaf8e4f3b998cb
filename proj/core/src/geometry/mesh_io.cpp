#include "surfcomp/geometry/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

static_assert(std::endian::native == std::endian::little,
              "binary PLY I/O assumes a little-endian host");

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

/// Whitespace tokenizer over one line.
class Tokens {
 public:
  explicit Tokens(std::string_view line) : rest_(line) {}

  std::optional<std::string_view> next() {
    std::size_t b = 0;
    while (b < rest_.size() && std::isspace(static_cast<unsigned char>(rest_[b]))) ++b;
    if (b == rest_.size()) return std::nullopt;
    std::size_t e = b;
    while (e < rest_.size() && !std::isspace(static_cast<unsigned char>(rest_[e]))) ++e;
    std::string_view tok = rest_.substr(b, e - b);
    rest_ = rest_.substr(e);
    return tok;
  }

 private:
  std::string_view rest_;
};

template <typename T>
std::optional<T> parse_number(std::string_view tok) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && tok.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

/// Splits `text` into lines, tolerating CRLF.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

TriangleMesh finish(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                    std::vector<Vec3> colors, std::size_t polygons,
                    MeshLoadReport* report) {
  TriangleMesh mesh(std::move(vertices), std::move(triangles), std::move(colors));
  if (report) {
    report->polygons_read = polygons;
    report->triangles_after_fan = mesh.triangle_count();
    report->degenerate_triangles = mesh.degenerate_triangles();
  }
  return mesh;
}

/// Appends the fan triangulation of `poly`. Polygons that repeat a vertex in a
/// fan triangle cannot be represented and are reported as parse errors.
void fan(const std::vector<std::uint32_t>& poly, std::vector<Triangle>& out,
         std::size_t location, ParseError::Unit unit) {
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    Triangle t{poly[0], poly[k], poly[k + 1]};
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw ParseError("face repeats a vertex index", location, unit);
    }
    out.push_back(t);
  }
}

// ---------------------------------------------------------------- OBJ

TriangleMesh load_obj(const std::string& text, MeshLoadReport* report) {
  std::vector<Vec3> vertices;
  std::vector<Vec3> colors;
  std::vector<Triangle> triangles;
  bool any_color = false;
  std::size_t polygons = 0;
  std::vector<std::uint32_t> poly;

  const auto lines = split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    Tokens tok(lines[ln]);
    auto kw = tok.next();
    if (!kw || kw->front() == '#') continue;

    if (*kw == "v") {
      double c[6];
      int n = 0;
      while (auto t = tok.next()) {
        if (n == 6) throw ParseError("too many components in vertex", line_no, ParseError::Unit::kLine);
        auto v = parse_number<double>(*t);
        if (!v) throw ParseError("bad number '" + std::string(*t) + "'", line_no, ParseError::Unit::kLine);
        c[n++] = *v;
      }
      if (n != 3 && n != 4 && n != 6) {
        throw ParseError("vertex needs 3 coordinates (or 6 with color)", line_no, ParseError::Unit::kLine);
      }
      vertices.emplace_back(c[0], c[1], c[2]);
      if (n == 6) {
        any_color = true;
        colors.emplace_back(c[3], c[4], c[5]);
      } else {
        colors.emplace_back(0.7, 0.7, 0.7);
      }
    } else if (*kw == "f") {
      poly.clear();
      while (auto t = tok.next()) {
        std::string_view idx_tok = t->substr(0, t->find('/'));
        auto idx = parse_number<long long>(idx_tok);
        if (!idx) throw ParseError("bad face index '" + std::string(*t) + "'", line_no, ParseError::Unit::kLine);
        long long resolved = *idx;
        if (resolved == 0) {
          throw ParseError("face index 0 is invalid (OBJ indices are 1-based)", line_no, ParseError::Unit::kLine);
        }
        if (resolved < 0) resolved += static_cast<long long>(vertices.size()) + 1;
        if (resolved < 1 || resolved > static_cast<long long>(vertices.size())) {
          throw ParseError("face index " + std::to_string(*idx) + " out of range", line_no, ParseError::Unit::kLine);
        }
        poly.push_back(static_cast<std::uint32_t>(resolved - 1));
      }
      if (poly.size() < 3) throw ParseError("face needs at least 3 vertices", line_no, ParseError::Unit::kLine);
      fan(poly, triangles, line_no, ParseError::Unit::kLine);
      ++polygons;
    }
    // vt, vn, o, g, s, usemtl, mtllib, l, p carry nothing we keep.
  }
  if (!any_color) colors.clear();
  return finish(std::move(vertices), std::move(triangles), std::move(colors), polygons, report);
}

// ---------------------------------------------------------------- PLY

enum class Scalar { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<Scalar> scalar_from_name(std::string_view n) {
  if (n == "char" || n == "int8") return Scalar::kInt8;
  if (n == "uchar" || n == "uint8") return Scalar::kUInt8;
  if (n == "short" || n == "int16") return Scalar::kInt16;
  if (n == "ushort" || n == "uint16") return Scalar::kUInt16;
  if (n == "int" || n == "int32") return Scalar::kInt32;
  if (n == "uint" || n == "uint32") return Scalar::kUInt32;
  if (n == "float" || n == "float32") return Scalar::kFloat32;
  if (n == "double" || n == "float64") return Scalar::kFloat64;
  return std::nullopt;
}

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::kInt8:
    case Scalar::kUInt8: return 1;
    case Scalar::kInt16:
    case Scalar::kUInt16: return 2;
    case Scalar::kInt32:
    case Scalar::kUInt32:
    case Scalar::kFloat32: return 4;
    case Scalar::kFloat64: return 8;
  }
  return 0;
}

bool is_integral(Scalar s) { return s != Scalar::kFloat32 && s != Scalar::kFloat64; }

struct Property {
  std::string name;
  Scalar type = Scalar::kFloat32;
  bool is_list = false;
  Scalar count_type = Scalar::kUInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

enum class PlyFormat { kAscii, kBinaryLE };

struct PlyHeader {
  PlyFormat format = PlyFormat::kAscii;
  std::vector<Element> elements;
  std::size_t data_offset = 0;  ///< byte offset of the body
  std::size_t header_lines = 0;
};

PlyHeader parse_ply_header(const std::string& data) {
  PlyHeader h;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_format = false;
  auto next_line = [&]() -> std::string_view {
    const std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) {
      throw ParseError("PLY header not terminated by end_header", line_no + 1, ParseError::Unit::kLine);
    }
    std::string_view line(data.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return line;
  };

  if (next_line() != "ply") throw ParseError("missing 'ply' magic", 1, ParseError::Unit::kLine);
  for (;;) {
    std::string_view line = next_line();
    Tokens tok(line);
    auto kw = tok.next();
    if (!kw) continue;
    if (*kw == "end_header") break;
    if (*kw == "comment" || *kw == "obj_info") continue;
    if (*kw == "format") {
      auto f = tok.next();
      if (f == "ascii") {
        h.format = PlyFormat::kAscii;
      } else if (f == "binary_little_endian") {
        h.format = PlyFormat::kBinaryLE;
      } else if (f == "binary_big_endian") {
        throw UnsupportedFormatError("binary_big_endian PLY is not supported");
      } else {
        throw ParseError("unknown PLY format", line_no, ParseError::Unit::kLine);
      }
      saw_format = true;
    } else if (*kw == "element") {
      auto name = tok.next();
      auto count = name ? tok.next() : std::nullopt;
      auto n = count ? parse_number<std::size_t>(*count) : std::nullopt;
      if (!n) throw ParseError("malformed element line", line_no, ParseError::Unit::kLine);
      h.elements.push_back(Element{std::string(*name), *n, {}});
    } else if (*kw == "property") {
      if (h.elements.empty()) throw ParseError("property before any element", line_no, ParseError::Unit::kLine);
      Property p;
      auto t = tok.next();
      if (!t) throw ParseError("malformed property line", line_no, ParseError::Unit::kLine);
      if (*t == "list") {
        auto ct = tok.next();
        auto it = ct ? tok.next() : std::nullopt;
        auto nm = it ? tok.next() : std::nullopt;
        if (!nm) throw ParseError("malformed list property", line_no, ParseError::Unit::kLine);
        auto cs = scalar_from_name(*ct);
        auto is = scalar_from_name(*it);
        if (!cs || !is) throw UnsupportedFormatError("unsupported PLY property type on line " + std::to_string(line_no));
        if (!is_integral(*cs)) throw ParseError("list count type must be integral", line_no, ParseError::Unit::kLine);
        p.is_list = true;
        p.count_type = *cs;
        p.type = *is;
        p.name = std::string(*nm);
      } else {
        auto nm = tok.next();
        if (!nm) throw ParseError("malformed property line", line_no, ParseError::Unit::kLine);
        auto s = scalar_from_name(*t);
        if (!s) throw UnsupportedFormatError("unsupported PLY property type '" + std::string(*t) + "'");
        p.type = *s;
        p.name = std::string(*nm);
      }
      h.elements.back().properties.push_back(std::move(p));
    } else {
      throw ParseError("unexpected header keyword '" + std::string(*kw) + "'", line_no, ParseError::Unit::kLine);
    }
  }
  if (!saw_format) throw ParseError("PLY header lacks a format line", line_no, ParseError::Unit::kLine);
  h.data_offset = pos;
  h.header_lines = line_no;
  return h;
}

/// Sequential reader over the PLY body in either encoding.
class PlyBody {
 public:
  PlyBody(const std::string& data, const PlyHeader& h)
      : data_(data), format_(h.format), pos_(h.data_offset), line_(h.header_lines) {}

  /// ASCII rows are one element instance per line.
  void begin_row() {
    if (format_ != PlyFormat::kAscii) return;
    for (;;) {
      if (pos_ >= data_.size()) throw ParseError("unexpected end of PLY data", line_ + 1, ParseError::Unit::kLine);
      std::size_t end = data_.find('\n', pos_);
      if (end == std::string::npos) end = data_.size();
      row_ = std::string_view(data_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_;
      row_tokens_ = Tokens(row_);
      // Skip blank lines.
      Tokens probe(row_);
      if (probe.next()) return;
    }
  }

  void end_row() {
    if (format_ == PlyFormat::kAscii && row_tokens_.next()) {
      throw ParseError("extra values on PLY data line", line_, ParseError::Unit::kLine);
    }
  }

  double read(Scalar type) {
    if (format_ == PlyFormat::kAscii) {
      auto tok = row_tokens_.next();
      if (!tok) throw ParseError("too few values on PLY data line", line_, ParseError::Unit::kLine);
      auto v = parse_number<double>(*tok);
      if (!v) throw ParseError("bad number '" + std::string(*tok) + "'", line_, ParseError::Unit::kLine);
      return *v;
    }
    const std::size_t size = scalar_size(type);
    if (pos_ + size > data_.size()) {
      throw ParseError("unexpected end of binary PLY data", pos_, ParseError::Unit::kByteOffset);
    }
    const char* p = data_.data() + pos_;
    pos_ += size;
    switch (type) {
      case Scalar::kInt8: return load<std::int8_t>(p);
      case Scalar::kUInt8: return load<std::uint8_t>(p);
      case Scalar::kInt16: return load<std::int16_t>(p);
      case Scalar::kUInt16: return load<std::uint16_t>(p);
      case Scalar::kInt32: return load<std::int32_t>(p);
      case Scalar::kUInt32: return load<std::uint32_t>(p);
      case Scalar::kFloat32: return load<float>(p);
      case Scalar::kFloat64: return load<double>(p);
    }
    return 0.0;
  }

  std::size_t location() const { return format_ == PlyFormat::kAscii ? line_ : pos_; }
  ParseError::Unit unit() const {
    return format_ == PlyFormat::kAscii ? ParseError::Unit::kLine : ParseError::Unit::kByteOffset;
  }

 private:
  template <typename T>
  static double load(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return static_cast<double>(v);
  }

  const std::string& data_;
  PlyFormat format_;
  std::size_t pos_;
  std::size_t line_;
  std::string_view row_;
  Tokens row_tokens_{""};
};

struct PlyContents {
  std::vector<Vec3> vertices;
  std::vector<Vec3> colors;
  std::vector<Triangle> triangles;
  std::size_t polygons = 0;
};

PlyContents read_ply(const std::string& data, bool want_faces) {
  const PlyHeader h = parse_ply_header(data);
  PlyBody body(data, h);
  PlyContents out;
  bool saw_vertex = false;

  for (const Element& el : h.elements) {
    if (el.name == "tristrips") {
      throw UnsupportedFormatError("PLY element 'tristrips' is not supported");
    }
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    if (is_face && !saw_vertex) throw ParseError("face element precedes vertex element", 0, ParseError::Unit::kLine);

    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1, ilist = -1;
    for (std::size_t k = 0; k < el.properties.size(); ++k) {
      const Property& p = el.properties[k];
      const int kk = static_cast<int>(k);
      if (is_vertex && !p.is_list) {
        if (p.name == "x") ix = kk;
        if (p.name == "y") iy = kk;
        if (p.name == "z") iz = kk;
        if (p.name == "red" || p.name == "r") ir = kk;
        if (p.name == "green" || p.name == "g") ig = kk;
        if (p.name == "blue" || p.name == "b") ib = kk;
      }
      if (is_face && p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) ilist = kk;
    }
    if (is_vertex) {
      if (ix < 0 || iy < 0 || iz < 0) throw ParseError("vertex element lacks x/y/z", h.header_lines, ParseError::Unit::kLine);
      saw_vertex = true;
    }
    if (is_face && ilist < 0) throw ParseError("face element lacks vertex_indices", h.header_lines, ParseError::Unit::kLine);
    const bool has_color = is_vertex && ir >= 0 && ig >= 0 && ib >= 0;

    std::vector<double> scalars(el.properties.size());
    std::vector<std::uint32_t> poly;
    for (std::size_t row = 0; row < el.count; ++row) {
      body.begin_row();
      for (std::size_t k = 0; k < el.properties.size(); ++k) {
        const Property& p = el.properties[k];
        if (!p.is_list) {
          scalars[k] = body.read(p.type);
          continue;
        }
        const double count_value = body.read(p.count_type);
        if (count_value < 0) throw ParseError("negative list length", body.location(), body.unit());
        const auto count = static_cast<std::size_t>(count_value);
        const bool keep = is_face && static_cast<int>(k) == ilist;
        if (keep) poly.clear();
        for (std::size_t j = 0; j < count; ++j) {
          const double v = body.read(p.type);
          if (!keep) continue;
          if (v < 0 || v >= static_cast<double>(out.vertices.size()) || v != std::floor(v)) {
            throw ParseError("face index out of range", body.location(), body.unit());
          }
          poly.push_back(static_cast<std::uint32_t>(v));
        }
        if (keep) {
          if (poly.size() < 3) throw ParseError("face needs at least 3 vertices", body.location(), body.unit());
          if (want_faces) fan(poly, out.triangles, body.location(), body.unit());
          ++out.polygons;
        }
      }
      body.end_row();
      if (is_vertex) {
        out.vertices.emplace_back(scalars[ix], scalars[iy], scalars[iz]);
        if (has_color) {
          const auto norm = [&](int k) {
            const Scalar t = el.properties[static_cast<std::size_t>(k)].type;
            const double v = scalars[static_cast<std::size_t>(k)];
            if (t == Scalar::kUInt8) return v / 255.0;
            if (t == Scalar::kUInt16) return v / 65535.0;
            return v;
          };
          out.colors.emplace_back(norm(ir), norm(ig), norm(ib));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- writers

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

template <typename T>
void append_binary(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

std::uint8_t color_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string ply_bytes(const std::vector<Vec3>& vertices, const std::vector<Vec3>& colors,
                      const std::vector<Triangle>* triangles, PlyEncoding encoding) {
  const bool binary = encoding == PlyEncoding::kBinaryLittleEndian;
  std::string out = "ply\nformat ";
  out += binary ? "binary_little_endian 1.0\n" : "ascii 1.0\n";
  out += "element vertex " + std::to_string(vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  const bool color = !colors.empty();
  if (color) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (triangles) {
    out += "element face " + std::to_string(triangles->size()) + "\n";
    out += "property list uchar int vertex_indices\n";
  }
  out += "end_header\n";

  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec3& v = vertices[i];
    if (binary) {
      append_binary(out, v.x());
      append_binary(out, v.y());
      append_binary(out, v.z());
      if (color) {
        for (int c = 0; c < 3; ++c) append_binary(out, color_byte(colors[i][c]));
      }
    } else {
      append_number(out, v.x());
      out += ' ';
      append_number(out, v.y());
      out += ' ';
      append_number(out, v.z());
      if (color) {
        for (int c = 0; c < 3; ++c) out += ' ' + std::to_string(color_byte(colors[i][c]));
      }
      out += '\n';
    }
  }
  if (triangles) {
    for (const Triangle& t : *triangles) {
      if (binary) {
        append_binary<std::uint8_t>(out, 3);
        for (std::uint32_t idx : t) append_binary(out, static_cast<std::int32_t>(idx));
      } else {
        out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
      }
    }
  }
  return out;
}

std::string obj_bytes(const TriangleMesh& mesh) {
  std::string out;
  const bool color = mesh.has_colors();
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec3& v = mesh.vertices()[i];
    out += "v ";
    append_number(out, v.x());
    out += ' ';
    append_number(out, v.y());
    out += ' ';
    append_number(out, v.z());
    if (color) {
      for (int c = 0; c < 3; ++c) {
        out += ' ';
        append_number(out, mesh.vertex_colors()[i][c]);
      }
    }
    out += '\n';
  }
  for (const Triangle& t : mesh.triangles()) {
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
           std::to_string(t[2] + 1) + '\n';
  }
  return out;
}

}  // namespace

TriangleMesh load_mesh(const fs::path& path, MeshLoadReport* report) {
  const std::string ext = lower_extension(path);
  if (ext != ".obj" && ext != ".ply") {
    throw UnsupportedFormatError("unsupported mesh extension '" + ext + "'");
  }
  const std::string data = read_file(path);
  if (ext == ".obj") return load_obj(data, report);
  PlyContents ply = read_ply(data, true);
  return finish(std::move(ply.vertices), std::move(ply.triangles), std::move(ply.colors),
                ply.polygons, report);
}

void save_mesh(const TriangleMesh& mesh, const fs::path& path, PlyEncoding encoding) {
  if (mesh.empty()) throw PreconditionError("refusing to write a mesh without triangles");
  const std::string ext = lower_extension(path);
  if (ext == ".ply") {
    write_file(path, ply_bytes(mesh.vertices(), mesh.vertex_colors(), &mesh.triangles(), encoding));
  } else if (ext == ".obj") {
    write_file(path, obj_bytes(mesh));
  } else {
    throw UnsupportedFormatError("unsupported mesh extension '" + ext + "'");
  }
}

void save_point_cloud(const PointCloud& cloud, const fs::path& path, PlyEncoding encoding) {
  write_file(path, ply_bytes(cloud.points(), {}, nullptr, encoding));
}

PointCloud load_point_cloud(const fs::path& path) {
  if (lower_extension(path) != ".ply") {
    throw UnsupportedFormatError("point clouds are read from .ply files");
  }
  PlyContents ply = read_ply(read_file(path), false);
  return PointCloud(std::move(ply.vertices));
}

}  // namespace surfcomp
