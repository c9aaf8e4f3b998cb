#include "surfcomp/render/image_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

namespace fs = std::filesystem;

namespace {

struct WriteSink {
  std::vector<std::uint8_t>* out;
};

struct ReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void write_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* sink = static_cast<WriteSink*>(png_get_io_ptr(png));
  sink->out->insert(sink->out->end(), data, data + len);
}

void flush_cb(png_structp) {}

void read_cb(png_structp png, png_bytep data, png_size_t len) {
  auto* src = static_cast<ReadSource*>(png_get_io_ptr(png));
  if (src->pos + len > src->size) png_error(png, "truncated PNG stream");
  std::memcpy(data, src->data + src->pos, len);
  src->pos += len;
}

void warn_cb(png_structp, png_const_charp) {}

/// `rows` point into caller-owned storage. Only trivially destructible locals
/// live between setjmp and any longjmp.
bool write_png_rows(std::vector<std::uint8_t>* out, int width, int height, int bit_depth,
                    int color_type, png_bytep* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, warn_cb);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  WriteSink sink{out};
  png_set_write_fn(png, &sink, write_cb, flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // host is little-endian, PNG is big-endian
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

enum class Want { kRgb8, kGray16 };

struct Decoded {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< rows of RGB8 or native-endian uint16
};

const char* decode_rows(std::span<const std::uint8_t> bytes, Want want, Decoded* out) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) return "not a PNG stream";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, warn_cb);
  if (!png) return "libpng initialization failed";
  png_infop info = png_create_info_struct(png);
  const char* volatile error = "corrupt PNG stream";
  ReadSource src{bytes.data(), bytes.size(), 0};
  std::vector<png_bytep>* rows = new std::vector<png_bytep>();
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    delete rows;
    return error;
  }
  png_set_read_fn(png, &src, read_cb);
  png_read_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int depth = png_get_bit_depth(png, info);
  const int type = png_get_color_type(png, info);
  std::size_t row_bytes = 0;
  if (want == Want::kGray16) {
    if (type != PNG_COLOR_TYPE_GRAY || depth != 16) {
      error = "expected a 16-bit grayscale PNG";
      png_error(png, error);
    }
    png_set_swap(png);
    row_bytes = static_cast<std::size_t>(w) * 2;
  } else {
    if (type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (type == PNG_COLOR_TYPE_GRAY || type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    if (type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (depth == 16) png_set_strip_16(png);
    png_set_strip_alpha(png);
    row_bytes = static_cast<std::size_t>(w) * 3;
  }
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != row_bytes) {
    error = "unexpected PNG row layout";
    png_error(png, error);
  }
  out->width = w;
  out->height = h;
  out->pixels.resize(row_bytes * static_cast<std::size_t>(h));
  rows->resize(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) (*rows)[static_cast<std::size_t>(y)] = out->pixels.data() + row_bytes * y;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  delete rows;
  return nullptr;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  if (image.width() < 1 || image.height() < 1) throw PreconditionError("cannot encode an empty image");
  std::vector<std::uint8_t> pixels(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) std::memcpy(&pixels[3 * i], image.data()[i].data(), 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * image.width() * 3;
  std::vector<std::uint8_t> out;
  if (!write_png_rows(&out, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows.data())) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Gray16Image& image) {
  if (image.width() < 1 || image.height() < 1) throw PreconditionError("cannot encode an empty image");
  std::vector<std::uint16_t> pixels = image.data();
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    rows[y] = reinterpret_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(y) * image.width());
  }
  std::vector<std::uint8_t> out;
  if (!write_png_rows(&out, image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, rows.data())) {
    throw IoError("PNG encoding failed");
  }
  return out;
}

RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes) {
  Decoded d;
  if (const char* err = decode_rows(bytes, Want::kRgb8, &d)) throw IoError(err);
  RgbImage img(d.width, d.height);
  for (std::size_t i = 0; i < img.size(); ++i) std::memcpy(img.data()[i].data(), &d.pixels[3 * i], 3);
  return img;
}

Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes) {
  Decoded d;
  if (const char* err = decode_rows(bytes, Want::kGray16, &d)) throw IoError(err);
  Gray16Image img(d.width, d.height);
  std::memcpy(img.data().data(), d.pixels.data(), d.pixels.size());
  return img;
}

Gray16Image depth_to_millimeters(const DepthImage& depth) {
  Gray16Image mm(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double d = depth.data()[i];
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    const double v = std::round(d * 1000.0);
    mm.data()[i] = static_cast<std::uint16_t>(std::min(v, 65535.0));
  }
  return mm;
}

DepthImage depth_from_millimeters(const Gray16Image& mm) {
  DepthImage depth(mm.width(), mm.height(), 0.0);
  for (std::size_t i = 0; i < mm.size(); ++i) depth.data()[i] = mm.data()[i] / 1000.0;
  return depth;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(std::span<const std::uint8_t> bytes, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_png(const RgbImage& image, const fs::path& path) { write_bytes(encode_png(image), path); }

void write_depth_png(const DepthImage& depth, const fs::path& path) {
  write_bytes(encode_png(depth_to_millimeters(depth)), path);
}

RgbImage read_png_rgb(const fs::path& path) { return decode_png_rgb(read_bytes(path)); }

DepthImage read_depth_png(const fs::path& path) {
  return depth_from_millimeters(decode_png_gray16(read_bytes(path)));
}

void write_camera_json(const CameraIntrinsics& k, const CameraPose& pose, const fs::path& path) {
  const Mat4 m = pose.world_from_camera();
  nlohmann::json j;
  j["fx"] = k.fx;
  j["fy"] = k.fy;
  j["cx"] = k.cx;
  j["cy"] = k.cy;
  j["width"] = k.width;
  j["height"] = k.height;
  auto& arr = j["world_from_camera"] = nlohmann::json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) arr.push_back(m(r, c));
  const std::string text = j.dump(2) + "\n";
  write_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), path);
}

CameraSidecar read_camera_json(const fs::path& path) {
  const auto bytes = read_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
    CameraIntrinsics k;
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<int>();
    k.height = j.at("height").get<int>();
    k.validate();
    const auto& arr = j.at("world_from_camera");
    if (!arr.is_array() || arr.size() != 16) {
      throw PreconditionError("world_from_camera must hold 16 numbers");
    }
    Mat4 m;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = arr.at(static_cast<std::size_t>(4 * r + c)).get<double>();
    return {k, CameraPose::from_world_from_camera(m)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("camera sidecar: ") + e.what(), 0, ParseError::Unit::kByteOffset);
  }
}

}  // namespace surfcomp
