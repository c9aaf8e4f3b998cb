#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace surfcomp {

/// Row-major 2D grid; pixel (u, v) is column u, row v.
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width_ && v < height_; }

  T& at(int u, int v) { return data_[index(u, v)]; }
  const T& at(int u, int v) const { return data_[index(u, v)]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Rgb8 = std::array<std::uint8_t, 3>;
using RgbImage = Image<Rgb8>;

/// Per-pixel camera-frame Z in meters (or BEV height); 0 means no surface.
using DepthImage = Image<double>;

}  // namespace surfcomp
