#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "surfcomp/render/camera.hpp"
#include "surfcomp/render/image.hpp"

namespace surfcomp {

using Gray16Image = Image<std::uint16_t>;

std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png(const Gray16Image& image);
RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes);
Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes);

/// Millimeter quantization: round(depth * 1000), 0 stays invalid, saturates at 65535.
Gray16Image depth_to_millimeters(const DepthImage& depth);
DepthImage depth_from_millimeters(const Gray16Image& mm);

void write_png(const RgbImage& image, const std::filesystem::path& path);
void write_depth_png(const DepthImage& depth, const std::filesystem::path& path);
RgbImage read_png_rgb(const std::filesystem::path& path);
DepthImage read_depth_png(const std::filesystem::path& path);

/// Camera sidecar JSON: {fx, fy, cx, cy, width, height, world_from_camera}
/// where world_from_camera is 16 row-major numbers.
struct CameraSidecar {
  CameraIntrinsics intrinsics;
  CameraPose pose;
};
void write_camera_json(const CameraIntrinsics& k, const CameraPose& pose,
                       const std::filesystem::path& path);
CameraSidecar read_camera_json(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);

}  // namespace surfcomp
