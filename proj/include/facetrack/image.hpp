#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "facetrack/core.hpp"

namespace facetrack {

enum class Border { kReplicate, kReflect };

/// Interleaved 8-bit raster, 1 or 3 channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  static Image filled(int w, int h, int c, std::uint8_t value);

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(std::size_t(y) * width + x) * channels + c];
  }
  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(std::size_t(y) * width + x) * channels + c];
  }
  bool empty() const { return pixels.empty(); }
  bool operator==(const Image&) const = default;
};

/// Row-major 2x3 affine transform mapping (x, y) to
/// (m[0]x + m[1]y + m[2], m[3]x + m[4]y + m[5]).
struct Affine {
  double m[6] = {1, 0, 0, 0, 1, 0};

  static Affine identity() { return {}; }
  static Affine translation(double tx, double ty);
  static Affine rotation_about(double radians, Point2 center);
  static Affine scale_about(double s, Point2 center);
  /// Horizontal shear about the center: x' = x + shx * (y - cy).
  static Affine shear_about(double shx, Point2 center);
  /// Horizontal mirror across the image: x' = (width - 1) - x.
  static Affine hflip(int width);

  Point2 apply(Point2 p) const;
  /// Composition: result applies this first, then `next`.
  Affine then(const Affine& next) const;
  Affine inverse() const;
};

/// Bilinear sample at a real-valued location with the given border policy.
double sample_bilinear(const Image& img, double x, double y, int c, Border border);

/// Renders out_w x out_h by mapping each output pixel through `out_to_src`.
Image warp_affine(const Image& src, const Affine& out_to_src, int out_w, int out_h,
                  Border border);

// Minimal binary PPM/PGM I/O for redacted-frame output.
void write_pnm(const Image& img, const std::filesystem::path& path);
Image read_pnm(const std::filesystem::path& path);

}  // namespace facetrack
