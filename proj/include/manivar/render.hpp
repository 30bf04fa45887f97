#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "manivar/image.hpp"

namespace manivar {

struct RenderOptions {
  /// Output pixels per image pixel (S1, S2, Euclidean) or glyph cell size (SPD).
  int scale = 4;
  int glyph_cell = 16;
};

/// 8-bit RGB raster, row-major; image row i1 becomes raster rows.
struct RgbRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t k = 3 * (static_cast<std::size_t>(y) * width + x);
    return {rgb[k], rgb[k + 1], rgb[k + 2]};
  }
};

/// S1: hue wheel with angle -pi at red. S2: (v + 1) / 2 * 255 per channel, so
/// the north pole is (128, 128, 255). SPD: ellipse glyphs of the leading 2 x 2
/// block, axes scaled by the largest eigenvalue in the image and colored by
/// the direction of the major axis. Euclidean: grayscale of the coordinate
/// norm, min-max normalized. Other manifolds throw std::invalid_argument.
RgbRaster rasterize(const ManifoldImage& u, const RenderOptions& options = {});

/// Writes rasterize(u) as an 8-bit RGB PNG without time or text chunks, so
/// the bytes depend only on the image.
void render_png(const ManifoldImage& u, const std::string& path,
                const RenderOptions& options = {});

}  // namespace manivar
