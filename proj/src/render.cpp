#include "manivar/render.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace manivar {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

std::uint8_t channel(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

// Fully saturated hue, h in [0, 1).
Rgb hue(double h) {
  h = h - std::floor(h);
  const double x = 6.0 * h;
  const int sector = std::min(static_cast<int>(x), 5);
  const double f = x - sector;
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = 1, g = f; break;
    case 1: r = 1 - f, g = 1; break;
    case 2: g = 1, b = f; break;
    case 3: g = 1 - f, b = 1; break;
    case 4: r = f, b = 1; break;
    default: r = 1, b = 1 - f; break;
  }
  return {channel(r), channel(g), channel(b)};
}

void fill_cell(RgbRaster& out, int row, int col, int scale, const Rgb& c) {
  for (int y = row * scale; y < (row + 1) * scale; ++y)
    for (int x = col * scale; x < (col + 1) * scale; ++x) {
      const std::size_t k = 3 * (static_cast<std::size_t>(y) * out.width + x);
      out.rgb[k] = c[0];
      out.rgb[k + 1] = c[1];
      out.rgb[k + 2] = c[2];
    }
}

RgbRaster blank(int width, int height, std::uint8_t v) {
  RgbRaster r;
  r.width = width;
  r.height = height;
  r.rgb.assign(3 * static_cast<std::size_t>(width) * height, v);
  return r;
}

Eigen::Matrix2d leading_block(const Point& p, int d) {
  Eigen::Matrix2d a;
  a << p.coords[0], p.coords[1], p.coords[d], p.coords[d + 1];
  return a;
}

RgbRaster glyphs(const ManifoldImage& u, int d, int cell) {
  RgbRaster out = blank(u.n2() * cell, u.n1() * cell, 255);
  double lmax = 0.0;
  for (const Point& p : u.pixels()) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(leading_block(p, d));
    lmax = std::max(lmax, es.eigenvalues()[1]);
  }
  const double radius = 0.5 * cell - 0.5;
  for (int i1 = 0; i1 < u.n1(); ++i1)
    for (int i2 = 0; i2 < u.n2(); ++i2) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(leading_block(u[u.index(i1, i2)], d));
      const Eigen::Vector2d axes =
          (es.eigenvalues() / lmax * radius).cwiseMax(0.5);
      const Eigen::Vector2d major = es.eigenvectors().col(1);
      // Major axis direction modulo pi mapped onto the hue wheel.
      const Rgb color = hue(std::atan2(major[1], major[0]) / std::numbers::pi);
      const double cx = (i2 + 0.5) * cell, cy = (i1 + 0.5) * cell;
      for (int y = i1 * cell; y < (i1 + 1) * cell; ++y)
        for (int x = i2 * cell; x < (i2 + 1) * cell; ++x) {
          const Eigen::Vector2d v(x + 0.5 - cx, y + 0.5 - cy);
          const double a = v.dot(es.eigenvectors().col(1)) / axes[1];
          const double b = v.dot(es.eigenvectors().col(0)) / axes[0];
          if (a * a + b * b > 1.0) continue;
          const std::size_t k = 3 * (static_cast<std::size_t>(y) * out.width + x);
          out.rgb[k] = color[0];
          out.rgb[k + 1] = color[1];
          out.rgb[k + 2] = color[2];
        }
    }
  return out;
}

}  // namespace

RgbRaster rasterize(const ManifoldImage& u, const RenderOptions& options) {
  if (options.scale < 1 || options.glyph_cell < 4)
    throw std::invalid_argument("render: scale must be >= 1 and glyph_cell >= 4");
  const ManifoldTag& tag = u.tag();
  const int s = options.scale;
  switch (tag.kind) {
    case ManifoldTag::Kind::SPD:
      return glyphs(u, tag.size, options.glyph_cell);
    case ManifoldTag::Kind::Circle: {
      RgbRaster out = blank(u.n2() * s, u.n1() * s, 0);
      for (int i1 = 0; i1 < u.n1(); ++i1)
        for (int i2 = 0; i2 < u.n2(); ++i2) {
          const double a = u[u.index(i1, i2)].coords[0];
          fill_cell(out, i1, i2, s, hue((a + std::numbers::pi) / (2.0 * std::numbers::pi)));
        }
      return out;
    }
    case ManifoldTag::Kind::Sphere2: {
      RgbRaster out = blank(u.n2() * s, u.n1() * s, 0);
      for (int i1 = 0; i1 < u.n1(); ++i1)
        for (int i2 = 0; i2 < u.n2(); ++i2) {
          const Vec& v = u[u.index(i1, i2)].coords;
          fill_cell(out, i1, i2, s,
                    {channel((v[0] + 1) / 2), channel((v[1] + 1) / 2), channel((v[2] + 1) / 2)});
        }
      return out;
    }
    case ManifoldTag::Kind::Euclidean: {
      RgbRaster out = blank(u.n2() * s, u.n1() * s, 0);
      double lo = INFINITY, hi = -INFINITY;
      for (const Point& p : u.pixels()) {
        const double v = tag.size == 1 ? p.coords[0] : p.coords.norm();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      for (int i1 = 0; i1 < u.n1(); ++i1)
        for (int i2 = 0; i2 < u.n2(); ++i2) {
          const Point& p = u[u.index(i1, i2)];
          const double v = tag.size == 1 ? p.coords[0] : p.coords.norm();
          const std::uint8_t g = channel(hi > lo ? (v - lo) / (hi - lo) : 0.5);
          fill_cell(out, i1, i2, s, {g, g, g});
        }
      return out;
    }
    default:
      throw std::invalid_argument("render: no color mapping for " + tag.to_string());
  }
}

void render_png(const ManifoldImage& u, const std::string& path, const RenderOptions& options) {
  const RgbRaster r = rasterize(u, options);
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw std::runtime_error("render: cannot open " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("render: libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("render: libpng failed writing " + path);
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 9);
  png_set_IHDR(png, info, static_cast<png_uint_32>(r.width), static_cast<png_uint_32>(r.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < r.height; ++y)
    png_write_row(png, r.rgb.data() + 3 * static_cast<std::size_t>(y) * r.width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace manivar
