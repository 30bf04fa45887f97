#pragma once

#include <vector>

#include "manivar/manifold.hpp"

namespace manivar {

/// An n1 x n2 image of points on one manifold, stored row-major: pixel
/// (i1, i2) has index i1 * n2 + i2. The x-direction is i1, the y-direction i2.
class ManifoldImage {
 public:
  ManifoldImage() = default;
  /// Validates the pixel count and every pixel.
  ManifoldImage(ManifoldPtr manifold, int n1, int n2, std::vector<Point> pixels);
  static ManifoldImage constant(ManifoldPtr manifold, int n1, int n2, const Point& value);

  const Manifold& manifold() const { return *manifold_; }
  const ManifoldPtr& manifold_ptr() const { return manifold_; }
  const ManifoldTag& tag() const { return manifold_->tag(); }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  std::size_t size() const { return pixels_.size(); }
  std::size_t index(int i1, int i2) const { return static_cast<std::size_t>(i1) * n2_ + i2; }
  bool contains(int i1, int i2) const { return i1 >= 0 && i1 < n1_ && i2 >= 0 && i2 < n2_; }

  const Point& operator[](std::size_t i) const { return pixels_[i]; }
  Point& operator[](std::size_t i) { return pixels_[i]; }
  const std::vector<Point>& pixels() const { return pixels_; }
  std::vector<Point>& mutable_pixels() { return pixels_; }

  /// Throws std::invalid_argument unless `other` has the same tag and shape.
  void require_compatible(const ManifoldImage& other, const char* what) const;

 private:
  ManifoldPtr manifold_;
  int n1_ = 0;
  int n2_ = 0;
  std::vector<Point> pixels_;
};

/// Two tangent vectors per pixel, based at the pixels of `base`
/// (x-component and y-component), stored as tangent coordinates.
struct TangentField {
  ManifoldImage base;
  std::vector<Vec> x;
  std::vector<Vec> y;

  static TangentField zeros(const ManifoldImage& base);
};

}  // namespace manivar
