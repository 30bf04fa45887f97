#include "manivar/image.hpp"

#include <stdexcept>
#include <string>

namespace manivar {

ManifoldImage::ManifoldImage(ManifoldPtr manifold, int n1, int n2, std::vector<Point> pixels)
    : manifold_(std::move(manifold)), n1_(n1), n2_(n2), pixels_(std::move(pixels)) {
  if (!manifold_) throw std::invalid_argument("image: missing manifold");
  if (n1 <= 0 || n2 <= 0) throw std::invalid_argument("image: dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(n1) * n2)
    throw std::invalid_argument("image: pixel count does not match " + std::to_string(n1) + "x" +
                                std::to_string(n2));
  for (std::size_t i = 0; i < pixels_.size(); ++i) {
    try {
      check_point(*manifold_, pixels_[i]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("image pixel " + std::to_string(i) + ": " + e.what());
    }
  }
}

ManifoldImage ManifoldImage::constant(ManifoldPtr manifold, int n1, int n2, const Point& value) {
  std::size_t n = static_cast<std::size_t>(std::max(n1, 0)) * static_cast<std::size_t>(std::max(n2, 0));
  return ManifoldImage(std::move(manifold), n1, n2, std::vector<Point>(n, value));
}

void ManifoldImage::require_compatible(const ManifoldImage& other, const char* what) const {
  if (!(tag() == other.tag()))
    throw std::invalid_argument(std::string(what) + ": manifold tags differ (" + tag().to_string() +
                                " vs " + other.tag().to_string() + ")");
  if (n1_ != other.n1_ || n2_ != other.n2_)
    throw std::invalid_argument(std::string(what) + ": image shapes differ");
}

TangentField TangentField::zeros(const ManifoldImage& base) {
  Vec z = base.manifold().zero_tangent();
  return {base, std::vector<Vec>(base.size(), z), std::vector<Vec>(base.size(), z)};
}

}  // namespace manivar
