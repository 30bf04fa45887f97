#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace manivar {

/// Describes which manifold a point lives on.
///
/// Textual form (used by the MVD1 file header and the CLI):
///   R(m)  S1  S2  SPD(d)  SO3  Product(A,B,...)  Power(A,n)
struct ManifoldTag {
  enum class Kind { Euclidean, Circle, Sphere2, SPD, Rotations3, Product, Power };

  Kind kind = Kind::Euclidean;
  // Euclidean: m, SPD: d, Power: n. Unused otherwise.
  int size = 1;
  // Product: the factors. Power: exactly one element.
  std::vector<ManifoldTag> children;

  static ManifoldTag euclidean(int m);
  static ManifoldTag circle();
  static ManifoldTag sphere2();
  static ManifoldTag spd(int d);
  static ManifoldTag rotations3();
  static ManifoldTag product(std::vector<ManifoldTag> factors);
  static ManifoldTag power(ManifoldTag base, int n);

  /// Throws std::invalid_argument if the tag violates its invariants.
  void validate() const;

  std::string to_string() const;
  static ManifoldTag parse(std::string_view text);

  bool operator==(const ManifoldTag&) const = default;
};

}  // namespace manivar
