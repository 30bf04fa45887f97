#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace manivar {

/// Base class for failures of the geometric calculus (as opposed to bad
/// arguments, which raise std::invalid_argument).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The second argument of a log/geodesic lies in the cut locus of the first.
/// `index` carries the pixel (or term) index when raised from image code,
/// `step` names the sub-step of a composite construction (e.g. a ladder).
class CutLocusError : public GeometryError {
 public:
  explicit CutLocusError(const std::string& what,
                         std::optional<std::size_t> index = std::nullopt,
                         std::string step = {})
      : GeometryError(what), index_(index), step_(std::move(step)) {}

  const std::optional<std::size_t>& index() const { return index_; }
  const std::string& step() const { return step_; }

  CutLocusError with_index(std::size_t index) const {
    return CutLocusError(std::string(what()) + " (at index " + std::to_string(index) + ")",
                         index, step_);
  }
  CutLocusError with_step(const std::string& step) const {
    return CutLocusError(std::string(what()) + " [" + step + "]", index_, step);
  }

 private:
  std::optional<std::size_t> index_;
  std::string step_;
};

/// A geodesic frame was requested for two coincident points.
class DegenerateGeodesicError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// A Jacobi coefficient hit a pole of its trigonometric quotient.
class SingularCoefficientError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// An iterative method failed to reach its tolerance within its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace manivar
