#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "manivar/image.hpp"
#include "manivar/solvers.hpp"

namespace manivar {

// MVD1 text format:
//   MVD1
//   <tag expression>
//   <n1> <n2>
//   then n1 * n2 lines, one pixel each: its chart coordinates, %.17g.
void write_mvd(std::ostream& out, const ManifoldImage& u);
void write_mvd(const std::string& path, const ManifoldImage& u);
/// Throws std::invalid_argument on malformed input or invalid points.
ManifoldImage read_mvd(std::istream& in);
ManifoldImage read_mvd(const std::string& path);

/// CSV with header "iteration,objective,change".
void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace);

enum class PhantomKind { S1Blocks, S2Patches, SPDGradient };
PhantomKind parse_phantom(const std::string& name);

/// Deterministic test images built from constant blocks and geodesic ramps.
ManifoldImage phantom(PhantomKind kind, int n1, int n2);

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Per pixel: exp of a Gaussian tangent vector with standard deviation sigma
/// per coordinate of the orthonormal tangent basis. Pixels are drawn in index
/// order from one std::mt19937_64 stream.
ManifoldImage add_noise(const ManifoldImage& u, const NoiseSpec& spec);

/// (1 / |G|) sum_i dist^2(u_i, v_i).
double mse(const ManifoldImage& u, const ManifoldImage& v);

}  // namespace manivar
