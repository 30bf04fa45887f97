#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace manivar {

/// Number of worker threads used by parallel_for (default 1).
int worker_count();
void set_worker_count(int n);

/// Runs body(i) for i in [0, n), split into contiguous chunks across the
/// workers. The body must only write to state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (tree) summation; the result depends only on the values and
/// their order, not on the worker count.
double pairwise_sum(const double* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace manivar
