#pragma once

#include <span>
#include <vector>

#include "citescope/article.hpp"

namespace citescope {

// L2-normalizes in into out (double precision). Throws std::domain_error on
// zero or non-finite input; every metric here normalizes, so a zero vector
// has no defined direction.
void normalize_l2(std::span<const float> in, std::span<double> out);

// Distance between normalized a and b under the metric. Symmetric,
// non-negative, zero iff the normalized inputs are equal.
double distance(std::span<const float> a, std::span<const float> b, MetricKind metric);

inline double distance(const std::vector<float>& a, const std::vector<float>& b,
                       MetricKind metric) {
    return distance(std::span<const float>(a), std::span<const float>(b), metric);
}

// Distance on already-normalized double vectors. The range index stores
// normalized points and funnels every candidate check through this, so index
// results and a brute-force scan over distance() agree bit for bit.
double normed_distance(const double* a, const double* b, size_t dim, MetricKind metric);

}  // namespace citescope
