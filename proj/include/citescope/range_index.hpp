#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "citescope/article.hpp"

namespace citescope {

// Exact closed-ball range queries over a fixed point set. Backed by a
// kd-tree on the normalized coordinates; results are always identical to a
// brute-force linear scan with distance(), including boundary points.
// Immutable after construction and safe for concurrent queries.
class RangeIndex {
public:
    RangeIndex() = default;

    // Points are copied and normalized once at build time.
    static RangeIndex build(const std::vector<std::vector<float>>& points, uint32_t dim,
                            MetricKind metric);
    static RangeIndex build(const TestView& view);

    // Indices of all points with distance(point, center) <= eps, ascending.
    std::vector<uint32_t> query(std::span<const float> center, double eps) const;

    std::vector<uint32_t> query(const std::vector<float>& center, double eps) const {
        return query(std::span<const float>(center), eps);
    }

    // Same ball query against a point already in the index.
    std::vector<uint32_t> query_point(uint32_t point_index, double eps) const;

    size_t size() const { return count_; }
    uint32_t dim() const { return dim_; }
    MetricKind metric() const { return metric_; }

    // Process-wide build counter; lets tests observe index reuse.
    static uint64_t builds();

private:
    struct Node {
        uint32_t begin = 0, end = 0;   // leaf range into order_
        int32_t left = -1, right = -1;  // children, -1 for leaf
        uint32_t split_dim = 0;
        double split_val = 0.0;
    };

    void query_normed(const double* center, double eps, std::vector<uint32_t>& out) const;
    int32_t build_node(uint32_t begin, uint32_t end, std::vector<double>& mins,
                       std::vector<double>& maxs);
    const double* point(uint32_t i) const { return normed_.data() + size_t(i) * dim_; }

    uint32_t dim_ = 0;
    size_t count_ = 0;
    MetricKind metric_ = MetricKind::EuclideanOnUnitNorm;
    std::vector<double> normed_;    // count * dim, normalized, original order
    std::vector<uint32_t> order_;   // kd-tree permutation of point indices
    std::vector<Node> nodes_;
    int32_t root_ = -1;
};

}  // namespace citescope
