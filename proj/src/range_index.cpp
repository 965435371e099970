#include "citescope/range_index.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "citescope/metric.hpp"

namespace citescope {

namespace {

constexpr uint32_t kLeafSize = 16;
// Pruning slack: traversal bounds stay conservative so no candidate that the
// exact per-point check would accept is ever pruned. The absolute term
// absorbs normalization rounding, which under the cosine metric can leave a
// zero-distance pair ~1e-7 apart in L2.
constexpr double kRelSlack = 1e-9;
constexpr double kAbsSlack = 1e-6;

std::atomic<uint64_t> g_builds{0};

}  // namespace

uint64_t RangeIndex::builds() { return g_builds.load(std::memory_order_relaxed); }

RangeIndex RangeIndex::build(const std::vector<std::vector<float>>& points, uint32_t dim,
                             MetricKind metric) {
    RangeIndex idx;
    idx.dim_ = dim;
    idx.metric_ = metric;
    idx.count_ = points.size();
    idx.normed_.resize(points.size() * size_t(dim));
    for (size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != dim) throw std::invalid_argument("range index: dimension mismatch");
        normalize_l2(points[i], std::span<double>(idx.normed_.data() + i * dim, dim));
    }
    idx.order_.resize(points.size());
    for (uint32_t i = 0; i < points.size(); ++i) idx.order_[i] = i;
    if (!points.empty()) {
        std::vector<double> mins(dim), maxs(dim);
        idx.root_ = idx.build_node(0, static_cast<uint32_t>(points.size()), mins, maxs);
    }
    g_builds.fetch_add(1, std::memory_order_relaxed);
    return idx;
}

RangeIndex RangeIndex::build(const TestView& view) {
    std::vector<std::vector<float>> pts;
    pts.reserve(view.size());
    for (size_t i = 0; i < view.size(); ++i) pts.push_back(view.at(i).coords);
    return build(pts, view.dim(), view.metric());
}

int32_t RangeIndex::build_node(uint32_t begin, uint32_t end, std::vector<double>& mins,
                               std::vector<double>& maxs) {
    Node node;
    node.begin = begin;
    node.end = end;

    if (end - begin > kLeafSize) {
        for (uint32_t d = 0; d < dim_; ++d) {
            mins[d] = point(order_[begin])[d];
            maxs[d] = mins[d];
        }
        for (uint32_t i = begin + 1; i < end; ++i) {
            const double* p = point(order_[i]);
            for (uint32_t d = 0; d < dim_; ++d) {
                mins[d] = std::min(mins[d], p[d]);
                maxs[d] = std::max(maxs[d], p[d]);
            }
        }
        uint32_t widest = 0;
        double width = -1.0;
        for (uint32_t d = 0; d < dim_; ++d) {
            if (maxs[d] - mins[d] > width) {
                width = maxs[d] - mins[d];
                widest = d;
            }
        }
        if (width > 0.0) {
            const uint32_t mid = begin + (end - begin) / 2;
            std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                             [&](uint32_t a, uint32_t b) {
                                 const double av = point(a)[widest], bv = point(b)[widest];
                                 if (av != bv) return av < bv;
                                 return a < b;  // stable tie-break for determinism
                             });
            node.split_dim = widest;
            node.split_val = point(order_[mid])[widest];
            const int32_t self = static_cast<int32_t>(nodes_.size());
            nodes_.push_back(node);
            const int32_t left = build_node(begin, mid, mins, maxs);
            const int32_t right = build_node(mid, end, mins, maxs);
            nodes_[self].left = left;
            nodes_[self].right = right;
            return self;
        }
        // All points identical along every axis: keep as one leaf.
    }

    const int32_t self = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(node);
    return self;
}

void RangeIndex::query_normed(const double* center, double eps, std::vector<uint32_t>& out) const {
    if (root_ < 0) return;

    // The tree partitions on normalized coordinates, so traversal bounds are
    // Euclidean even under the cosine metric: cos distance <= eps on unit
    // vectors is an L2 ball of radius sqrt(2*eps).
    const double l2_radius = metric_ == MetricKind::EuclideanOnUnitNorm
                                 ? eps
                                 : std::sqrt(std::max(0.0, 2.0 * eps));
    const double bound = l2_radius * (1.0 + kRelSlack) + kAbsSlack;

    std::vector<int32_t> stack;
    stack.push_back(root_);

    while (!stack.empty()) {
        const Node& n = nodes_[static_cast<size_t>(stack.back())];
        stack.pop_back();
        if (n.left < 0) {
            for (uint32_t i = n.begin; i < n.end; ++i) {
                const uint32_t pi = order_[i];
                if (normed_distance(point(pi), center, dim_, metric_) <= eps) out.push_back(pi);
            }
            continue;
        }
        const double delta = center[n.split_dim] - n.split_val;
        // Points left of the split have coordinate <= split_val, the right
        // side >= split_val, so a one-axis gap beyond the ball radius prunes
        // the far child.
        const int32_t near = delta < 0.0 ? n.left : n.right;
        const int32_t far = delta < 0.0 ? n.right : n.left;
        stack.push_back(near);
        if (std::abs(delta) <= bound) stack.push_back(far);
    }
}

std::vector<uint32_t> RangeIndex::query(std::span<const float> center, double eps) const {
    if (center.size() != dim_) throw std::invalid_argument("range query: dimension mismatch");
    if (eps < 0) throw std::invalid_argument("range query: negative radius");
    std::vector<uint32_t> out;
    if (count_ == 0) return out;
    std::vector<double> c(dim_);
    normalize_l2(center, c);
    query_normed(c.data(), eps, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<uint32_t> RangeIndex::query_point(uint32_t point_index, double eps) const {
    if (point_index >= count_) throw std::out_of_range("range query: point index out of range");
    std::vector<uint32_t> out;
    query_normed(point(point_index), eps, out);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace citescope
