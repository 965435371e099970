#include "citescope/metric.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace citescope {

void normalize_l2(std::span<const float> in, std::span<double> out) {
    double ss = 0.0;
    for (size_t i = 0; i < in.size(); ++i) {
        const double v = in[i];
        if (!std::isfinite(v)) throw std::domain_error("non-finite coordinate");
        ss += v * v;
        out[i] = v;
    }
    const double norm = std::sqrt(ss);
    if (norm == 0.0) throw std::domain_error("zero vector under a normalizing metric");
    for (size_t i = 0; i < out.size(); ++i) out[i] /= norm;
}

double normed_distance(const double* a, const double* b, size_t dim, MetricKind metric) {
    if (metric == MetricKind::EuclideanOnUnitNorm) {
        double ss = 0.0;
        for (size_t i = 0; i < dim; ++i) {
            const double d = a[i] - b[i];
            ss += d * d;
        }
        return std::sqrt(ss);
    }
    double dot = 0.0;
    for (size_t i = 0; i < dim; ++i) dot += a[i] * b[i];
    // Rounding can push the self-similarity of a unit vector a hair past 1.
    return std::max(0.0, 1.0 - dot);
}

double distance(std::span<const float> a, std::span<const float> b, MetricKind metric) {
    if (a.size() != b.size()) throw std::invalid_argument("distance: dimension mismatch");
    std::vector<double> an(a.size()), bn(b.size());
    normalize_l2(a, an);
    normalize_l2(b, bn);
    return normed_distance(an.data(), bn.data(), a.size(), metric);
}

}  // namespace citescope
