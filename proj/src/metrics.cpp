#include "citescope/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace citescope {

namespace {

std::optional<double> ratio(uint64_t num, uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::pair<std::optional<double>, std::optional<double>> rates(const ConfusionCounts& c) {
    return {ratio(c.tp, c.tp + c.fn), ratio(c.fp, c.fp + c.tn)};
}

MetricSet derived_metrics(const ConfusionCounts& c) {
    MetricSet m;
    auto [tpr, fpr] = rates(c);
    m.tpr = tpr;
    m.fpr = fpr;
    m.recall = tpr;
    m.precision = ratio(c.tp, c.tp + c.fp);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0)
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    m.accuracy = ratio(c.tp + c.tn, c.total());

    const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (c.total() > 0) m.mcc = denom == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(denom);
    return m;
}

std::optional<LogFit> log_fit(std::span<const RocPoint> points) {
    std::vector<std::pair<double, double>> usable;  // (ln fpr, tpr)
    uint32_t excluded = 0;
    double fmin = 0.0, fmax = 0.0;
    for (const RocPoint& p : points) {
        if (!p.fpr || !p.tpr || *p.fpr <= 0.0) {
            ++excluded;
            continue;
        }
        if (usable.empty()) {
            fmin = fmax = *p.fpr;
        } else {
            fmin = std::min(fmin, *p.fpr);
            fmax = std::max(fmax, *p.fpr);
        }
        usable.emplace_back(std::log(*p.fpr), *p.tpr);
    }
    if (usable.size() < 2) return std::nullopt;

    const double n = static_cast<double>(usable.size());
    double sx = 0, sy = 0;
    for (auto& [x, y] : usable) {
        sx += x;
        sy += y;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (auto& [x, y] : usable) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) return std::nullopt;  // all points share one fpr

    LogFit fit;
    fit.a = sxy / sxx;
    fit.b = my - fit.a * mx;
    fit.n_points = static_cast<uint32_t>(usable.size());
    fit.n_excluded = excluded;
    fit.fpr_min = fmin;
    fit.fpr_max = fmax;
    double ss = 0;
    for (auto& [x, y] : usable) {
        const double r = y - (fit.a * x + fit.b);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / n);
    return fit;
}

std::optional<double> uplift_at(const LogFit& fit_alg, const LogFit& fit_base, double fpr) {
    const double lo = std::max(fit_alg.fpr_min, fit_base.fpr_min);
    const double hi = std::min(fit_alg.fpr_max, fit_base.fpr_max);
    if (!(fpr >= lo && fpr <= hi)) return std::nullopt;
    const double x = std::log(fpr);
    const double base = fit_base.a * x + fit_base.b;
    if (base <= 0.0) return std::nullopt;
    return (fit_alg.a * x + fit_alg.b) / base;
}

}  // namespace citescope
