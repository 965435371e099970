#pragma once

#include <optional>
#include <span>
#include <utility>

#include "citescope/scoring.hpp"

namespace citescope {

// Derived statistics. Any value whose denominator is zero is absent rather
// than NaN; MCC alone falls back to 0 when a factor of its denominator is
// zero, the usual convention, so grid means stay computable.
struct MetricSet {
    std::optional<double> tpr, fpr, precision, recall, f1, mcc, accuracy;
};

// TPR = TP/(TP+FN), FPR = FP/(FP+TN); absent on zero denominators.
std::pair<std::optional<double>, std::optional<double>> rates(const ConfusionCounts& c);

MetricSet derived_metrics(const ConfusionCounts& c);

struct RocPoint {
    std::optional<double> fpr, tpr;
};

// Least-squares fit of tpr = a*ln(fpr) + b; the straight line of an ROC
// scatter drawn with a log-scaled x axis.
struct LogFit {
    double a = 0.0;
    double b = 0.0;
    uint32_t n_points = 0;    // points used
    uint32_t n_excluded = 0;  // dropped for fpr <= 0 or absent values
    double residual_rms = 0.0;
    double fpr_min = 0.0;  // observed fpr range of the used points
    double fpr_max = 0.0;
};

// Absent with fewer than 2 usable points or a degenerate (single-x) set.
std::optional<LogFit> log_fit(std::span<const RocPoint> points);

// TPR ratio of the two fits at a matched FPR. Absent when fpr falls outside
// the overlap of the fits' observed ranges or the baseline value is <= 0.
std::optional<double> uplift_at(const LogFit& fit_alg, const LogFit& fit_base, double fpr);

}  // namespace citescope
