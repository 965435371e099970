#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "citescope/article.hpp"
#include "citescope/range_index.hpp"

namespace citescope {

enum class ScoreMethod : uint8_t { Naive, ClusterAware };

std::string_view to_string(ScoreMethod m);

struct ScoringParams {
    double eps = 0.035;
    double top_p = 15.0;  // percentile cutoff in (0, 100]
    int horizon_months = 24;
    ScoreMethod method = ScoreMethod::ClusterAware;
};

struct MonthTargetRow {
    Month month;
    uint32_t n_articles = 0;  // articles published that month
    uint32_t n_cited = 0;     // of which citation-bearing
    uint32_t n_targets = 0;
    int64_t threshold = -1;   // citations of the last selected target, -1 if none
};

struct TargetFlags {
    std::vector<char> is_target;  // by test-view index
    std::vector<MonthTargetRow> months;
    uint32_t total_targets = 0;
};

// Per calendar month, targets are the top ceil(P/100 * n) citation-bearing
// articles by citations, ties broken by ascending id; n counts the month's
// citation-bearing articles. Articles without citation data are never
// targets.
TargetFlags select_targets(const TestView& test, double top_p);

enum class Label : uint8_t { TP, FP, FN, TN };

struct ConfusionCounts {
    uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::vector<Label> labels;  // by test-view index

    uint64_t total() const { return tp + fp + fn + tn; }
};

struct PredictionSet {
    Month cutoff;
    uint32_t dim = 0;
    std::vector<std::vector<float>> coords;
    std::string predictor_tag;
    std::vector<std::string> warnings;

    size_t size() const { return coords.size(); }
};

// Per-article rule: a covered target is TP, a covered non-target FP, an
// uncovered target FN, everything else TN. Coverage = within eps of at
// least one prediction (closed ball).
ConfusionCounts score_naive(const PredictionSet& preds, const TestView& test,
                            const TargetFlags& targets, double eps,
                            const RangeIndex* shared_index = nullptr);

// Cluster-aware rule. Covered articles: TP when a target, or when some
// target shares a prediction ball and was published strictly earlier;
// otherwise FP. Uncovered articles: FN when a target, or when within eps of
// an uncovered target published strictly earlier; otherwise TN. Coverage is
// decided first, so a covered article is never FN.
ConfusionCounts score_cluster(const PredictionSet& preds, const TestView& test,
                              const TargetFlags& targets, double eps,
                              const RangeIndex* shared_index = nullptr);

// Ratio of TP amplification to FN amplification between the cluster-aware
// and naive counts: (cluster.tp/naive.tp) / (cluster.fn/naive.fn). Absent
// when a denominator is zero; never NaN.
std::optional<double> cluster_amplification(const ConfusionCounts& cluster,
                                            const ConfusionCounts& naive);

}  // namespace citescope
