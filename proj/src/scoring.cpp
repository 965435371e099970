#include "citescope/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace citescope {

std::string_view to_string(ScoreMethod m) {
    return m == ScoreMethod::Naive ? "naive" : "cluster";
}

TargetFlags select_targets(const TestView& test, double top_p) {
    if (!(top_p > 0.0) || top_p > 100.0)
        throw std::invalid_argument("top_p must be in (0, 100]");

    TargetFlags out;
    out.is_target.assign(test.size(), 0);

    // Group test indices by calendar month. The view is date-sorted, so
    // months form contiguous runs.
    std::map<Month, std::vector<uint32_t>> by_month;
    for (size_t i = 0; i < test.size(); ++i)
        by_month[test.at(i).published.month_of()].push_back(static_cast<uint32_t>(i));

    for (auto& [month, idxs] : by_month) {
        MonthTargetRow row;
        row.month = month;
        row.n_articles = static_cast<uint32_t>(idxs.size());

        std::vector<uint32_t> cited;
        for (uint32_t i : idxs)
            if (test.at(i).has_citation_data) cited.push_back(i);
        row.n_cited = static_cast<uint32_t>(cited.size());

        if (!cited.empty()) {
            // ceil(top_p * n / 100); multiply first so integral percentiles
            // stay exact in floating point.
            const auto quota = static_cast<uint32_t>(
                std::ceil(top_p * static_cast<double>(cited.size()) / 100.0));
            row.n_targets = std::min<uint32_t>(quota, row.n_cited);

            std::sort(cited.begin(), cited.end(), [&](uint32_t a, uint32_t b) {
                const Article& x = test.at(a);
                const Article& y = test.at(b);
                if (x.citations != y.citations) return x.citations > y.citations;
                return x.id < y.id;
            });
            for (uint32_t k = 0; k < row.n_targets; ++k) out.is_target[cited[k]] = 1;
            if (row.n_targets > 0) row.threshold = test.at(cited[row.n_targets - 1]).citations;
        }

        out.total_targets += row.n_targets;
        out.months.push_back(row);
    }
    return out;
}

namespace {

void check_predictions(const PredictionSet& preds, const TestView& test) {
    for (const auto& c : preds.coords)
        if (c.size() != test.dim())
            throw std::invalid_argument("prediction dimension " + std::to_string(c.size()) +
                                        " != corpus dim " + std::to_string(test.dim()));
}

ConfusionCounts tally(const std::vector<Label>& labels) {
    ConfusionCounts c;
    for (Label l : labels) switch (l) {
            case Label::TP: ++c.tp; break;
            case Label::FP: ++c.fp; break;
            case Label::FN: ++c.fn; break;
            case Label::TN: ++c.tn; break;
        }
    c.labels = labels;
    return c;
}

}  // namespace

ConfusionCounts score_naive(const PredictionSet& preds, const TestView& test,
                            const TargetFlags& targets, double eps,
                            const RangeIndex* shared_index) {
    check_predictions(preds, test);
    if (targets.is_target.size() != test.size())
        throw std::invalid_argument("target flags do not match test view");

    RangeIndex local;
    const RangeIndex* index = shared_index;
    if (!index && !test.empty() && !preds.coords.empty()) {
        local = RangeIndex::build(test);
        index = &local;
    }

    std::vector<char> covered(test.size(), 0);
    if (index)
        for (const auto& p : preds.coords)
            for (uint32_t i : index->query(p, eps)) covered[i] = 1;

    std::vector<Label> labels(test.size());
    for (size_t i = 0; i < test.size(); ++i) {
        const bool target = targets.is_target[i] != 0;
        if (covered[i])
            labels[i] = target ? Label::TP : Label::FP;
        else
            labels[i] = target ? Label::FN : Label::TN;
    }
    return tally(labels);
}

ConfusionCounts score_cluster(const PredictionSet& preds, const TestView& test,
                              const TargetFlags& targets, double eps,
                              const RangeIndex* shared_index) {
    check_predictions(preds, test);
    if (targets.is_target.size() != test.size())
        throw std::invalid_argument("target flags do not match test view");

    RangeIndex local;
    const RangeIndex* index = shared_index;
    if (!index && !test.empty()) {
        local = RangeIndex::build(test);
        index = &local;
    }

    const size_t n = test.size();
    std::vector<char> covered(n, 0);
    std::vector<char> tp_extended(n, 0);
    std::vector<char> fn_extended(n, 0);

    // Prediction balls: coverage, then the posterior-to-a-target extension.
    // An article strictly later than any target in the same ball inherits TP
    // eligibility, so only the earliest target date per ball matters.
    std::vector<std::vector<uint32_t>> balls;
    balls.reserve(preds.coords.size());
    if (index && n > 0) {
        for (const auto& p : preds.coords) {
            balls.push_back(index->query(p, eps));
            for (uint32_t i : balls.back()) covered[i] = 1;
        }
    }
    for (const auto& ball : balls) {
        bool has_target = false;
        Date earliest{};
        for (uint32_t i : ball) {
            if (!targets.is_target[i]) continue;
            const Date d = test.at(i).published;
            if (!has_target || d < earliest) {
                earliest = d;
                has_target = true;
            }
        }
        if (!has_target) continue;
        for (uint32_t i : ball)
            if (earliest < test.at(i).published) tp_extended[i] = 1;
    }

    // Uncovered targets seed the symmetric FN extension: strictly later,
    // themselves-uncovered articles within eps of the target.
    if (index) {
        for (size_t t = 0; t < n; ++t) {
            if (!targets.is_target[t] || covered[t]) continue;
            const Date td = test.at(t).published;
            for (uint32_t i : index->query_point(static_cast<uint32_t>(t), eps)) {
                if (covered[i]) continue;
                if (td < test.at(i).published) fn_extended[i] = 1;
            }
        }
    }

    std::vector<Label> labels(n);
    for (size_t i = 0; i < n; ++i) {
        const bool target = targets.is_target[i] != 0;
        if (covered[i])
            labels[i] = (target || tp_extended[i]) ? Label::TP : Label::FP;
        else
            labels[i] = (target || fn_extended[i]) ? Label::FN : Label::TN;
    }
    return tally(labels);
}

std::optional<double> cluster_amplification(const ConfusionCounts& cluster,
                                            const ConfusionCounts& naive) {
    if (naive.tp == 0 || naive.fn == 0 || cluster.fn == 0) return std::nullopt;
    const double tp_gain = static_cast<double>(cluster.tp) / static_cast<double>(naive.tp);
    const double fn_gain = static_cast<double>(cluster.fn) / static_cast<double>(naive.fn);
    return tp_gain / fn_gain;
}

}  // namespace citescope
