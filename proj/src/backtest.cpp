#include "citescope/backtest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

#include "citescope/parallel.hpp"
#include "citescope/rng.hpp"

namespace citescope {

namespace {

std::optional<double> mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::nullopt;
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

std::optional<double> median_of(std::vector<double> xs) {
    if (xs.empty()) return std::nullopt;
    std::sort(xs.begin(), xs.end());
    const size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Quantile by linear interpolation over the sorted sample.
std::optional<double> quantile_of(std::vector<double> xs, double q) {
    if (xs.empty()) return std::nullopt;
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    const double pos = q * static_cast<double>(xs.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

MeanMetrics mean_metrics(const std::vector<MonthResult>& months, bool cluster) {
    MeanMetrics out;
    std::vector<double> tpr, fpr, precision, recall, f1, mcc, accuracy;
    for (const MonthResult& m : months) {
        if (m.skipped) continue;
        ++out.n_months;
        const MetricSet& s = cluster ? m.metrics_cluster : m.metrics_naive;
        if (s.tpr) tpr.push_back(*s.tpr);
        if (s.fpr) fpr.push_back(*s.fpr);
        if (s.precision) precision.push_back(*s.precision);
        if (s.recall) recall.push_back(*s.recall);
        if (s.f1) f1.push_back(*s.f1);
        if (s.mcc) mcc.push_back(*s.mcc);
        if (s.accuracy) accuracy.push_back(*s.accuracy);
    }
    out.tpr = mean_of(tpr);
    out.fpr = mean_of(fpr);
    out.precision = mean_of(precision);
    out.recall = mean_of(recall);
    out.f1 = mean_of(f1);
    out.mcc = mean_of(mcc);
    out.accuracy = mean_of(accuracy);
    return out;
}

BacktestSummary summarize(const std::vector<MonthResult>& months, uint32_t months_skipped) {
    BacktestSummary s;
    std::vector<RocPoint> naive_pts, cluster_pts;
    std::vector<double> amps;
    std::set<std::string> warnings;
    for (const MonthResult& m : months) {
        if (m.skipped) continue;
        naive_pts.push_back({m.metrics_naive.fpr, m.metrics_naive.tpr});
        cluster_pts.push_back({m.metrics_cluster.fpr, m.metrics_cluster.tpr});
        if (m.amplification) amps.push_back(*m.amplification);
        for (const auto& w : m.warnings) warnings.insert(w);
        ++s.months_run;
    }
    s.months_skipped = months_skipped;
    s.fit_naive = log_fit(naive_pts);
    s.fit_cluster = log_fit(cluster_pts);
    s.mean_naive = mean_metrics(months, false);
    s.mean_cluster = mean_metrics(months, true);
    s.median_amplification = median_of(std::move(amps));
    s.bias_warnings.assign(warnings.begin(), warnings.end());
    return s;
}

std::vector<Month> eligible_cutoffs(const Corpus& corpus, const BacktestParams& params,
                                    std::vector<std::string>* notices) {
    if (params.cutoff_end < params.cutoff_start)
        throw std::invalid_argument("cutoff_end before cutoff_start");
    std::vector<Month> out;
    const auto last = corpus.last_month();
    for (Month m = params.cutoff_start; m <= params.cutoff_end; m = m.plus(1)) {
        // A window that would extend past the corpus end is skipped rather
        // than truncated; a short window would silently shift the
        // per-month percentiles.
        if (!last || m.plus(params.scoring.horizon_months - 1) > *last) {
            if (notices)
                notices->push_back(m.str() + ": test window extends past corpus end, skipped");
            continue;
        }
        out.push_back(m);
    }
    return out;
}

}  // namespace

uint64_t derive_seed(uint64_t base_seed, Month cutoff, double eps, double top_p,
                     std::string_view predictor_tag) {
    return stable_mix({base_seed, static_cast<uint64_t>(static_cast<int64_t>(cutoff.index)),
                       std::bit_cast<uint64_t>(eps), std::bit_cast<uint64_t>(top_p),
                       fnv1a64(predictor_tag)});
}

MonthResult run_month(const Corpus& corpus, Month cutoff, const BacktestParams& params,
                      const Predictor& predictor, const RangeIndex* shared_index) {
    MonthResult r;
    r.cutoff = cutoff;
    r.predictor_tag = predictor.tag();

    const CutoffSplit split = split_at(corpus, cutoff, params.scoring.horizon_months);
    r.n_train = split.train.size();
    r.n_test = split.test.size();
    if (split.test_empty()) {
        r.skipped = true;
        r.warnings.push_back("skipped: empty test window");
        return r;
    }

    PredictionSet preds;
    if (split.train.empty()) {
        preds.cutoff = cutoff;
        preds.dim = corpus.dim;
        preds.predictor_tag = predictor.tag();
        r.warnings.push_back("empty train view: no predictions issued");
    } else {
        const uint64_t seed = derive_seed(params.seed, cutoff, params.scoring.eps,
                                          params.scoring.top_p, predictor.tag());
        try {
            preds = predictor.predict(split.train, cutoff, params.scoring, seed);
        } catch (const std::exception& e) {
            throw std::runtime_error("predictor '" + predictor.tag() + "' failed at cutoff " +
                                     cutoff.str() + ": " + e.what());
        }
    }
    r.n_predictions = static_cast<uint32_t>(preds.size());
    for (const auto& w : preds.warnings) r.warnings.push_back(w);

    const TargetFlags targets = select_targets(split.test, params.scoring.top_p);
    r.n_targets = targets.total_targets;

    RangeIndex local;
    const RangeIndex* index = shared_index;
    if (!index) {
        local = RangeIndex::build(split.test);
        index = &local;
    }

    r.counts_naive = score_naive(preds, split.test, targets, params.scoring.eps, index);
    r.counts_cluster = score_cluster(preds, split.test, targets, params.scoring.eps, index);
    r.metrics_naive = derived_metrics(r.counts_naive);
    r.metrics_cluster = derived_metrics(r.counts_cluster);
    r.amplification = cluster_amplification(r.counts_cluster, r.counts_naive);
    return r;
}

BacktestRun run_backtest(const Corpus& corpus, const BacktestParams& params) {
    const auto predictor = make_predictor(params.predictor);
    return run_backtest(corpus, params, *predictor);
}

BacktestRun run_backtest(const Corpus& corpus, const BacktestParams& params,
                         const Predictor& predictor) {
    std::vector<std::string> notices;
    const std::vector<Month> cutoffs = eligible_cutoffs(corpus, params, &notices);

    BacktestRun run;
    run.params = params;
    run.predictor_tag = predictor.tag();

    std::vector<MonthResult> slots(cutoffs.size());
    parallel_for(cutoffs.size(), params.jobs,
                 [&](size_t i) { slots[i] = run_month(corpus, cutoffs[i], params, predictor); });

    uint32_t skipped = static_cast<uint32_t>(notices.size());
    for (MonthResult& m : slots) {
        if (m.skipped) {
            ++skipped;
            notices.push_back(m.cutoff.str() + ": " + (m.warnings.empty() ? "skipped"
                                                                          : m.warnings.front()));
            continue;
        }
        run.months.push_back(std::move(m));
    }
    if (run.months.empty())
        throw std::runtime_error("backtest produced no runnable months in " +
                                 params.cutoff_start.str() + ".." + params.cutoff_end.str());

    run.summary = summarize(run.months, skipped);
    for (auto& n : notices) run.summary.bias_warnings.push_back("notice: " + n);
    return run;
}

GridResult grid_search(const Corpus& corpus, const BacktestParams& base,
                       const std::vector<double>& top_p_grid, const std::vector<double>& eps_grid,
                       const std::vector<PredictorConfig>& predictors) {
    if (top_p_grid.empty() || eps_grid.empty() || predictors.empty())
        throw std::invalid_argument("grid_search: empty grid");

    struct CellSpec {
        double top_p, eps;
        size_t predictor;
    };
    std::vector<CellSpec> cells;
    std::vector<std::unique_ptr<Predictor>> preds;
    for (const auto& pc : predictors) preds.push_back(make_predictor(pc));
    for (size_t p = 0; p < predictors.size(); ++p)
        for (double tp : top_p_grid)
            for (double eps : eps_grid) cells.push_back({tp, eps, p});

    std::vector<std::string> notices;
    BacktestParams probe = base;
    // Window eligibility depends only on the horizon, shared by all cells.
    const std::vector<Month> cutoffs = eligible_cutoffs(corpus, probe, &notices);

    struct Slot {
        MonthResult result;
        bool failed = false;
        std::string error;
    };
    // cutoff-major: slots[cutoff][cell]
    std::vector<std::vector<Slot>> slots(cutoffs.size());
    for (auto& row : slots) row.resize(cells.size());

    std::vector<uint64_t> builds_per_cutoff(cutoffs.size(), 0);

    parallel_for(cutoffs.size(), base.jobs, [&](size_t ci) {
        const Month cutoff = cutoffs[ci];
        const CutoffSplit split = split_at(corpus, cutoff, base.scoring.horizon_months);

        // One index per cutoff, shared across every (top_p, eps, predictor)
        // cell; ball queries are radius-parameterized so eps needs no rebuild.
        RangeIndex index;
        const RangeIndex* shared = nullptr;
        if (!split.test_empty()) {
            index = RangeIndex::build(split.test);
            shared = &index;
            builds_per_cutoff[ci] = 1;
        }

        for (size_t k = 0; k < cells.size(); ++k) {
            BacktestParams cell_params = base;
            cell_params.scoring.top_p = cells[k].top_p;
            cell_params.scoring.eps = cells[k].eps;
            try {
                slots[ci][k].result =
                    run_month(corpus, cutoff, cell_params, *preds[cells[k].predictor], shared);
            } catch (const std::exception& e) {
                slots[ci][k].failed = true;
                slots[ci][k].error = e.what();
            }
        }
    });

    GridResult grid;
    for (size_t k = 0; k < cells.size(); ++k) {
        GridCell cell;
        cell.top_p = cells[k].top_p;
        cell.eps = cells[k].eps;
        cell.predictor_tag = preds[cells[k].predictor]->tag();
        uint32_t skipped = static_cast<uint32_t>(notices.size());
        for (size_t ci = 0; ci < cutoffs.size(); ++ci) {
            Slot& s = slots[ci][k];
            if (s.failed) {
                cell.failed = true;
                if (!cell.error.empty()) cell.error += "; ";
                cell.error += cutoffs[ci].str() + ": " + s.error;
                continue;
            }
            if (s.result.skipped) {
                ++skipped;
                continue;
            }
            cell.months.push_back(std::move(s.result));
        }
        cell.summary = summarize(cell.months, skipped);
        grid.any_failed = grid.any_failed || cell.failed;
        grid.cells.push_back(std::move(cell));
    }
    for (uint64_t b : builds_per_cutoff) grid.index_builds += b;
    return grid;
}

CompareSummary compare(const BacktestRun& algorithm, const BacktestRun& baseline) {
    if (algorithm.months.size() != baseline.months.size())
        throw std::invalid_argument("compare: runs cover different month sets");
    for (size_t i = 0; i < algorithm.months.size(); ++i)
        if (algorithm.months[i].cutoff != baseline.months[i].cutoff)
            throw std::invalid_argument("compare: cutoff mismatch at index " + std::to_string(i));
    const auto& sa = algorithm.params.scoring;
    const auto& sb = baseline.params.scoring;
    if (sa.eps != sb.eps || sa.top_p != sb.top_p || sa.horizon_months != sb.horizon_months)
        throw std::invalid_argument("compare: scoring parameters differ");

    CompareSummary cs;
    cs.algorithm_tag = algorithm.predictor_tag;
    cs.baseline_tag = baseline.predictor_tag;
    cs.alg_fit_naive = algorithm.summary.fit_naive;
    cs.alg_fit_cluster = algorithm.summary.fit_cluster;
    cs.base_fit_naive = baseline.summary.fit_naive;
    cs.base_fit_cluster = baseline.summary.fit_cluster;
    cs.alg_mean_naive = algorithm.summary.mean_naive;
    cs.alg_mean_cluster = algorithm.summary.mean_cluster;
    cs.base_mean_naive = baseline.summary.mean_naive;
    cs.base_mean_cluster = baseline.summary.mean_cluster;

    std::vector<double> base_fprs;
    for (size_t i = 0; i < algorithm.months.size(); ++i) {
        const MetricSet& ma = algorithm.months[i].metrics_cluster;
        const MetricSet& mb = baseline.months[i].metrics_cluster;
        CompareSummary::MonthDelta d;
        d.cutoff = algorithm.months[i].cutoff;
        if (ma.tpr && mb.tpr) d.dtpr = *ma.tpr - *mb.tpr;
        if (ma.fpr && mb.fpr) d.dfpr = *ma.fpr - *mb.fpr;
        cs.deltas.push_back(d);
        if (mb.fpr && *mb.fpr > 0.0) base_fprs.push_back(*mb.fpr);
    }

    for (double q : {0.25, 0.5, 0.75}) {
        auto fpr = quantile_of(base_fprs, q);
        if (!fpr) continue;
        UpliftRow row;
        row.fpr = *fpr;
        if (cs.alg_fit_naive && cs.base_fit_naive)
            row.uplift_naive = uplift_at(*cs.alg_fit_naive, *cs.base_fit_naive, *fpr);
        if (cs.alg_fit_cluster && cs.base_fit_cluster)
            row.uplift_cluster = uplift_at(*cs.alg_fit_cluster, *cs.base_fit_cluster, *fpr);
        cs.uplift.push_back(row);
    }

    std::set<std::string> warnings(algorithm.summary.bias_warnings.begin(),
                                   algorithm.summary.bias_warnings.end());
    warnings.insert(baseline.summary.bias_warnings.begin(), baseline.summary.bias_warnings.end());
    cs.bias_warnings.assign(warnings.begin(), warnings.end());
    return cs;
}

}  // namespace citescope
