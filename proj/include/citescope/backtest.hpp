#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "citescope/metrics.hpp"
#include "citescope/predict.hpp"
#include "citescope/scoring.hpp"

namespace citescope {

struct BacktestParams {
    Month cutoff_start = Month::of(2010, 1);
    Month cutoff_end = Month::of(2024, 12);
    ScoringParams scoring;
    PredictorConfig predictor;
    uint64_t seed = 0;
    unsigned jobs = 0;  // 0 = hardware concurrency
};

struct MonthResult {
    Month cutoff;
    bool skipped = false;
    uint64_t n_train = 0, n_test = 0;
    uint32_t n_targets = 0;
    uint32_t n_predictions = 0;
    ConfusionCounts counts_naive, counts_cluster;
    MetricSet metrics_naive, metrics_cluster;
    std::optional<double> amplification;
    std::string predictor_tag;
    std::vector<std::string> warnings;
};

// Mean of the defined per-month values; absent when no month defines one.
struct MeanMetrics {
    std::optional<double> tpr, fpr, precision, recall, f1, mcc, accuracy;
    uint32_t n_months = 0;
};

struct BacktestSummary {
    std::optional<LogFit> fit_naive, fit_cluster;
    MeanMetrics mean_naive, mean_cluster;
    uint32_t months_run = 0, months_skipped = 0;
    std::optional<double> median_amplification;
    std::vector<std::string> bias_warnings;  // deduplicated predictor warnings
};

struct BacktestRun {
    BacktestParams params;
    std::string predictor_tag;
    std::vector<MonthResult> months;  // ascending by cutoff
    BacktestSummary summary;
};

// Derives the per-(cell, cutoff) seed; stable across runs, platforms and
// worker counts, so any grid cell is independently reproducible.
uint64_t derive_seed(uint64_t base_seed, Month cutoff, double eps, double top_p,
                     std::string_view predictor_tag);

// One walk-forward step: split at cutoff, predict from the train view,
// select targets, run both scorers, derive metrics. Pure function of
// (corpus, cutoff, params, predictor). A shared_index, when given, must have
// been built over exactly this cutoff's test view.
MonthResult run_month(const Corpus& corpus, Month cutoff, const BacktestParams& params,
                      const Predictor& predictor, const RangeIndex* shared_index = nullptr);

// Monthly sweep over [cutoff_start, cutoff_end]. Cutoffs whose test window
// extends past the corpus end are skipped, not truncated. Throws when every
// month is skipped.
BacktestRun run_backtest(const Corpus& corpus, const BacktestParams& params);
BacktestRun run_backtest(const Corpus& corpus, const BacktestParams& params,
                         const Predictor& predictor);

struct GridCell {
    double top_p = 0.0;
    double eps = 0.0;
    std::string predictor_tag;
    bool failed = false;
    std::string error;
    std::vector<MonthResult> months;
    BacktestSummary summary;
};

struct GridResult {
    std::vector<GridCell> cells;  // predictor-major, then top_p, then eps
    uint64_t index_builds = 0;    // instrumentation: at most one per cutoff
    bool any_failed = false;
};

// Full grid sweep. The test-window range index is built once per cutoff and
// shared across every (top_p, eps, predictor) cell; per-cell errors are
// recorded on the cell without aborting the rest.
GridResult grid_search(const Corpus& corpus, const BacktestParams& base,
                       const std::vector<double>& top_p_grid, const std::vector<double>& eps_grid,
                       const std::vector<PredictorConfig>& predictors);

struct UpliftRow {
    double fpr = 0.0;
    std::optional<double> uplift_naive, uplift_cluster;
};

struct CompareSummary {
    std::string algorithm_tag, baseline_tag;
    // Paired per-month deltas (algorithm - baseline), cluster scorer.
    struct MonthDelta {
        Month cutoff;
        std::optional<double> dtpr, dfpr;
    };
    std::vector<MonthDelta> deltas;
    std::optional<LogFit> alg_fit_naive, alg_fit_cluster, base_fit_naive, base_fit_cluster;
    // Uplift at the 25/50/75 percentiles of the baseline's observed FPR.
    std::vector<UpliftRow> uplift;
    MeanMetrics alg_mean_cluster, base_mean_cluster, alg_mean_naive, base_mean_naive;
    std::vector<std::string> bias_warnings;
};

// Paired comparison of two runs over identical cutoffs and scoring params.
// Throws on mismatched cutoffs.
CompareSummary compare(const BacktestRun& algorithm, const BacktestRun& baseline);

}  // namespace citescope
