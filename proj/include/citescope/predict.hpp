#pragma once

#include <filesystem>
#include <memory>
#include <optional>

#include "citescope/scoring.hpp"

namespace citescope {

enum class PredictorKind : uint8_t { Baseline, BaselineTrend, Hotspot, FromFile };

std::string_view to_string(PredictorKind k);
std::optional<PredictorKind> predictor_kind_from_string(std::string_view s);

struct HotspotParams {
    double eps_h = 0.0;  // 0 = use the scoring eps
    int recent_window_months = 12;
    uint32_t n_keep = 0;  // 0 = use the ratio-derived prediction count
};

struct PredictorConfig {
    PredictorKind kind = PredictorKind::Baseline;
    double n_ratio = 100.0;      // train articles per prediction
    double jitter_sigma = 0.0;   // baseline perturbation scale, 0 = pure resampling
    double top_p_for_trend = 15.0;
    HotspotParams hotspot;
    std::filesystem::path predictions_path;  // FromFile: file or per-cutoff directory
};

// Warning tag attached to every trend-baseline prediction set and propagated
// into reports: the sampling pool is filtered on test-time citation counts,
// which the modeled researchers could not have observed.
extern const char* const kTrendBiasWarning;

// max(1, round(n_train / n_ratio)) for non-empty train; 0 when train is
// empty.
uint32_t n_predictions_for(uint64_t n_train_articles, double n_ratio);

// Incremental-research model: each prediction is a uniformly drawn train
// article's coordinates, with replacement, optionally perturbed by isotropic
// Gaussian noise of scale jitter_sigma (re-normalized under the unit-norm
// metric). jitter_sigma = 0 copies coordinates verbatim.
PredictionSet baseline_sample(const TrainView& train, Month cutoff, uint32_t n,
                              double jitter_sigma, uint64_t seed);

// Baseline restricted to the per-month top-P citation-bearing train
// articles. Carries kTrendBiasWarning.
PredictionSet baseline_trend_sample(const TrainView& train, Month cutoff, uint32_t n,
                                    double top_p, double jitter_sigma, uint64_t seed);

// Growth score per train article: neighbors (within eps_h) published in the
// trailing window, minus the time-normalized count expected from the
// earlier rate. Exposed for the permutation-test oracle.
struct HotspotScore {
    uint32_t article = 0;  // train-view index
    double growth = 0.0;
};
std::vector<HotspotScore> hotspot_scores(const TrainView& train, Month cutoff,
                                         const HotspotParams& params, double scoring_eps,
                                         bool* degenerate_window = nullptr);

// Reference predictor: top-scoring growth locations, deduplicated so no two
// predictions lie within eps_h of each other. Not a reconstruction of any
// published ranking method; it exists so the harness runs end to end, and
// its tag marks it as such.
PredictionSet hotspot_predict(const TrainView& train, Month cutoff, const HotspotParams& params,
                              double scoring_eps, uint32_t n_default);

// Predictions file: "#lscp v1 dim=<D> cutoff=<YYYY-MM> tag=<string>" header,
// then one prediction per line as D space-separated decimals.
void save_predictions(const PredictionSet& preds, const std::filesystem::path& path);
PredictionSet load_predictions(const std::filesystem::path& path, uint32_t expect_dim = 0);

// Pluggable prediction interface; the backtester only sees this.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::string tag() const = 0;
    virtual PredictionSet predict(const TrainView& train, Month cutoff,
                                  const ScoringParams& scoring, uint64_t seed) const = 0;
};

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& config);

}  // namespace citescope
