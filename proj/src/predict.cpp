#include "citescope/predict.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include "citescope/metric.hpp"
#include "citescope/rng.hpp"
#include "citescope/strfmt.hpp"

namespace citescope {

const char* const kTrendBiasWarning =
    "biased-baseline: pool filtered on test-time citation counts (future leak); "
    "not valid for validation";

std::string_view to_string(PredictorKind k) {
    switch (k) {
        case PredictorKind::Baseline: return "baseline";
        case PredictorKind::BaselineTrend: return "baseline-top";
        case PredictorKind::Hotspot: return "hotspot";
        case PredictorKind::FromFile: return "from-file";
    }
    return "baseline";
}

std::optional<PredictorKind> predictor_kind_from_string(std::string_view s) {
    if (s == "baseline") return PredictorKind::Baseline;
    if (s == "baseline-top") return PredictorKind::BaselineTrend;
    if (s == "hotspot") return PredictorKind::Hotspot;
    if (s == "from-file") return PredictorKind::FromFile;
    return std::nullopt;
}

uint32_t n_predictions_for(uint64_t n_train_articles, double n_ratio) {
    if (n_ratio < 1.0) throw std::invalid_argument("n_ratio must be >= 1");
    if (n_train_articles == 0) return 0;
    const double n = std::round(static_cast<double>(n_train_articles) / n_ratio);
    return std::max<uint32_t>(1, static_cast<uint32_t>(n));
}

namespace {

PredictionSet sample_from_pool(const TrainView& train, std::span<const uint32_t> pool,
                               Month cutoff, uint32_t n, double jitter_sigma, uint64_t seed,
                               const char* tag) {
    PredictionSet out;
    out.cutoff = cutoff;
    out.dim = train.dim();
    out.predictor_tag = tag;
    if (n == 0) return out;
    if (pool.empty()) throw std::invalid_argument("baseline sampling from an empty pool");

    const bool renorm = train.metric() == MetricKind::EuclideanOnUnitNorm;
    Rng rng(seed);
    out.coords.reserve(n);
    for (uint32_t k = 0; k < n; ++k) {
        const uint32_t pick = pool[rng.next_below(pool.size())];
        std::vector<float> c = train.at(pick).coords;
        if (jitter_sigma > 0.0) {
            std::vector<double> v(c.size());
            double ss = 0.0;
            for (size_t d = 0; d < c.size(); ++d) {
                v[d] = c[d] + jitter_sigma * rng.next_normal();
                ss += v[d] * v[d];
            }
            const double inv = renorm && ss > 0.0 ? 1.0 / std::sqrt(ss) : 1.0;
            for (size_t d = 0; d < c.size(); ++d) c[d] = static_cast<float>(v[d] * inv);
        }
        out.coords.push_back(std::move(c));
    }
    return out;
}

}  // namespace

PredictionSet baseline_sample(const TrainView& train, Month cutoff, uint32_t n,
                              double jitter_sigma, uint64_t seed) {
    std::vector<uint32_t> pool(train.size());
    for (uint32_t i = 0; i < train.size(); ++i) pool[i] = i;
    if (n > 0 && pool.empty())
        throw std::invalid_argument("baseline_sample: empty train view with n > 0");
    return sample_from_pool(train, pool, cutoff, n, jitter_sigma, seed, "baseline");
}

PredictionSet baseline_trend_sample(const TrainView& train, Month cutoff, uint32_t n,
                                    double top_p, double jitter_sigma, uint64_t seed) {
    if (!(top_p > 0.0) || top_p > 100.0)
        throw std::invalid_argument("top_p must be in (0, 100]");

    // Per-month top-P citation-bearing pool over the train view; the same
    // rank rule as target selection.
    std::map<Month, std::vector<uint32_t>> by_month;
    for (uint32_t i = 0; i < train.size(); ++i)
        if (train.at(i).has_citation_data) by_month[train.at(i).published.month_of()].push_back(i);

    std::vector<uint32_t> pool;
    for (auto& [month, idxs] : by_month) {
        const auto quota = static_cast<uint32_t>(
            std::ceil(top_p * static_cast<double>(idxs.size()) / 100.0));
        std::sort(idxs.begin(), idxs.end(), [&](uint32_t a, uint32_t b) {
            const Article& x = train.at(a);
            const Article& y = train.at(b);
            if (x.citations != y.citations) return x.citations > y.citations;
            return x.id < y.id;
        });
        for (uint32_t k = 0; k < std::min<uint32_t>(quota, idxs.size()); ++k)
            pool.push_back(idxs[k]);
    }
    // Pool in view order: with top_p = 100 the draws then coincide with
    // baseline_sample under the same seed.
    std::sort(pool.begin(), pool.end());
    if (n > 0 && pool.empty())
        throw std::invalid_argument("baseline_trend_sample: no citation-bearing train articles");

    PredictionSet out =
        sample_from_pool(train, pool, cutoff, n, jitter_sigma, seed, "baseline-top");
    out.warnings.push_back(kTrendBiasWarning);
    return out;
}

std::vector<HotspotScore> hotspot_scores(const TrainView& train, Month cutoff,
                                         const HotspotParams& params, double scoring_eps,
                                         bool* degenerate_window) {
    const double eps_h = params.eps_h > 0.0 ? params.eps_h : scoring_eps;
    if (!(eps_h > 0.0)) throw std::invalid_argument("hotspot: eps_h must be > 0");
    if (params.recent_window_months < 1)
        throw std::invalid_argument("hotspot: recent_window_months must be >= 1");
    if (train.empty()) throw std::invalid_argument("hotspot: empty train view");

    const Month window_start = cutoff.plus(-params.recent_window_months);
    const Month train_start = train.at(0).published.month_of();
    const int prior_months = months_between(train_start, window_start);
    const bool degenerate = prior_months < 1;
    if (degenerate_window) *degenerate_window = degenerate;

    std::vector<std::vector<float>> pts;
    pts.reserve(train.size());
    for (size_t i = 0; i < train.size(); ++i) pts.push_back(train.at(i).coords);
    const RangeIndex index = RangeIndex::build(pts, train.dim(), train.metric());

    std::vector<HotspotScore> scores(train.size());
    const double window_ratio =
        degenerate ? 0.0
                   : static_cast<double>(params.recent_window_months) / prior_months;
    for (uint32_t i = 0; i < train.size(); ++i) {
        uint32_t recent = 0, prior = 0;
        for (uint32_t j : index.query_point(i, eps_h)) {
            if (train.at(j).published.month_of() >= window_start)
                ++recent;
            else
                ++prior;
        }
        scores[i].article = i;
        // Degenerate window (train shorter than the window): plain density.
        scores[i].growth = degenerate ? static_cast<double>(recent + prior)
                                      : recent - window_ratio * prior;
    }
    return scores;
}

PredictionSet hotspot_predict(const TrainView& train, Month cutoff, const HotspotParams& params,
                              double scoring_eps, uint32_t n_default) {
    bool degenerate = false;
    std::vector<HotspotScore> scores = hotspot_scores(train, cutoff, params, scoring_eps,
                                                      &degenerate);
    const double eps_h = params.eps_h > 0.0 ? params.eps_h : scoring_eps;
    const uint32_t n_keep = params.n_keep > 0 ? params.n_keep : n_default;

    std::sort(scores.begin(), scores.end(), [&](const HotspotScore& a, const HotspotScore& b) {
        if (a.growth != b.growth) return a.growth > b.growth;
        return train.at(a.article).id < train.at(b.article).id;
    });

    PredictionSet out;
    out.cutoff = cutoff;
    out.dim = train.dim();
    out.predictor_tag = "hotspot";
    out.warnings.push_back(
        "hotspot: reference density-growth predictor, not a published ranking method");
    if (degenerate)
        out.warnings.push_back("hotspot: train span shorter than recent window; "
                               "fell back to plain density scoring");

    for (const HotspotScore& s : scores) {
        if (out.coords.size() >= n_keep) break;
        const std::vector<float>& c = train.at(s.article).coords;
        bool dup = false;
        for (const auto& kept : out.coords)
            if (distance(kept, c, train.metric()) <= eps_h) {
                dup = true;
                break;
            }
        if (!dup) out.coords.push_back(c);
    }
    return out;
}

void save_predictions(const PredictionSet& preds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "#lscp v1 dim=" << preds.dim << " cutoff=" << preds.cutoff.str()
        << " tag=" << preds.predictor_tag << "\n";
    for (const auto& c : preds.coords) {
        for (size_t d = 0; d < c.size(); ++d) {
            if (d) out << ' ';
            out << fmt_float(c[d]);
        }
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

PredictionSet load_predictions(const std::filesystem::path& path, uint32_t expect_dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open predictions file " + path.string());

    std::string header;
    if (!std::getline(in, header))
        throw std::runtime_error(path.string() + ": missing header line");
    if (header.ends_with('\r')) header.pop_back();

    PredictionSet out;
    uint32_t dim = 0;
    bool have_dim = false, have_cutoff = false;
    const auto fields = split(header, ' ');
    if (fields.size() < 2 || fields[0] != "#lscp" || fields[1] != "v1")
        throw std::runtime_error(path.string() + ": bad predictions header '" + header + "'");
    for (size_t i = 2; i < fields.size(); ++i) {
        const auto& f = fields[i];
        if (f.starts_with("dim=")) {
            auto v = parse_int64(f.substr(4));
            if (!v || *v <= 0) throw std::runtime_error(path.string() + ": bad dim field");
            dim = static_cast<uint32_t>(*v);
            have_dim = true;
        } else if (f.starts_with("cutoff=")) {
            auto m = Month::parse(f.substr(7));
            if (!m) throw std::runtime_error(path.string() + ": bad cutoff field");
            out.cutoff = *m;
            have_cutoff = true;
        } else if (f.starts_with("tag=")) {
            out.predictor_tag = f.substr(4);
        }
    }
    if (!have_dim || !have_cutoff)
        throw std::runtime_error(path.string() + ": header missing dim= or cutoff=");
    if (expect_dim != 0 && dim != expect_dim)
        throw std::runtime_error(path.string() + ": dim " + std::to_string(dim) +
                                 " does not match corpus dim " + std::to_string(expect_dim));
    out.dim = dim;

    std::string line;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.ends_with('\r')) line.pop_back();
        if (trim(line).empty()) continue;
        std::vector<float> c;
        c.reserve(dim);
        for (const auto& tok : split(std::string(trim(line)), ' ')) {
            if (tok.empty()) continue;
            auto v = parse_float(tok);
            if (!v || !std::isfinite(*v))
                throw std::runtime_error(path.string() + " line " + std::to_string(line_no) +
                                         ": bad coordinate '" + tok + "'");
            c.push_back(*v);
        }
        if (c.size() != dim)
            throw std::runtime_error(path.string() + " line " + std::to_string(line_no) + ": " +
                                     std::to_string(c.size()) + " coordinates, expected " +
                                     std::to_string(dim));
        out.coords.push_back(std::move(c));
    }
    return out;
}

namespace {

class BaselinePredictor final : public Predictor {
public:
    explicit BaselinePredictor(const PredictorConfig& cfg) : cfg_(cfg) {}
    std::string tag() const override { return "baseline"; }
    PredictionSet predict(const TrainView& train, Month cutoff, const ScoringParams&,
                          uint64_t seed) const override {
        const uint32_t n = n_predictions_for(train.size(), cfg_.n_ratio);
        return baseline_sample(train, cutoff, n, cfg_.jitter_sigma, seed);
    }

private:
    PredictorConfig cfg_;
};

class BaselineTrendPredictor final : public Predictor {
public:
    explicit BaselineTrendPredictor(const PredictorConfig& cfg) : cfg_(cfg) {}
    std::string tag() const override { return "baseline-top"; }
    PredictionSet predict(const TrainView& train, Month cutoff, const ScoringParams&,
                          uint64_t seed) const override {
        const uint32_t n = n_predictions_for(train.size(), cfg_.n_ratio);
        return baseline_trend_sample(train, cutoff, n, cfg_.top_p_for_trend, cfg_.jitter_sigma,
                                     seed);
    }

private:
    PredictorConfig cfg_;
};

class HotspotPredictor final : public Predictor {
public:
    explicit HotspotPredictor(const PredictorConfig& cfg) : cfg_(cfg) {}
    std::string tag() const override { return "hotspot"; }
    PredictionSet predict(const TrainView& train, Month cutoff, const ScoringParams& scoring,
                          uint64_t) const override {
        const uint32_t n_default = n_predictions_for(train.size(), cfg_.n_ratio);
        return hotspot_predict(train, cutoff, cfg_.hotspot, scoring.eps, n_default);
    }

private:
    PredictorConfig cfg_;
};

class FromFilePredictor final : public Predictor {
public:
    explicit FromFilePredictor(const PredictorConfig& cfg) : cfg_(cfg) {}
    std::string tag() const override { return "from-file"; }
    PredictionSet predict(const TrainView& train, Month cutoff, const ScoringParams&,
                          uint64_t) const override {
        std::filesystem::path p = cfg_.predictions_path;
        if (std::filesystem::is_directory(p)) p /= cutoff.str() + ".lscp";
        PredictionSet preds = load_predictions(p, train.dim());
        if (preds.cutoff != cutoff)
            throw std::runtime_error(p.string() + ": file cutoff " + preds.cutoff.str() +
                                     " does not match requested cutoff " + cutoff.str());
        return preds;
    }

private:
    PredictorConfig cfg_;
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& config) {
    switch (config.kind) {
        case PredictorKind::Baseline: return std::make_unique<BaselinePredictor>(config);
        case PredictorKind::BaselineTrend: return std::make_unique<BaselineTrendPredictor>(config);
        case PredictorKind::Hotspot: return std::make_unique<HotspotPredictor>(config);
        case PredictorKind::FromFile: return std::make_unique<FromFilePredictor>(config);
    }
    throw std::invalid_argument("unknown predictor kind");
}

}  // namespace citescope
