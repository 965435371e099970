#include "citescope/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "citescope/rng.hpp"
#include "citescope/strfmt.hpp"

namespace citescope {

namespace {

// Uniform direction on the unit sphere via normalized Gaussian draws.
std::vector<float> sphere_point(Rng& rng, uint32_t dim) {
    std::vector<double> v(dim);
    double ss = 0.0;
    do {
        ss = 0.0;
        for (auto& x : v) {
            x = rng.next_normal();
            ss += x * x;
        }
    } while (ss == 0.0);
    const double inv = 1.0 / std::sqrt(ss);
    std::vector<float> out(dim);
    for (uint32_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] * inv);
    return out;
}

// Pareto(x_m = 1, alpha) shifted to start at 0, scaled, floored. boost = 1
// reproduces the background distribution exactly.
int64_t citation_draw(Rng& rng, double alpha, double boost) {
    const double u = 1.0 - rng.next_unit();  // (0, 1]
    const double x = std::pow(u, -1.0 / (alpha - 1.0));
    const double c = boost * (x - 1.0);
    const double capped = std::min(c, 1e15);  // keep counts inside int64
    return static_cast<int64_t>(capped);
}

Date random_date(Rng& rng, Month month) {
    const int day = static_cast<int>(rng.next_below(28)) + 1;
    return Date::of(month.year(), month.month(), day);
}

}  // namespace

Corpus synth_corpus(const SynthSpec& spec) {
    if (spec.dim == 0) throw std::invalid_argument("synth: dim must be >= 1");
    if (spec.citation_alpha <= 1.0) throw std::invalid_argument("synth: citation_alpha must be > 1");
    if (spec.cluster_radius <= 0.0) throw std::invalid_argument("synth: cluster_radius must be > 0");
    if (spec.boost_in_clusters <= 0.0)
        throw std::invalid_argument("synth: boost_in_clusters must be > 0");
    if (spec.n_clusters > 0 && spec.cluster_birth_months.empty())
        throw std::invalid_argument("synth: n_clusters > 0 requires cluster_birth_months");
    if (spec.growth_window_months < 1)
        throw std::invalid_argument("synth: growth_window_months must be >= 1");
    if (spec.n_background > 0 && spec.end < spec.start)
        throw std::invalid_argument("synth: end month before start month");

    Rng rng(stable_mix({spec.seed, 0x73796e7468ULL}));  // "synth"
    std::vector<Article> articles;
    articles.reserve(size_t(spec.n_background) + size_t(spec.n_clusters) * spec.n_per_cluster);

    const int span = months_between(spec.start, spec.end) + 1;
    char idbuf[32];
    for (uint32_t i = 0; i < spec.n_background; ++i) {
        Article a;
        std::snprintf(idbuf, sizeof(idbuf), "bg-%06u", i);
        a.id = idbuf;
        a.coords = sphere_point(rng, spec.dim);
        a.published = random_date(rng, spec.start.plus(static_cast<int>(rng.next_below(span))));
        a.citations = citation_draw(rng, spec.citation_alpha, 1.0);
        a.source = Source::Synthetic;
        articles.push_back(std::move(a));
    }

    GroundTruth gt;
    const double axis_sigma = spec.cluster_radius / std::sqrt(double(spec.dim));
    for (uint32_t c = 0; c < spec.n_clusters; ++c) {
        PlantedCluster pc;
        pc.center = sphere_point(rng, spec.dim);
        pc.birth = spec.cluster_birth_months[c % spec.cluster_birth_months.size()];
        for (uint32_t k = 0; k < spec.n_per_cluster; ++k) {
            std::vector<double> offset(spec.dim);
            double ss = 0.0;
            for (auto& x : offset) {
                x = rng.next_normal() * axis_sigma;
                ss += x * x;
            }
            // Cap the spread at 3x the cluster radius so every member stays
            // provably near the recorded center.
            const double norm = std::sqrt(ss);
            const double cap = 3.0 * spec.cluster_radius;
            const double scale = norm > cap ? cap / norm : 1.0;

            std::vector<double> raw(spec.dim);
            double rs = 0.0;
            for (uint32_t d = 0; d < spec.dim; ++d) {
                raw[d] = pc.center[d] + offset[d] * scale;
                rs += raw[d] * raw[d];
            }
            const double inv = 1.0 / std::sqrt(rs);

            Article a;
            std::snprintf(idbuf, sizeof(idbuf), "c%02u-%04u", c, k);
            a.id = idbuf;
            a.coords.resize(spec.dim);
            for (uint32_t d = 0; d < spec.dim; ++d)
                a.coords[d] = static_cast<float>(raw[d] * inv);
            const int offset_months =
                static_cast<int>(rng.next_below(static_cast<uint64_t>(spec.growth_window_months)));
            a.published = random_date(rng, pc.birth.plus(offset_months));
            a.citations = citation_draw(rng, spec.citation_alpha, spec.boost_in_clusters);
            a.source = Source::Synthetic;
            articles.push_back(std::move(a));
        }
        gt.clusters.push_back(std::move(pc));
    }

    return make_corpus(spec.dim, spec.metric, std::move(articles), ground_truth_json(gt));
}

std::string ground_truth_json(const GroundTruth& gt) {
    std::string out = "{\"clusters\":[";
    for (size_t i = 0; i < gt.clusters.size(); ++i) {
        if (i) out += ',';
        out += "{\"birth\":\"" + gt.clusters[i].birth.str() + "\",\"center\":[";
        for (size_t d = 0; d < gt.clusters[i].center.size(); ++d) {
            if (d) out += ',';
            out += fmt_float(gt.clusters[i].center[d]);
        }
        out += "]}";
    }
    out += "]}";
    return out;
}

GroundTruth parse_ground_truth(const std::string& provenance) {
    GroundTruth gt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(provenance);
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("provenance does not contain ground-truth JSON");
    }
    if (!j.contains("clusters")) return gt;
    for (const auto& c : j["clusters"]) {
        PlantedCluster pc;
        auto m = Month::parse(c.at("birth").get<std::string>());
        if (!m) throw std::invalid_argument("ground truth: bad birth month");
        pc.birth = *m;
        for (const auto& v : c.at("center")) pc.center.push_back(v.get<float>());
        gt.clusters.push_back(std::move(pc));
    }
    return gt;
}

}  // namespace citescope
