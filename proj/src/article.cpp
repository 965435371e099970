#include "citescope/article.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace citescope {

std::string_view to_string(Source s) {
    switch (s) {
        case Source::ArxivCS: return "arxiv-cs";
        case Source::ArxivPhysics: return "arxiv-physics";
        case Source::ArxivMath: return "arxiv-math";
        case Source::PubMed: return "pubmed";
        case Source::Synthetic: return "synthetic";
    }
    return "synthetic";
}

std::optional<Source> source_from_string(std::string_view s) {
    if (s == "arxiv-cs") return Source::ArxivCS;
    if (s == "arxiv-physics") return Source::ArxivPhysics;
    if (s == "arxiv-math") return Source::ArxivMath;
    if (s == "pubmed") return Source::PubMed;
    if (s == "synthetic") return Source::Synthetic;
    return std::nullopt;
}

std::string_view to_string(MetricKind m) {
    switch (m) {
        case MetricKind::EuclideanOnUnitNorm: return "euclidean-unit";
        case MetricKind::Cosine: return "cosine";
    }
    return "euclidean-unit";
}

std::optional<MetricKind> metric_from_string(std::string_view s) {
    if (s == "euclidean-unit") return MetricKind::EuclideanOnUnitNorm;
    if (s == "cosine") return MetricKind::Cosine;
    return std::nullopt;
}

std::optional<Month> Corpus::first_month() const {
    if (articles.empty()) return std::nullopt;
    return articles.front().published.month_of();
}

std::optional<Month> Corpus::last_month() const {
    if (articles.empty()) return std::nullopt;
    return articles.back().published.month_of();
}

void validate_corpus(const Corpus& corpus) {
    std::unordered_set<std::string_view> seen;
    seen.reserve(corpus.articles.size() * 2);
    for (const Article& a : corpus.articles) {
        if (a.coords.size() != corpus.dim)
            throw std::invalid_argument("article '" + a.id + "': dimension " +
                                        std::to_string(a.coords.size()) + " != corpus dim " +
                                        std::to_string(corpus.dim));
        for (float c : a.coords)
            if (!std::isfinite(c))
                throw std::invalid_argument("article '" + a.id + "': non-finite coordinate");
        if (a.citations < 0)
            throw std::invalid_argument("article '" + a.id + "': negative citation count");
        if (!seen.insert(a.id).second)
            throw std::invalid_argument("duplicate article id '" + a.id + "'");
    }
    if (!std::is_sorted(corpus.articles.begin(), corpus.articles.end(),
                        [](const Article& x, const Article& y) {
                            return std::tie(x.published, x.id) < std::tie(y.published, y.id);
                        }))
        throw std::invalid_argument("corpus articles not sorted by (published, id)");
}

Corpus make_corpus(uint32_t dim, MetricKind metric, std::vector<Article> articles,
                   std::string provenance) {
    Corpus c;
    c.dim = dim;
    c.metric = metric;
    c.articles = std::move(articles);
    c.provenance = std::move(provenance);
    std::sort(c.articles.begin(), c.articles.end(), [](const Article& x, const Article& y) {
        return std::tie(x.published, x.id) < std::tie(y.published, y.id);
    });
    validate_corpus(c);
    return c;
}

CutoffSplit split_at(const Corpus& corpus, Month cutoff, int horizon_months) {
    if (horizon_months < 1) throw std::invalid_argument("horizon_months must be >= 1");

    const Month end = cutoff.plus(horizon_months);
    const auto month_lower = [&](Month m) {
        // First index whose published month is >= m.
        return static_cast<size_t>(
            std::lower_bound(corpus.articles.begin(), corpus.articles.end(), m,
                             [](const Article& a, Month mm) { return a.published.month_of() < mm; }) -
            corpus.articles.begin());
    };

    const size_t split_idx = month_lower(cutoff);
    const size_t end_idx = month_lower(end);

    CutoffSplit s;
    s.cutoff = cutoff;
    s.horizon_months = horizon_months;
    s.train = TrainView(&corpus, 0, split_idx);
    s.test = TestView(&corpus, split_idx, end_idx);
    return s;
}

}  // namespace citescope
