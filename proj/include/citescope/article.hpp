#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citescope/dates.hpp"

namespace citescope {

enum class Source : uint8_t { ArxivCS, ArxivPhysics, ArxivMath, PubMed, Synthetic };

std::string_view to_string(Source s);
std::optional<Source> source_from_string(std::string_view s);

enum class MetricKind : uint8_t {
    // L2 distance after L2-normalizing both vectors.
    EuclideanOnUnitNorm,
    // 1 - cosine similarity.
    Cosine,
};

std::string_view to_string(MetricKind m);
std::optional<MetricKind> metric_from_string(std::string_view s);

struct Article {
    std::string id;
    std::vector<float> coords;
    Date published;
    int64_t citations = 0;
    Source source = Source::Synthetic;
    bool has_citation_data = true;
    // Test instrumentation for the no-future-leak check; never serialized.
    bool sentinel = false;
};

// Counts reads of sentinel-flagged articles through train views. Attached to
// a corpus by leak tests; production runs never attach one.
struct TaintProbe {
    std::atomic<uint64_t> sentinel_reads{0};
};

// Immutable after construction via make_corpus; articles sorted ascending by
// (published, id), every article of dimension dim.
struct Corpus {
    uint32_t dim = 0;
    MetricKind metric = MetricKind::EuclideanOnUnitNorm;
    std::vector<Article> articles;
    std::string provenance;
    TaintProbe* probe = nullptr;

    size_t size() const { return articles.size(); }
    bool empty() const { return articles.empty(); }
    std::optional<Month> first_month() const;
    std::optional<Month> last_month() const;
};

// Sorts by (published, id) and validates: matching dimensions, finite
// coordinates, non-negative citations, unique ids. Throws
// std::invalid_argument naming the offending article.
Corpus make_corpus(uint32_t dim, MetricKind metric, std::vector<Article> articles,
                   std::string provenance = "");

// Validation only, for corpora assembled by hand.
void validate_corpus(const Corpus& corpus);

// Half-open index range [lo, hi) over a corpus. Views are the only way the
// engine hands articles to downstream stages.
class ArticleView {
public:
    ArticleView() = default;
    ArticleView(const Corpus* corpus, size_t lo, size_t hi, bool counted)
        : corpus_(corpus), lo_(lo), hi_(hi), counted_(counted) {}

    size_t size() const { return hi_ - lo_; }
    bool empty() const { return hi_ == lo_; }
    const Corpus* corpus() const { return corpus_; }

    const Article& at(size_t i) const {
        const Article& a = corpus_->articles[lo_ + i];
        if (counted_ && a.sentinel && corpus_->probe)
            corpus_->probe->sentinel_reads.fetch_add(1, std::memory_order_relaxed);
        return a;
    }

    uint32_t dim() const { return corpus_ ? corpus_->dim : 0; }
    MetricKind metric() const { return corpus_ ? corpus_->metric : MetricKind::EuclideanOnUnitNorm; }

private:
    const Corpus* corpus_ = nullptr;
    size_t lo_ = 0;
    size_t hi_ = 0;
    bool counted_ = false;
};

// Predictors receive only this view; sentinel reads through it are counted.
struct TrainView : ArticleView {
    TrainView() = default;
    TrainView(const Corpus* corpus, size_t lo, size_t hi) : ArticleView(corpus, lo, hi, true) {}
};

// Scoring-side view over the test window.
struct TestView : ArticleView {
    TestView() = default;
    TestView(const Corpus* corpus, size_t lo, size_t hi) : ArticleView(corpus, lo, hi, false) {}
};

struct CutoffSplit {
    Month cutoff;
    int horizon_months = 24;
    TrainView train;
    TestView test;

    bool test_empty() const { return test.empty(); }
};

// train: published strictly before the first day of the cutoff month.
// test: cutoff <= published month < cutoff + horizon_months.
// Articles past the horizon belong to neither view. An empty test window is
// not an error; callers skip it with a notice.
CutoffSplit split_at(const Corpus& corpus, Month cutoff, int horizon_months);

}  // namespace citescope
