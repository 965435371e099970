#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>

#include "citescope/article.hpp"
#include "citescope/store.hpp"

namespace citescope::ingest {

struct HttpResponse {
    int status = 0;
    std::string body;
};

// One outbound request. Implementations: live_transport (cpp-httplib) and
// in-process fixtures in tests. Throwing signals a transport failure, which
// the client retries.
using Transport =
    std::function<HttpResponse(const std::string& method, const std::string& url,
                               const std::string& body)>;

Transport live_transport();
// Throws on every call; with a warm cache a pipeline run against it must
// still succeed.
Transport dead_transport();

struct HttpConfig {
    std::filesystem::path cache_dir;
    int max_retries = 4;
    int initial_backoff_ms = 250;
};

// Content-addressed response cache in front of a transport. Successful
// responses are stored by (method, url, body) hash; warm entries never touch
// the transport. HTTP 429 and 5xx retry with exponential backoff.
class CachedHttp {
public:
    CachedHttp(HttpConfig config, Transport transport);

    std::string get(const std::string& url);
    std::string post(const std::string& url, const std::string& body);

    // Requests that reached the transport (cache misses, including retries).
    uint64_t transport_calls() const { return transport_calls_; }

    const std::filesystem::path& cache_dir() const { return config_.cache_dir; }

private:
    std::string request(const std::string& method, const std::string& url,
                        const std::string& body);

    HttpConfig config_;
    Transport transport_;
    std::mutex cache_mu_;
    uint64_t transport_calls_ = 0;
};

struct MetadataRecord {
    std::string id;  // source-native id (arXiv id, PMID)
    std::string doi;
    std::string title;
    std::string abstract_text;
    Date published;  // first upload date
    Source source = Source::ArxivCS;
};

struct FetchConfig {
    Source source = Source::ArxivCS;
    Month from = Month::of(2010, 1);
    Month to = Month::of(2010, 1);  // inclusive
    std::string base_url;           // OAI endpoint or E-utilities base
    size_t max_records = 0;         // 0 = unlimited
};

struct FetchStats {
    size_t records = 0;   // emitted to the sink
    size_t pages = 0;     // pages walked (cached or fetched)
    size_t skipped = 0;   // permanently failed or deleted records
};

// Harvests one record per article in the range. Page responses land in the
// HTTP cache and a cursor file tracks completion, so an interrupted run
// resumes where it stopped and a completed range replays without network.
FetchStats fetch_metadata(const FetchConfig& config, CachedHttp& http,
                          const std::function<void(const MetadataRecord&)>& sink);

struct CitationKey {
    std::string article_id;
    std::string external_id;  // DOI when available, else source-native id
    bool is_doi = true;
};

struct CitationRecord {
    std::string article_id;
    std::string external_id;
    std::optional<int64_t> cited_by_count;  // absent: no citation data
    std::string fetched_at;                 // informational, never serialized
};

struct CitationConfig {
    std::string base_url = "https://api.openalex.org";
    std::string contact_email;  // polite-pool identification
    size_t batch_size = 50;     // hard-capped at 50
};

// Batched lookups against the works endpoint; works missing from the
// response yield absent counts rather than errors.
std::vector<CitationRecord> fetch_citations(const std::vector<CitationKey>& keys,
                                            const CitationConfig& config, CachedHttp& http);

// Maps an article to its citation lookup key: explicit DOI when present,
// the canonical arXiv DOI for arXiv records, the PMID for PubMed.
CitationKey citation_key(const MetadataRecord& record);

struct EmbeddingRequest {
    std::string article_id;
    std::string text;  // title + "\n\n" + abstract
};

struct EmbeddingResult {
    std::string article_id;
    std::vector<float> coords;
    std::string model_tag;
};

struct EmbeddingConfig {
    std::string endpoint;  // POST {model_tag, texts[]} -> {vectors[][]}
    std::string model_tag = "fixture-v1";
    size_t batch_size = 16;
    std::filesystem::path cache_dir;  // semantic cache by (model_tag, text hash)
};

// Batched embedding with a content-addressed cache; results keep request
// order and must all share one dimension (drift is a hard error).
std::vector<EmbeddingResult> embed_texts(const std::vector<EmbeddingRequest>& requests,
                                         const EmbeddingConfig& config, CachedHttp& http);

std::string embedding_text(const MetadataRecord& record);

struct BuildSummary {
    size_t written = 0;
    size_t dropped_no_embedding = 0;
    size_t without_citations = 0;
};

// Joins the three stages on article id and writes the vector store. Articles
// without embeddings are dropped (counted); articles without citation counts
// are kept with has_citation_data=false. Coordinates are unit-normalized at
// build. Throws when the join is empty.
BuildSummary build_store(const std::vector<MetadataRecord>& metadata,
                         const std::vector<CitationRecord>& citations,
                         const std::vector<EmbeddingResult>& embeddings,
                         const std::filesystem::path& out_path, MetricKind metric,
                         const std::string& provenance);

}  // namespace citescope::ingest
