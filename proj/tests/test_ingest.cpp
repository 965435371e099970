#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <map>

#include <json.hpp>

#include "citescope/ingest.hpp"
#include "citescope/rng.hpp"
#include "citescope/strfmt.hpp"
#include "citescope/report.hpp"
#include "citescope/store.hpp"

using namespace citescope;
using namespace citescope::ingest;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "citescope-tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string cache_digest(const fs::path& dir) {
    // Order-independent digest of every cache file.
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[e.path().string()] = read_text_file(e.path());
    std::string all;
    for (const auto& [k, v] : files) all += k + "\0" + v + "\1";
    return std::to_string(fnv1a64(all)) + ":" + std::to_string(files.size());
}

// Two-page OAI fixture: page one ends with a resumption token.
const char* kOaiPage1 = R"(<?xml version="1.0"?>
<OAI-PMH><ListRecords>
<record><header><identifier>oai:arXiv.org:2001.00001</identifier></header>
<metadata><arXiv><id>2001.00001</id><created>2020-01-03</created>
<title>Fast  widgets</title><abstract>We study widgets &amp; gadgets.</abstract></arXiv></metadata></record>
<record><header status="deleted"><identifier>oai:arXiv.org:2001.00002</identifier></header></record>
<record><header><identifier>oai:arXiv.org:2001.00003</identifier></header>
<metadata><arXiv><id>2001.00003</id><created>2020-01-10</created><doi>10.1234/custom.3</doi>
<title>Slow widgets</title><abstract>More widgets.</abstract></arXiv></metadata></record>
<resumptionToken>tok-page-2</resumptionToken>
</ListRecords></OAI-PMH>)";

const char* kOaiPage2 = R"(<?xml version="1.0"?>
<OAI-PMH><ListRecords>
<record><header><identifier>oai:arXiv.org:2002.00004</identifier></header>
<metadata><arXiv><id>2002.00004</id><created>2020-02-20</created>
<title>Gadget review</title><abstract>A survey.</abstract></arXiv></metadata></record>
<resumptionToken></resumptionToken>
</ListRecords></OAI-PMH>)";

Transport oai_transport(std::atomic<int>* calls = nullptr, int fail_after = -1) {
    return [calls, fail_after](const std::string&, const std::string& url,
                               const std::string&) -> HttpResponse {
        if (calls) {
            const int n = calls->fetch_add(1);
            if (fail_after >= 0 && n >= fail_after)
                throw std::runtime_error("fixture transport interrupted");
        }
        if (url.find("resumptionToken=tok-page-2") != std::string::npos)
            return {200, kOaiPage2};
        if (url.find("verb=ListRecords") != std::string::npos) return {200, kOaiPage1};
        return {404, "not found"};
    };
}

// OpenAlex fixture with one known DOI.
Transport openalex_transport() {
    return [](const std::string&, const std::string& url, const std::string&) -> HttpResponse {
        if (url.find("/works?filter=doi:") == std::string::npos) return {404, "nope"};
        nlohmann::json results = nlohmann::json::array();
        if (url.find("10.48550") != std::string::npos || url.find("10.1234") != std::string::npos) {
            results.push_back({{"doi", "https://doi.org/10.1234/custom.3"},
                               {"cited_by_count", 7}});
        }
        return {200, nlohmann::json{{"results", results}}.dump()};
    };
}

// Embedding fixture: returns unit basis vectors keyed by a counter per
// batch order; deterministic per text via a hash.
Transport embedding_transport(std::atomic<int>* calls = nullptr, uint32_t dim = 4) {
    return [calls, dim](const std::string& method, const std::string&,
                        const std::string& body) -> HttpResponse {
        if (calls) calls->fetch_add(1);
        if (method != "POST") return {405, "method"};
        const nlohmann::json req = nlohmann::json::parse(body);
        nlohmann::json vectors = nlohmann::json::array();
        for (const auto& text : req.at("texts")) {
            std::vector<float> v(dim, 0.0f);
            v[fnv1a64(text.get<std::string>()) % dim] = 1.0f;
            vectors.push_back(v);
        }
        return {200, nlohmann::json{{"vectors", vectors}}.dump()};
    };
}

FetchConfig arxiv_config() {
    FetchConfig cfg;
    cfg.source = Source::ArxivCS;
    cfg.from = Month::of(2020, 1);
    cfg.to = Month::of(2020, 2);
    cfg.base_url = "http://fixture/oai2";
    return cfg;
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("cached http serves warm entries without transport calls") {
    const auto dir = fresh_dir("http-cache");
    std::atomic<int> calls{0};
    Transport t = [&](const std::string&, const std::string&, const std::string&) -> HttpResponse {
        calls.fetch_add(1);
        return {200, "payload"};
    };
    HttpConfig cfg;
    cfg.cache_dir = dir;
    {
        CachedHttp http(cfg, t);
        CHECK(http.get("http://x/a") == "payload");
        CHECK(http.get("http://x/a") == "payload");
        CHECK(calls.load() == 1);
    }
    // A new client over the same cache needs no transport at all.
    CachedHttp http2(cfg, dead_transport());
    CHECK(http2.get("http://x/a") == "payload");
    CHECK_THROWS(http2.get("http://x/other"));
}

TEST_CASE("retries back off on 429 then succeed") {
    const auto dir = fresh_dir("http-retry");
    std::atomic<int> calls{0};
    Transport t = [&](const std::string&, const std::string&, const std::string&) -> HttpResponse {
        if (calls.fetch_add(1) < 2) return {429, "slow down"};
        return {200, "ok"};
    };
    HttpConfig cfg;
    cfg.cache_dir = dir;
    cfg.initial_backoff_ms = 1;
    CachedHttp http(cfg, t);
    CHECK(http.get("http://x/r") == "ok");
    CHECK(calls.load() == 3);
}

TEST_CASE("permanent 4xx does not retry and is not cached") {
    const auto dir = fresh_dir("http-4xx");
    std::atomic<int> calls{0};
    Transport t = [&](const std::string&, const std::string&, const std::string&) -> HttpResponse {
        calls.fetch_add(1);
        return {404, "missing"};
    };
    HttpConfig cfg;
    cfg.cache_dir = dir;
    cfg.initial_backoff_ms = 1;
    CachedHttp http(cfg, t);
    CHECK_THROWS_WITH_AS(http.get("http://x/m"), doctest::Contains("404"), std::runtime_error);
    CHECK(calls.load() == 1);
}

TEST_CASE("empty date range fetches nothing") {
    const auto dir = fresh_dir("fetch-empty");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    CachedHttp http(cfg, dead_transport());
    FetchConfig fc = arxiv_config();
    fc.to = Month::of(2019, 12);  // before from
    const FetchStats stats = fetch_metadata(fc, http, [](const MetadataRecord&) {});
    CHECK(stats.records == 0);
    CHECK(stats.pages == 0);
}

TEST_CASE("arxiv fetch walks resumption tokens and skips deleted records") {
    const auto dir = fresh_dir("fetch-arxiv");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    CachedHttp http(cfg, oai_transport());

    std::vector<MetadataRecord> recs;
    const FetchStats stats =
        fetch_metadata(arxiv_config(), http, [&](const MetadataRecord& r) { recs.push_back(r); });

    CHECK(stats.pages == 2);
    CHECK(stats.skipped == 1);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].id == "2001.00001");
    CHECK(recs[0].title == "Fast widgets");               // whitespace collapsed
    CHECK(recs[0].abstract_text == "We study widgets & gadgets.");  // entity decoded
    CHECK(recs[0].published == Date::of(2020, 1, 3));
    CHECK(recs[1].doi == "10.1234/custom.3");
    CHECK(recs[2].id == "2002.00004");
}

TEST_CASE("re-running a fetched range touches no network and leaves the cache unchanged") {
    const auto dir = fresh_dir("fetch-idem");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    std::vector<MetadataRecord> first, second;
    {
        CachedHttp http(cfg, oai_transport());
        fetch_metadata(arxiv_config(), http, [&](const MetadataRecord& r) { first.push_back(r); });
    }
    const std::string digest = cache_digest(dir);
    {
        // Dead transport proves the warm cache carries the whole run.
        CachedHttp http(cfg, dead_transport());
        const FetchStats stats = fetch_metadata(
            arxiv_config(), http, [&](const MetadataRecord& r) { second.push_back(r); });
        CHECK(http.transport_calls() == 0);
        CHECK(stats.records == first.size());
    }
    CHECK(cache_digest(dir) == digest);
    REQUIRE(second.size() == first.size());
    for (size_t i = 0; i < first.size(); ++i) CHECK(second[i].id == first[i].id);
}

TEST_CASE("interrupted fetch resumes into the same record set") {
    const auto dir = fresh_dir("fetch-resume");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    cfg.initial_backoff_ms = 1;
    cfg.max_retries = 0;

    std::vector<MetadataRecord> partial;
    {
        std::atomic<int> calls{0};
        CachedHttp http(cfg, oai_transport(&calls, 1));  // dies after page 1
        CHECK_THROWS(fetch_metadata(arxiv_config(), http,
                                    [&](const MetadataRecord& r) { partial.push_back(r); }));
        CHECK(partial.size() == 2);  // page one delivered before the failure
    }

    std::vector<MetadataRecord> resumed;
    {
        std::atomic<int> calls{0};
        CachedHttp http(cfg, oai_transport(&calls));
        fetch_metadata(arxiv_config(), http,
                       [&](const MetadataRecord& r) { resumed.push_back(r); });
        CHECK(calls.load() == 1);  // only the second page hits the transport
    }

    // One-shot reference run.
    const auto ref_dir = fresh_dir("fetch-oneshot");
    HttpConfig ref_cfg;
    ref_cfg.cache_dir = ref_dir;
    CachedHttp ref_http(ref_cfg, oai_transport());
    std::vector<MetadataRecord> oneshot;
    fetch_metadata(arxiv_config(), ref_http,
                   [&](const MetadataRecord& r) { oneshot.push_back(r); });

    REQUIRE(resumed.size() == oneshot.size());
    for (size_t i = 0; i < resumed.size(); ++i) {
        CHECK(resumed[i].id == oneshot[i].id);
        CHECK(resumed[i].title == oneshot[i].title);
    }
}

TEST_CASE("citation keys prefer the DOI and fall back to canonical forms") {
    MetadataRecord with_doi;
    with_doi.id = "2001.00003";
    with_doi.doi = "10.1234/custom.3";
    CHECK(citation_key(with_doi).external_id == "10.1234/custom.3");

    MetadataRecord arxiv;
    arxiv.id = "2001.00001";
    arxiv.source = Source::ArxivCS;
    CHECK(citation_key(arxiv).external_id == "10.48550/arXiv.2001.00001");

    MetadataRecord pubmed;
    pubmed.id = "123456";
    pubmed.source = Source::PubMed;
    const CitationKey key = citation_key(pubmed);
    CHECK(key.external_id == "123456");
    CHECK_FALSE(key.is_doi);
}

TEST_CASE("citations: empty input, known id, and absent id") {
    const auto dir = fresh_dir("citations");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    CachedHttp http(cfg, openalex_transport());
    CitationConfig cc;
    cc.base_url = "http://fixture";
    cc.contact_email = "test@example.org";

    CHECK(fetch_citations({}, cc, http).empty());

    std::vector<CitationKey> keys = {
        {"2001.00003", "10.1234/custom.3", true},
        {"2001.00001", "10.48550/arXiv.2001.00001", true},
    };
    const auto recs = fetch_citations(keys, cc, http);
    REQUIRE(recs.size() == 2);
    REQUIRE(recs[0].cited_by_count.has_value());
    CHECK(*recs[0].cited_by_count == 7);
    CHECK_FALSE(recs[1].cited_by_count.has_value());  // absent, not an error
}

TEST_CASE("citation batches respect the 50-id cap") {
    const auto dir = fresh_dir("citations-batch");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    std::vector<size_t> batch_sizes;
    Transport t = [&](const std::string&, const std::string& url,
                      const std::string&) -> HttpResponse {
        const auto from = url.find("doi:") + 4;
        const auto to = url.find("&per-page");
        size_t count = 1;
        for (size_t i = from; i < to; ++i)
            if (url.compare(i, 3, "%7C") == 0) ++count;  // url-encoded '|'
        batch_sizes.push_back(count);
        return {200, R"({"results":[]})"};
    };
    CachedHttp http(cfg, t);
    CitationConfig cc;
    cc.base_url = "http://fixture";

    std::vector<CitationKey> keys;
    for (int i = 0; i < 120; ++i)
        keys.push_back({"a" + std::to_string(i), "10.1/x" + std::to_string(i), true});
    fetch_citations(keys, cc, http);
    REQUIRE(batch_sizes.size() == 3);
    CHECK(batch_sizes[0] == 50);
    CHECK(batch_sizes[1] == 50);
    CHECK(batch_sizes[2] == 20);
}

TEST_CASE("malformed citation response names the batch") {
    const auto dir = fresh_dir("citations-bad");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    CachedHttp http(cfg, [](const std::string&, const std::string&,
                            const std::string&) -> HttpResponse { return {200, "not json"}; });
    CitationConfig cc;
    cc.base_url = "http://fixture";
    CHECK_THROWS_WITH_AS(fetch_citations({{"a", "10.1/x", true}}, cc, http),
                         doctest::Contains("10.1/x"), std::runtime_error);
}

TEST_CASE("embeddings cache by content and never re-embed") {
    const auto dir = fresh_dir("embed");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    std::atomic<int> calls{0};
    EmbeddingConfig ec;
    ec.endpoint = "http://fixture/embed";
    ec.cache_dir = dir;
    ec.batch_size = 2;

    std::vector<EmbeddingRequest> reqs = {{"a", "text one"}, {"b", "text two"},
                                          {"c", "text three"}};
    {
        CachedHttp http(cfg, embedding_transport(&calls));
        const auto res = embed_texts(reqs, ec, http);
        REQUIRE(res.size() == 3);
        CHECK(calls.load() == 2);  // two batches of size <= 2
        for (const auto& r : res) CHECK(r.coords.size() == 4);
    }
    {
        // Same requests, dead endpoint: the semantic cache answers.
        CachedHttp http(cfg, dead_transport());
        const auto res = embed_texts(reqs, ec, http);
        CHECK(http.transport_calls() == 0);
        REQUIRE(res.size() == 3);
    }
    {
        // Identical text embeds to identical coordinates.
        CachedHttp http(cfg, dead_transport());
        const auto res =
            embed_texts({{"x", "text one"}, {"y", "text one"}}, ec, http);
        CHECK(res[0].coords == res[1].coords);
    }
}

TEST_CASE("embedding dimension drift is a hard error") {
    const auto dir = fresh_dir("embed-drift");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    Transport t = [](const std::string&, const std::string&,
                     const std::string& body) -> HttpResponse {
        const nlohmann::json req = nlohmann::json::parse(body);
        nlohmann::json vectors = nlohmann::json::array();
        size_t k = 0;
        for (const auto& text : req.at("texts")) {
            (void)text;
            vectors.push_back(std::vector<float>(k == 0 ? 4 : 3, 0.5f));
            ++k;
        }
        return {200, nlohmann::json{{"vectors", vectors}}.dump()};
    };
    CachedHttp http(cfg, t);
    EmbeddingConfig ec;
    ec.endpoint = "http://fixture/embed";
    ec.cache_dir = dir;
    CHECK_THROWS_WITH_AS(embed_texts({{"a", "t1"}, {"b", "t2"}}, ec, http),
                         doctest::Contains("drift"), std::runtime_error);
}

TEST_CASE("build_store joins stages, drops and flags correctly") {
    const auto out = fresh_dir("build-store") / "store";

    std::vector<MetadataRecord> meta(3);
    meta[0].id = "a";
    meta[0].published = Date::of(2020, 1, 5);
    meta[1].id = "b";
    meta[1].published = Date::of(2020, 2, 5);
    meta[2].id = "c";
    meta[2].published = Date::of(2020, 3, 5);
    for (auto& m : meta) m.source = Source::ArxivCS;

    std::vector<EmbeddingResult> embs(2);
    embs[0] = {"a", {1.0f, 0.0f}, "m"};
    embs[1] = {"b", {3.0f, 4.0f}, "m"};  // normalized to (0.6, 0.8) at build

    std::vector<CitationRecord> cits(1);
    cits[0].article_id = "a";
    cits[0].cited_by_count = 12;

    const BuildSummary summary =
        build_store(meta, cits, embs, out, MetricKind::EuclideanOnUnitNorm, "fixture");
    CHECK(summary.written == 2);
    CHECK(summary.dropped_no_embedding == 1);
    CHECK(summary.without_citations == 1);

    const Corpus corpus = load_corpus(out);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.articles[0].id == "a");
    CHECK(corpus.articles[0].citations == 12);
    CHECK(corpus.articles[0].has_citation_data);
    CHECK(corpus.articles[1].id == "b");
    CHECK_FALSE(corpus.articles[1].has_citation_data);
    CHECK(corpus.articles[1].coords[0] == doctest::Approx(0.6f));
    CHECK(corpus.articles[1].coords[1] == doctest::Approx(0.8f));

    CHECK_THROWS_AS(build_store(meta, cits, {}, out, MetricKind::EuclideanOnUnitNorm, ""),
                    std::runtime_error);
}

TEST_CASE("full fixture pipeline equals a hand-assembled corpus") {
    const auto dir = fresh_dir("pipeline");
    HttpConfig cfg;
    cfg.cache_dir = dir;

    std::vector<MetadataRecord> records;
    {
        CachedHttp http(cfg, oai_transport());
        fetch_metadata(arxiv_config(), http,
                       [&](const MetadataRecord& r) { records.push_back(r); });
    }
    std::vector<CitationKey> keys;
    for (const auto& r : records) keys.push_back(citation_key(r));
    CitationConfig cc;
    cc.base_url = "http://fixture";
    std::vector<CitationRecord> citations;
    {
        CachedHttp http(cfg, openalex_transport());
        citations = fetch_citations(keys, cc, http);
    }
    std::vector<EmbeddingRequest> reqs;
    for (const auto& r : records) reqs.push_back({r.id, embedding_text(r)});
    EmbeddingConfig ec;
    ec.endpoint = "http://fixture/embed";
    ec.cache_dir = dir;
    std::vector<EmbeddingResult> embeddings;
    {
        CachedHttp http(cfg, embedding_transport());
        embeddings = embed_texts(reqs, ec, http);
    }
    const auto out = dir / "store";
    build_store(records, citations, embeddings, out, MetricKind::EuclideanOnUnitNorm, "p");

    const Corpus corpus = load_corpus(out);

    // Hand-assembled expectation: the fixture embeds each text onto a unit
    // basis axis keyed by its hash, and only the custom-DOI article has a
    // citation count.
    auto expect_article = [&](const MetadataRecord& r, int64_t citations, bool has_data) {
        Article a;
        a.id = r.id;
        a.published = r.published;
        a.source = r.source;
        a.citations = citations;
        a.has_citation_data = has_data;
        a.coords.assign(4, 0.0f);
        a.coords[fnv1a64(embedding_text(r)) % 4] = 1.0f;
        return a;
    };
    std::vector<Article> expected;
    for (const auto& r : records)
        expected.push_back(expect_article(r, r.id == "2001.00003" ? 7 : 0, r.id == "2001.00003"));
    const Corpus hand = make_corpus(4, MetricKind::EuclideanOnUnitNorm, std::move(expected), "p");

    REQUIRE(corpus.size() == hand.size());
    for (size_t i = 0; i < corpus.size(); ++i) {
        CHECK(corpus.articles[i].id == hand.articles[i].id);
        CHECK(corpus.articles[i].coords == hand.articles[i].coords);
        CHECK(corpus.articles[i].published == hand.articles[i].published);
        CHECK(corpus.articles[i].citations == hand.articles[i].citations);
        CHECK(corpus.articles[i].has_citation_data == hand.articles[i].has_citation_data);
        CHECK(corpus.articles[i].source == hand.articles[i].source);
    }
}

TEST_CASE("pubmed esearch/efetch flow parses records") {
    const auto dir = fresh_dir("pubmed");
    HttpConfig cfg;
    cfg.cache_dir = dir;
    Transport t = [](const std::string&, const std::string& url,
                     const std::string&) -> HttpResponse {
        if (url.find("esearch") != std::string::npos)
            return {200, R"({"esearchresult":{"count":"2","idlist":["111","222"]}})"};
        if (url.find("efetch") != std::string::npos)
            return {200, R"(<PubmedArticleSet>
<PubmedArticle><MedlineCitation><PMID>111</PMID>
<Article><ArticleTitle>Alpha</ArticleTitle>
<Abstract><AbstractText>First part.</AbstractText><AbstractText>Second part.</AbstractText></Abstract>
<ArticleDate><Year>2020</Year><Month>1</Month><Day>15</Day></ArticleDate></Article>
</MedlineCitation>
<PubmedData><ArticleIdList><ArticleId IdType="pubmed">111</ArticleId><ArticleId IdType="doi">10.99/alpha</ArticleId></ArticleIdList></PubmedData>
</PubmedArticle>
<PubmedArticle><MedlineCitation><PMID>222</PMID>
<Article><ArticleTitle>Beta</ArticleTitle></Article>
</MedlineCitation>
<PubmedData><History><PubMedPubDate PubStatus="pubmed"><Year>2020</Year><Month>2</Month><Day>3</Day></PubMedPubDate></History></PubmedData>
</PubmedArticle>
</PubmedArticleSet>)"};
        return {404, ""};
    };
    CachedHttp http(cfg, t);
    FetchConfig fc;
    fc.source = Source::PubMed;
    fc.from = Month::of(2020, 1);
    fc.to = Month::of(2020, 2);
    fc.base_url = "http://fixture/eutils";

    std::vector<MetadataRecord> recs;
    fetch_metadata(fc, http, [&](const MetadataRecord& r) { recs.push_back(r); });
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].id == "111");
    CHECK(recs[0].title == "Alpha");
    CHECK(recs[0].abstract_text == "First part. Second part.");
    CHECK(recs[0].published == Date::of(2020, 1, 15));
    CHECK(recs[0].doi == "10.99/alpha");
    CHECK(recs[1].id == "222");
    CHECK(recs[1].published == Date::of(2020, 2, 3));
}

}  // TEST_SUITE
