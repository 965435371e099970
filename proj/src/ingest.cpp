#include "citescope/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "citescope/metric.hpp"
#include "citescope/rng.hpp"
#include "citescope/strfmt.hpp"
#include "citescope/xmlmini.hpp"

namespace citescope::ingest {

namespace {

int days_in_month(int year, int month) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) return 29;
    return days[month - 1];
}

std::string url_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
            out += static_cast<char>(c);
        else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xf];
        }
    }
    return out;
}

std::string now_rfc3339() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_if_exists(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return {};
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_atomic(const std::filesystem::path& p, const std::string& data) {
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
    }
    std::filesystem::rename(tmp, p);
}

}  // namespace

Transport live_transport() {
    return [](const std::string& method, const std::string& url,
              const std::string& body) -> HttpResponse {
        // Split scheme://host[:port]/path?query
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw std::runtime_error("bad url " + url);
        const auto path_begin = url.find('/', scheme_end + 3);
        const std::string origin = path_begin == std::string::npos ? url : url.substr(0, path_begin);
        const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);

        httplib::Client client(origin);
        client.set_connection_timeout(30);
        client.set_read_timeout(60);
        client.set_follow_location(true);

        httplib::Result res = method == "POST"
                                  ? client.Post(path, body, "application/json")
                                  : client.Get(path);
        if (!res) throw std::runtime_error("transport error for " + url + ": " +
                                           httplib::to_string(res.error()));
        return {res->status, res->body};
    };
}

Transport dead_transport() {
    return [](const std::string&, const std::string& url, const std::string&) -> HttpResponse {
        throw std::runtime_error("network disabled; uncached request to " + url);
    };
}

CachedHttp::CachedHttp(HttpConfig config, Transport transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
    if (config_.cache_dir.empty()) throw std::invalid_argument("http cache_dir is required");
    std::filesystem::create_directories(config_.cache_dir / "http");
}

std::string CachedHttp::get(const std::string& url) { return request("GET", url, ""); }

std::string CachedHttp::post(const std::string& url, const std::string& body) {
    return request("POST", url, body);
}

std::string CachedHttp::request(const std::string& method, const std::string& url,
                                const std::string& body) {
    const std::string key = method + "\n" + url + "\n" + body;
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key)));
    const auto path = config_.cache_dir / "http" / (std::string(name) + ".resp");

    {
        std::lock_guard<std::mutex> lock(cache_mu_);
        if (std::filesystem::exists(path)) return read_if_exists(path);
    }

    int backoff = config_.initial_backoff_ms;
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
        HttpResponse res;
        try {
            ++transport_calls_;
            res = transport_(method, url, body);
        } catch (const std::exception& e) {
            last_error = e.what();
            continue;
        }
        if (res.status == 429 || res.status >= 500) {
            last_error = "http status " + std::to_string(res.status);
            continue;
        }
        if (res.status < 200 || res.status >= 300)
            throw std::runtime_error("http status " + std::to_string(res.status) + " for " + url);

        std::lock_guard<std::mutex> lock(cache_mu_);
        write_atomic(path, res.body);
        return res.body;
    }
    throw std::runtime_error("request failed after " + std::to_string(config_.max_retries + 1) +
                             " attempts for " + url + ": " + last_error);
}

namespace {

// ------------------------- arXiv OAI-PMH ---------------------------------

std::optional<MetadataRecord> parse_oai_record(std::string_view record_xml, Source source) {
    if (auto header = xmlmini::first_open_tag(record_xml, "header");
        header && header->find("status=\"deleted\"") != std::string_view::npos)
        return std::nullopt;
    const auto meta = xmlmini::first_block(record_xml, "metadata");
    if (!meta) return std::nullopt;

    MetadataRecord rec;
    rec.source = source;
    if (auto id = xmlmini::first_block(*meta, "id")) rec.id = xmlmini::text(*id);
    if (auto title = xmlmini::first_block(*meta, "title")) rec.title = xmlmini::text(*title);
    if (auto abs = xmlmini::first_block(*meta, "abstract"))
        rec.abstract_text = xmlmini::text(*abs);
    if (auto doi = xmlmini::first_block(*meta, "doi")) rec.doi = xmlmini::text(*doi);
    if (auto created = xmlmini::first_block(*meta, "created")) {
        auto d = Date::parse(xmlmini::text(*created));
        if (d) rec.published = *d;
        else return std::nullopt;
    } else {
        return std::nullopt;
    }
    if (rec.id.empty()) return std::nullopt;
    return rec;
}

const char* arxiv_set(Source source) {
    switch (source) {
        case Source::ArxivCS: return "cs";
        case Source::ArxivPhysics: return "physics";
        case Source::ArxivMath: return "math";
        default: return "cs";
    }
}

FetchStats fetch_arxiv(const FetchConfig& config, CachedHttp& http,
                       const std::function<void(const MetadataRecord&)>& sink) {
    FetchStats stats;
    const std::string from_date = config.from.str() + "-01";
    char until_buf[32];
    std::snprintf(until_buf, sizeof(until_buf), "%04d-%02d-%02d", config.to.year(),
                  config.to.month(), days_in_month(config.to.year(), config.to.month()));

    std::string url = config.base_url + "?verb=ListRecords&metadataPrefix=arXiv&set=" +
                      arxiv_set(config.source) + "&from=" + from_date + "&until=" + until_buf;
    while (true) {
        const std::string page = http.get(url);
        ++stats.pages;
        if (auto err = xmlmini::first_block(page, "error"))
            throw std::runtime_error("OAI error response: " + xmlmini::text(*err));
        for (std::string_view rec_xml : xmlmini::blocks(page, "record")) {
            auto rec = parse_oai_record(rec_xml, config.source);
            if (!rec) {
                ++stats.skipped;
                continue;
            }
            sink(*rec);
            ++stats.records;
            if (config.max_records && stats.records >= config.max_records) return stats;
        }
        const auto token = xmlmini::first_block(page, "resumptionToken");
        if (!token || xmlmini::text(*token).empty()) break;
        url = config.base_url + "?verb=ListRecords&resumptionToken=" +
              url_encode(xmlmini::text(*token));
    }
    return stats;
}

// ------------------------- PubMed E-utilities ----------------------------

std::optional<MetadataRecord> parse_pubmed_article(std::string_view art_xml) {
    MetadataRecord rec;
    rec.source = Source::PubMed;
    if (auto pmid = xmlmini::first_block(art_xml, "PMID")) rec.id = xmlmini::text(*pmid);
    if (auto title = xmlmini::first_block(art_xml, "ArticleTitle"))
        rec.title = xmlmini::text(*title);
    std::string abs;
    for (auto part : xmlmini::blocks(art_xml, "AbstractText")) {
        if (!abs.empty()) abs += ' ';
        abs += xmlmini::text(part);
    }
    rec.abstract_text = abs;
    for (auto aid : xmlmini::blocks(art_xml, "ArticleId")) {
        // The IdType attribute lives on the open tag, which blocks() strips;
        // DOIs are recognizable by shape.
        const std::string v = xmlmini::text(aid);
        if (v.starts_with("10.") && v.find('/') != std::string::npos) {
            rec.doi = v;
            break;
        }
    }
    // First public availability: ArticleDate when present, else the earliest
    // PubMedPubDate.
    auto read_date = [](std::string_view block) -> std::optional<Date> {
        auto y = xmlmini::first_block(block, "Year");
        auto m = xmlmini::first_block(block, "Month");
        auto d = xmlmini::first_block(block, "Day");
        if (!y || !m) return std::nullopt;
        auto yi = parse_int64(trim(*y));
        auto mi = parse_int64(trim(*m));
        auto di = d ? parse_int64(trim(*d)) : std::optional<int64_t>(1);
        if (!yi || !mi || !di || *mi < 1 || *mi > 12 || *di < 1 || *di > 31) return std::nullopt;
        return Date::of(static_cast<int>(*yi), static_cast<int>(*mi), static_cast<int>(*di));
    };
    std::optional<Date> when;
    if (auto ad = xmlmini::first_block(art_xml, "ArticleDate")) when = read_date(*ad);
    if (!when) {
        for (auto pd : xmlmini::blocks(art_xml, "PubMedPubDate")) {
            auto d = read_date(pd);
            if (d && (!when || *d < *when)) when = d;
        }
    }
    if (!when || rec.id.empty()) return std::nullopt;
    rec.published = *when;
    return rec;
}

FetchStats fetch_pubmed(const FetchConfig& config, CachedHttp& http,
                        const std::function<void(const MetadataRecord&)>& sink) {
    FetchStats stats;
    const std::string term = url_encode(
        "(\"" + std::to_string(config.from.year()) + "/" + std::to_string(config.from.month()) +
        "/01\"[PDAT] : \"" + std::to_string(config.to.year()) + "/" +
        std::to_string(config.to.month()) + "/" +
        std::to_string(days_in_month(config.to.year(), config.to.month())) + "\"[PDAT])");

    const size_t page_size = 200;
    size_t retstart = 0;
    while (true) {
        const std::string url = config.base_url + "/esearch.fcgi?db=pubmed&retmode=json&retmax=" +
                                std::to_string(page_size) + "&retstart=" +
                                std::to_string(retstart) + "&term=" + term;
        const std::string body = http.get(url);
        ++stats.pages;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("esearch: malformed response: ") + e.what());
        }
        const auto& result = j.at("esearchresult");
        std::vector<std::string> ids;
        for (const auto& id : result.at("idlist")) ids.push_back(id.get<std::string>());
        if (ids.empty()) break;

        std::string joined;
        for (const auto& id : ids) {
            if (!joined.empty()) joined += ',';
            joined += id;
        }
        const std::string fetch_url =
            config.base_url + "/efetch.fcgi?db=pubmed&retmode=xml&id=" + joined;
        const std::string xml = http.get(fetch_url);
        ++stats.pages;
        for (auto art : xmlmini::blocks(xml, "PubmedArticle")) {
            auto rec = parse_pubmed_article(art);
            if (!rec) {
                ++stats.skipped;
                continue;
            }
            sink(*rec);
            ++stats.records;
            if (config.max_records && stats.records >= config.max_records) return stats;
        }

        retstart += ids.size();
        const size_t total = static_cast<size_t>(
            parse_int64(result.at("count").get<std::string>()).value_or(0));
        if (retstart >= total) break;
    }
    return stats;
}

}  // namespace

FetchStats fetch_metadata(const FetchConfig& config, CachedHttp& http,
                          const std::function<void(const MetadataRecord&)>& sink) {
    if (config.to < config.from) return {};
    if (config.base_url.empty()) throw std::invalid_argument("fetch_metadata: base_url required");

    // Page responses are cached by URL (the resumption chain doubles as a
    // cursor), so an interrupted run resumes from the first uncached page
    // and a completed range replays without touching the network. The
    // cursor file records completion on top of that.
    const auto cursor_dir = http.cache_dir() / "cursor";
    std::filesystem::create_directories(cursor_dir);
    char name[32];
    std::snprintf(name, sizeof(name), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(std::string(to_string(config.source)) + "|" + config.from.str() +
                              "|" + config.to.str() + "|" + config.base_url)));
    const auto cursor_path = cursor_dir / (std::string(name) + ".json");

    FetchStats stats;
    if (config.source == Source::PubMed)
        stats = fetch_pubmed(config, http, sink);
    else
        stats = fetch_arxiv(config, http, sink);

    write_atomic(cursor_path, std::string("{\"done\":true,\"pages\":") +
                                  std::to_string(stats.pages) +
                                  ",\"records\":" + std::to_string(stats.records) + "}\n");
    return stats;
}

CitationKey citation_key(const MetadataRecord& record) {
    CitationKey key;
    key.article_id = record.id;
    if (!record.doi.empty()) {
        key.external_id = record.doi;
        key.is_doi = true;
    } else if (record.source == Source::PubMed) {
        key.external_id = record.id;
        key.is_doi = false;
    } else {
        // Every arXiv article carries the canonical DataCite DOI.
        key.external_id = "10.48550/arXiv." + record.id;
        key.is_doi = true;
    }
    return key;
}

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// OpenAlex serializes DOIs as "https://doi.org/<doi>" and PMIDs as
// "https://pubmed.ncbi.nlm.nih.gov/<pmid>".
std::string strip_id_url(const std::string& value) {
    const auto pos = value.rfind('/');
    if (value.starts_with("https://doi.org/")) return value.substr(16);
    if (pos != std::string::npos && value.find("pubmed") != std::string::npos)
        return value.substr(pos + 1);
    return value;
}

}  // namespace

std::vector<CitationRecord> fetch_citations(const std::vector<CitationKey>& keys,
                                            const CitationConfig& config, CachedHttp& http) {
    std::vector<CitationRecord> out;
    if (keys.empty()) return out;
    const size_t batch_size = std::min<size_t>(config.batch_size == 0 ? 50 : config.batch_size, 50);

    // Batches are homogeneous in key kind so one filter clause serves all.
    std::vector<size_t> doi_keys, pmid_keys;
    for (size_t i = 0; i < keys.size(); ++i)
        (keys[i].is_doi ? doi_keys : pmid_keys).push_back(i);

    std::unordered_map<std::string, int64_t> counts;
    auto run_batches = [&](const std::vector<size_t>& idxs, const char* filter_name) {
        for (size_t start = 0; start < idxs.size(); start += batch_size) {
            const size_t end = std::min(idxs.size(), start + batch_size);
            std::string filter;
            for (size_t k = start; k < end; ++k) {
                if (!filter.empty()) filter += '|';
                filter += keys[idxs[k]].external_id;
            }
            std::string url = config.base_url + "/works?filter=" + filter_name + ":" +
                              url_encode(filter) + "&per-page=" + std::to_string(batch_size) +
                              "&select=doi,ids,cited_by_count";
            if (!config.contact_email.empty()) url += "&mailto=" + url_encode(config.contact_email);

            const std::string body = http.get(url);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(body);
                for (const auto& work : j.at("results")) {
                    std::optional<int64_t> count;
                    if (work.contains("cited_by_count") && work["cited_by_count"].is_number())
                        count = work["cited_by_count"].get<int64_t>();
                    if (!count) continue;
                    if (work.contains("doi") && work["doi"].is_string())
                        counts[lower(strip_id_url(work["doi"].get<std::string>()))] = *count;
                    if (work.contains("ids") && work["ids"].contains("pmid"))
                        counts[strip_id_url(work["ids"]["pmid"].get<std::string>())] = *count;
                }
            } catch (const nlohmann::json::exception& e) {
                throw std::runtime_error("citation batch [" + filter +
                                         "]: malformed response: " + e.what());
            }
        }
    };
    run_batches(doi_keys, "doi");
    run_batches(pmid_keys, "pmid");

    const std::string fetched_at = now_rfc3339();
    out.reserve(keys.size());
    for (const auto& key : keys) {
        CitationRecord rec;
        rec.article_id = key.article_id;
        rec.external_id = key.external_id;
        rec.fetched_at = fetched_at;
        const auto it = counts.find(key.is_doi ? lower(key.external_id) : key.external_id);
        if (it != counts.end()) rec.cited_by_count = it->second;
        out.push_back(std::move(rec));
    }
    return out;
}

std::string embedding_text(const MetadataRecord& record) {
    return record.title + "\n\n" + record.abstract_text;
}

std::vector<EmbeddingResult> embed_texts(const std::vector<EmbeddingRequest>& requests,
                                         const EmbeddingConfig& config, CachedHttp& http) {
    std::vector<EmbeddingResult> out(requests.size());
    if (requests.empty()) return out;
    if (config.cache_dir.empty()) throw std::invalid_argument("embed_texts: cache_dir required");

    const auto cache_root = config.cache_dir / "emb" / config.model_tag;
    std::filesystem::create_directories(cache_root);
    auto cache_path = [&](const std::string& text) {
        char name[32];
        std::snprintf(name, sizeof(name), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(text)));
        return cache_root / (std::string(name) + ".json");
    };

    std::vector<size_t> misses;
    for (size_t i = 0; i < requests.size(); ++i) {
        out[i].article_id = requests[i].article_id;
        out[i].model_tag = config.model_tag;
        const std::string cached = read_if_exists(cache_path(requests[i].text));
        if (cached.empty()) {
            misses.push_back(i);
            continue;
        }
        const nlohmann::json j = nlohmann::json::parse(cached);
        out[i].coords = j.get<std::vector<float>>();
    }

    const size_t batch_size = config.batch_size == 0 ? 16 : config.batch_size;
    for (size_t start = 0; start < misses.size(); start += batch_size) {
        const size_t end = std::min(misses.size(), start + batch_size);
        nlohmann::json req = {{"model_tag", config.model_tag},
                              {"texts", nlohmann::json::array()}};
        for (size_t k = start; k < end; ++k) req["texts"].push_back(requests[misses[k]].text);

        const std::string body = http.post(config.endpoint, req.dump());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(std::string("embedding provider: malformed response: ") +
                                     e.what());
        }
        const auto& vectors = j.at("vectors");
        if (vectors.size() != end - start)
            throw std::runtime_error("embedding provider returned " +
                                     std::to_string(vectors.size()) + " vectors for " +
                                     std::to_string(end - start) + " texts");
        for (size_t k = start; k < end; ++k) {
            const size_t i = misses[k];
            out[i].coords = vectors[k - start].get<std::vector<float>>();
            write_atomic(cache_path(requests[i].text),
                         nlohmann::json(out[i].coords).dump());
        }
    }

    // Dimension drift corrupts a corpus; fail hard.
    size_t dim = 0;
    for (const auto& r : out) {
        if (r.coords.empty())
            throw std::runtime_error("embedding missing for article " + r.article_id);
        for (float c : r.coords)
            if (!std::isfinite(c))
                throw std::runtime_error("non-finite embedding for article " + r.article_id);
        if (dim == 0) dim = r.coords.size();
        if (r.coords.size() != dim)
            throw std::runtime_error("embedding dimension drift: article " + r.article_id +
                                     " has " + std::to_string(r.coords.size()) + ", expected " +
                                     std::to_string(dim));
    }
    return out;
}

BuildSummary build_store(const std::vector<MetadataRecord>& metadata,
                         const std::vector<CitationRecord>& citations,
                         const std::vector<EmbeddingResult>& embeddings,
                         const std::filesystem::path& out_path, MetricKind metric,
                         const std::string& provenance) {
    std::unordered_map<std::string, const EmbeddingResult*> by_embedding;
    for (const auto& e : embeddings) by_embedding[e.article_id] = &e;
    std::unordered_map<std::string, const CitationRecord*> by_citation;
    for (const auto& c : citations) by_citation[c.article_id] = &c;

    BuildSummary summary;
    std::vector<Article> articles;
    uint32_t dim = 0;
    for (const auto& rec : metadata) {
        const auto emb = by_embedding.find(rec.id);
        if (emb == by_embedding.end()) {
            ++summary.dropped_no_embedding;
            continue;
        }
        Article a;
        a.id = rec.id;
        a.published = rec.published;
        a.source = rec.source;

        // Unit-normalize once at build; distances are then comparable across
        // corpora and the stored eps values keep their meaning.
        const auto& coords = emb->second->coords;
        if (dim == 0) dim = static_cast<uint32_t>(coords.size());
        std::vector<double> normed(coords.size());
        normalize_l2(coords, normed);
        a.coords.resize(coords.size());
        for (size_t d = 0; d < coords.size(); ++d) a.coords[d] = static_cast<float>(normed[d]);

        const auto cit = by_citation.find(rec.id);
        if (cit != by_citation.end() && cit->second->cited_by_count) {
            a.citations = *cit->second->cited_by_count;
            a.has_citation_data = true;
        } else {
            a.citations = 0;
            a.has_citation_data = false;
            ++summary.without_citations;
        }
        articles.push_back(std::move(a));
    }
    if (articles.empty()) throw std::runtime_error("build_store: join produced zero articles");

    summary.written = articles.size();
    const Corpus corpus = make_corpus(dim, metric, std::move(articles), provenance);
    store_write(corpus, out_path);
    return summary;
}

}  // namespace citescope::ingest
