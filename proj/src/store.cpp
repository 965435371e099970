#include "citescope/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "citescope/strfmt.hpp"

namespace citescope {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'C', 'V'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
    return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

uint64_t get_u64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StoreError("cannot open " + p.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

void write_file(const std::filesystem::path& p, const std::string& data) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot open " + p.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw StoreError("write failed for " + p.string());
}

std::string meta_line(const Article& a) {
    std::string line = "{\"id\":\"" + json_escape(a.id) + "\",\"published\":\"" +
                       a.published.str() + "\",\"citations\":" + std::to_string(a.citations) +
                       ",\"has_citation_data\":" + (a.has_citation_data ? "true" : "false") +
                       ",\"source\":\"" + std::string(to_string(a.source)) + "\"}";
    return line;
}

}  // namespace

void store_write(const Corpus& corpus, const std::filesystem::path& store_path) {
    // Reject non-finite coordinates before creating any file.
    for (const Article& a : corpus.articles) {
        if (a.coords.size() != corpus.dim)
            throw StoreError("article '" + a.id + "': dimension mismatch");
        for (float c : a.coords)
            if (!std::isfinite(c)) throw StoreError("article '" + a.id + "': non-finite coordinate");
    }

    std::filesystem::create_directories(store_path);

    std::string vec;
    vec.reserve(16 + corpus.articles.size() * corpus.dim * 4);
    vec.append(kMagic, 4);
    put_u32(vec, kVersion);
    put_u32(vec, corpus.dim);
    put_u64(vec, corpus.articles.size());
    for (const Article& a : corpus.articles)
        for (float c : a.coords) put_u32(vec, std::bit_cast<uint32_t>(c));

    std::string meta;
    for (const Article& a : corpus.articles) {
        meta += meta_line(a);
        meta += '\n';
    }

    std::string prov = "{\"metric\":\"" + std::string(to_string(corpus.metric)) +
                       "\",\"provenance\":\"" + json_escape(corpus.provenance) + "\"}\n";

    write_file(store_path / "vectors.lsc", vec);
    write_file(store_path / "meta.jsonl", meta);
    write_file(store_path / "provenance.json", prov);
}

Corpus load_corpus(const std::filesystem::path& store_path) {
    const std::string vec = read_file(store_path / "vectors.lsc");
    if (vec.size() < 20) throw StoreError("vectors.lsc: truncated header");
    const auto* p = reinterpret_cast<const unsigned char*>(vec.data());
    if (std::memcmp(p, kMagic, 4) != 0) throw StoreError("vectors.lsc: bad magic");
    const uint32_t version = get_u32(p + 4);
    if (version != kVersion)
        throw StoreError("vectors.lsc: unsupported version " + std::to_string(version));
    const uint32_t dim = get_u32(p + 8);
    const uint64_t count = get_u64(p + 12);
    const uint64_t expect = 20 + count * uint64_t(dim) * 4;
    if (vec.size() != expect)
        throw StoreError("vectors.lsc: size " + std::to_string(vec.size()) + ", expected " +
                         std::to_string(expect));

    const std::string meta = read_file(store_path / "meta.jsonl");
    std::vector<Article> articles;
    articles.reserve(count);
    size_t line_no = 0;
    size_t start = 0;
    size_t off = 20;
    while (start < meta.size()) {
        size_t end = meta.find('\n', start);
        if (end == std::string::npos) end = meta.size();
        std::string_view line = trim(std::string_view(meta).substr(start, end - start));
        start = end + 1;
        if (line.empty()) continue;
        ++line_no;
        if (line_no > count)
            throw StoreError("meta.jsonl: more records than vectors.lsc count " +
                             std::to_string(count));

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw StoreError("meta.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }

        Article a;
        try {
            a.id = j.at("id").get<std::string>();
            auto pub = Date::parse(j.at("published").get<std::string>());
            if (!pub)
                throw StoreError("meta.jsonl line " + std::to_string(line_no) +
                                 ": bad published date");
            a.published = *pub;
            a.citations = j.at("citations").get<int64_t>();
            a.has_citation_data = j.at("has_citation_data").get<bool>();
            auto src = source_from_string(j.at("source").get<std::string>());
            if (!src)
                throw StoreError("meta.jsonl line " + std::to_string(line_no) + ": bad source '" +
                                 j.at("source").get<std::string>() + "'");
            a.source = *src;
        } catch (const nlohmann::json::exception& e) {
            throw StoreError("meta.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }

        a.coords.resize(dim);
        for (uint32_t k = 0; k < dim; ++k) {
            a.coords[k] = std::bit_cast<float>(
                get_u32(reinterpret_cast<const unsigned char*>(vec.data()) + off));
            off += 4;
        }
        articles.push_back(std::move(a));
    }
    if (line_no != count)
        throw StoreError("meta.jsonl has " + std::to_string(line_no) + " records, vectors.lsc has " +
                         std::to_string(count));

    MetricKind metric = MetricKind::EuclideanOnUnitNorm;
    std::string provenance;
    const auto prov_path = store_path / "provenance.json";
    if (std::filesystem::exists(prov_path)) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(prov_path));
        } catch (const nlohmann::json::exception& e) {
            throw StoreError(std::string("provenance.json: ") + e.what());
        }
        if (j.contains("metric")) {
            auto m = metric_from_string(j["metric"].get<std::string>());
            if (!m) throw StoreError("provenance.json: unknown metric");
            metric = *m;
        }
        if (j.contains("provenance")) provenance = j["provenance"].get<std::string>();
    }

    try {
        return make_corpus(dim, metric, std::move(articles), std::move(provenance));
    } catch (const std::invalid_argument& e) {
        throw StoreError(e.what());
    }
}

}  // namespace citescope
