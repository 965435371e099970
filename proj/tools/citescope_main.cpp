// citescope: walk-forward evaluation of location predictions in the latent
// space of scientific-article embeddings.
//
// Subcommands: ingest, synth, backtest, grid, report.
// Exit codes: 0 success, 1 runtime error, 2 usage error, 3 partial grid
// failure.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "citescope/backtest.hpp"
#include "citescope/ingest.hpp"
#include "citescope/report.hpp"
#include "citescope/store.hpp"
#include "citescope/strfmt.hpp"
#include "citescope/synth.hpp"

namespace fs = std::filesystem;
using namespace citescope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPartial = 3;

Month parse_month_flag(const std::string& s, const std::string& flag) {
    auto m = Month::parse(s);
    if (!m) throw CLI::ValidationError(flag, "expected YYYY-MM, got '" + s + "'");
    return *m;
}

std::vector<Month> parse_month_list(const std::string& s, const std::string& flag) {
    std::vector<Month> out;
    for (const auto& tok : split(s, ',')) {
        if (trim(tok).empty()) continue;
        out.push_back(parse_month_flag(std::string(trim(tok)), flag));
    }
    return out;
}

// "start:end:step" ranges or comma lists of numbers.
std::vector<double> parse_grid_values(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        const auto parts = split(s, ':');
        if (parts.size() != 3) throw CLI::ValidationError(flag, "expected start:end:step");
        auto start = parse_double(parts[0]), end = parse_double(parts[1]),
             step = parse_double(parts[2]);
        if (!start || !end || !step || *step <= 0)
            throw CLI::ValidationError(flag, "expected numeric start:end:step with step > 0");
        for (double v = *start; v <= *end + 1e-12; v += *step) out.push_back(v);
        return out;
    }
    for (const auto& tok : split(s, ',')) {
        if (trim(tok).empty()) continue;
        auto v = parse_double(trim(tok));
        if (!v) throw CLI::ValidationError(flag, "bad number '" + std::string(trim(tok)) + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw CLI::ValidationError(flag, "empty value list");
    return out;
}

// Every run leaves the fully-resolved configuration and seed next to its
// outputs.
void write_run_config(const fs::path& out_dir, CLI::App& app, uint64_t seed) {
    fs::create_directories(out_dir);
    std::string cfg = app.config_to_str(true, true);
    cfg += "\n# resolved seed\nseed_value=" + std::to_string(seed) + "\n";
    write_text_file(out_dir / "run_config.ini", cfg);
}

struct BacktestFlags {
    std::string store, out, from = "2010-01", to = "2024-12";
    double eps = 0.035, top_p = 15.0;
    int horizon = 24;
    std::string predictor = "baseline";
    std::string predictions_path;
    double n_ratio = 100.0, jitter = 0.0, trend_top_p = 15.0;
    double hotspot_eps = 0.0;
    int hotspot_window = 12;
    uint32_t hotspot_keep = 0;
    uint64_t seed = 0;
    unsigned jobs = 0;
};

void add_predictor_flags(CLI::App* cmd, BacktestFlags& f) {
    cmd->add_option("--predictor", f.predictor,
                    "Predictor: baseline, baseline-top, hotspot, from-file")
        ->default_val(f.predictor);
    cmd->add_option("--predictions", f.predictions_path,
                    "Predictions file or per-cutoff directory (from-file)");
    cmd->add_option("--n-ratio", f.n_ratio, "Train articles per prediction")
        ->default_val(f.n_ratio);
    cmd->add_option("--jitter", f.jitter, "Baseline jitter sigma")->default_val(f.jitter);
    cmd->add_option("--trend-top-p", f.trend_top_p, "Trend baseline pool percentile")
        ->default_val(f.trend_top_p);
    cmd->add_option("--hotspot-eps", f.hotspot_eps, "Hotspot radius (0 = scoring eps)")
        ->default_val(f.hotspot_eps);
    cmd->add_option("--hotspot-window", f.hotspot_window, "Hotspot recent window, months")
        ->default_val(f.hotspot_window);
    cmd->add_option("--hotspot-keep", f.hotspot_keep,
                    "Hotspot predictions to keep (0 = ratio-derived)")
        ->default_val(f.hotspot_keep);
}

PredictorConfig predictor_config(const BacktestFlags& f) {
    auto kind = predictor_kind_from_string(f.predictor);
    if (!kind)
        throw CLI::ValidationError("--predictor", "unknown predictor '" + f.predictor + "'");
    PredictorConfig pc;
    pc.kind = *kind;
    pc.n_ratio = f.n_ratio;
    pc.jitter_sigma = f.jitter;
    pc.top_p_for_trend = f.trend_top_p;
    pc.hotspot.eps_h = f.hotspot_eps;
    pc.hotspot.recent_window_months = f.hotspot_window;
    pc.hotspot.n_keep = f.hotspot_keep;
    pc.predictions_path = f.predictions_path;
    if (pc.kind == PredictorKind::FromFile && f.predictions_path.empty())
        throw CLI::ValidationError("--predictions", "required for --predictor from-file");
    return pc;
}

BacktestParams backtest_params(const BacktestFlags& f) {
    BacktestParams p;
    p.cutoff_start = parse_month_flag(f.from, "--from");
    p.cutoff_end = parse_month_flag(f.to, "--to");
    p.scoring.eps = f.eps;
    p.scoring.top_p = f.top_p;
    p.scoring.horizon_months = f.horizon;
    p.predictor = predictor_config(f);
    p.seed = f.seed;
    p.jobs = f.jobs;
    return p;
}

std::vector<RocSeries> run_series(const BacktestRun& run) {
    RocSeries naive{run.predictor_tag, "naive", {}};
    RocSeries cluster{run.predictor_tag, "cluster", {}};
    for (const auto& m : run.months) {
        naive.points.push_back({m.metrics_naive.fpr, m.metrics_naive.tpr});
        cluster.points.push_back({m.metrics_cluster.fpr, m.metrics_cluster.tpr});
    }
    return {naive, cluster};
}

int cmd_synth(CLI::App& app, CLI::App* cmd) {
    static std::string out, births, from = "2015-01", to = "2024-12", metric = "euclidean-unit";
    static SynthSpec spec;
    cmd->add_option("--out", out, "Output store directory")->required();
    cmd->add_option("--dim", spec.dim, "Latent dimension")->default_val(spec.dim);
    cmd->add_option("--n-background", spec.n_background, "Background article count")
        ->default_val(spec.n_background);
    cmd->add_option("--n-clusters", spec.n_clusters, "Planted cluster count")
        ->default_val(spec.n_clusters);
    cmd->add_option("--n-per-cluster", spec.n_per_cluster, "Members per cluster")
        ->default_val(spec.n_per_cluster);
    cmd->add_option("--cluster-radius", spec.cluster_radius, "Cluster spread radius")
        ->default_val(spec.cluster_radius);
    cmd->add_option("--births", births, "Cluster birth months, comma-separated YYYY-MM");
    cmd->add_option("--growth-window", spec.growth_window_months,
                    "Months over which cluster members appear")
        ->default_val(spec.growth_window_months);
    cmd->add_option("--from", from, "Background range start (YYYY-MM)")->default_val(from);
    cmd->add_option("--to", to, "Background range end (YYYY-MM)")->default_val(to);
    cmd->add_option("--citation-alpha", spec.citation_alpha, "Citation power-law exponent")
        ->default_val(spec.citation_alpha);
    cmd->add_option("--boost", spec.boost_in_clusters, "Cluster citation boost")
        ->default_val(spec.boost_in_clusters);
    cmd->add_option("--metric", metric, "euclidean-unit or cosine")->default_val(metric);
    cmd->add_option("--seed", spec.seed, "Generator seed")->default_val(spec.seed)
        ->envname("CITESCOPE_SEED");

    cmd->callback([&app]() {
        spec.start = parse_month_flag(from, "--from");
        spec.end = parse_month_flag(to, "--to");
        spec.cluster_birth_months = parse_month_list(births, "--births");
        auto mk = metric_from_string(metric);
        if (!mk) throw CLI::ValidationError("--metric", "unknown metric '" + metric + "'");
        spec.metric = *mk;

        const Corpus corpus = synth_corpus(spec);
        store_write(corpus, out);
        write_text_file(fs::path(out) / "ground_truth.json", corpus.provenance + "\n");
        write_run_config(out, app, spec.seed);
        std::cout << "wrote " << corpus.size() << " articles to " << out << "\n";
    });
    return kExitOk;
}

int cmd_backtest(CLI::App& app, CLI::App* cmd, int& exit_code) {
    static BacktestFlags f;
    cmd->add_option("--store", f.store, "Vector store directory")->required();
    cmd->add_option("--out", f.out, "Output directory")->required();
    cmd->add_option("--eps", f.eps, "Latent-space radius")->default_val(f.eps);
    cmd->add_option("--top-p", f.top_p, "Target percentile in (0,100]")->default_val(f.top_p);
    cmd->add_option("--horizon", f.horizon, "Test window length, months")->default_val(f.horizon);
    cmd->add_option("--from", f.from, "First cutoff month")->default_val(f.from);
    cmd->add_option("--to", f.to, "Last cutoff month")->default_val(f.to);
    add_predictor_flags(cmd, f);
    cmd->add_option("--seed", f.seed, "Run seed")->default_val(f.seed)->envname("CITESCOPE_SEED");
    cmd->add_option("--jobs", f.jobs, "Worker threads (0 = cores)")
        ->default_val(f.jobs)
        ->envname("CITESCOPE_JOBS");

    cmd->callback([&app, &exit_code]() {
        const Corpus corpus = load_corpus(f.store);
        const BacktestParams params = backtest_params(f);
        const BacktestRun run = run_backtest(corpus, params);

        fs::create_directories(f.out);
        write_text_file(fs::path(f.out) / "report.csv", report_csv(run));
        write_text_file(fs::path(f.out) / "summary.json", summary_json(run));
        write_text_file(fs::path(f.out) / "roc.svg", roc_svg(run_series(run)));
        write_run_config(f.out, app, params.seed);

        std::cout << "backtest: " << run.months.size() << " months, "
                  << run.summary.months_skipped << " skipped";
        if (run.summary.fit_cluster)
            std::cout << ", cluster fit tpr = " << fmt_double(run.summary.fit_cluster->a)
                      << "*ln(fpr) + " << fmt_double(run.summary.fit_cluster->b);
        std::cout << "\n";
        for (const auto& w : run.summary.bias_warnings) std::cout << "warning: " << w << "\n";
        exit_code = kExitOk;
    });
    return kExitOk;
}

int cmd_grid(CLI::App& app, CLI::App* cmd, int& exit_code) {
    static BacktestFlags f;
    static std::string top_p_spec = "1:20:1", eps_spec = "0.02,0.035,0.075";
    static std::string predictors = "baseline";
    cmd->add_option("--store", f.store, "Vector store directory")->required();
    cmd->add_option("--out", f.out, "Output directory")->required();
    cmd->add_option("--top-p", top_p_spec, "Percentile grid: start:end:step or list")
        ->default_val(top_p_spec);
    cmd->add_option("--eps", eps_spec, "Radius grid: start:end:step or list")
        ->default_val(eps_spec);
    cmd->add_option("--predictors", predictors, "Comma list of predictors")
        ->default_val(predictors);
    cmd->add_option("--horizon", f.horizon, "Test window length, months")->default_val(f.horizon);
    cmd->add_option("--from", f.from, "First cutoff month")->default_val(f.from);
    cmd->add_option("--to", f.to, "Last cutoff month")->default_val(f.to);
    add_predictor_flags(cmd, f);
    cmd->get_option("--predictor")->description("Ignored by grid; use --predictors");
    cmd->add_option("--seed", f.seed, "Run seed")->default_val(f.seed)->envname("CITESCOPE_SEED");
    cmd->add_option("--jobs", f.jobs, "Worker threads (0 = cores)")
        ->default_val(f.jobs)
        ->envname("CITESCOPE_JOBS");

    cmd->callback([&app, &exit_code]() {
        const Corpus corpus = load_corpus(f.store);
        BacktestParams base = backtest_params(f);

        const auto top_p_grid = parse_grid_values(top_p_spec, "--top-p");
        const auto eps_grid = parse_grid_values(eps_spec, "--eps");
        std::vector<PredictorConfig> preds;
        for (const auto& name : split(predictors, ',')) {
            if (trim(name).empty()) continue;
            BacktestFlags pf = f;
            pf.predictor = std::string(trim(name));
            preds.push_back(predictor_config(pf));
        }
        if (preds.empty()) throw CLI::ValidationError("--predictors", "empty predictor list");

        const GridResult grid = grid_search(corpus, base, top_p_grid, eps_grid, preds);

        fs::create_directories(f.out);
        write_text_file(fs::path(f.out) / "cells.csv", report_csv(grid));
        write_text_file(fs::path(f.out) / "heat.csv", heat_csv(grid));
        write_text_file(fs::path(f.out) / "summary.json", summary_json(grid));
        write_run_config(f.out, app, base.seed);

        size_t failed = 0;
        for (const auto& c : grid.cells) failed += c.failed ? 1 : 0;
        std::cout << "grid: " << grid.cells.size() << " cells, " << failed << " failed, "
                  << grid.index_builds << " index builds\n";
        exit_code = grid.any_failed ? kExitPartial : kExitOk;
    });
    return kExitOk;
}

int cmd_ingest(CLI::App& app, CLI::App* cmd) {
    static std::string source = "arxiv-cs", from, to, out, cache;
    static std::string arxiv_base = "https://export.arxiv.org/oai2";
    static std::string pubmed_base = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils";
    static std::string openalex_base = "https://api.openalex.org";
    static std::string embed_endpoint, embed_model = "fixture-v1", contact;
    static std::string metric = "euclidean-unit";
    static size_t max_records = 0;
    static bool offline = false;

    cmd->add_option("--source", source, "arxiv-cs, arxiv-physics, arxiv-math, pubmed")
        ->default_val(source);
    cmd->add_option("--from", from, "Range start (YYYY-MM)")->required();
    cmd->add_option("--to", to, "Range end (YYYY-MM)")->required();
    cmd->add_option("--out", out, "Output store directory")->required();
    cmd->add_option("--cache", cache, "HTTP/embedding cache directory")->required()
        ->envname("CITESCOPE_CACHE");
    cmd->add_option("--arxiv-base", arxiv_base, "arXiv OAI endpoint")->default_val(arxiv_base);
    cmd->add_option("--pubmed-base", pubmed_base, "PubMed E-utilities base")
        ->default_val(pubmed_base);
    cmd->add_option("--openalex-base", openalex_base, "OpenAlex API base")
        ->default_val(openalex_base)
        ->envname("CITESCOPE_OPENALEX");
    cmd->add_option("--embed-endpoint", embed_endpoint, "Embedding provider POST endpoint")
        ->required()
        ->envname("CITESCOPE_EMBED_ENDPOINT");
    cmd->add_option("--embed-model", embed_model, "Embedding model tag")->default_val(embed_model);
    cmd->add_option("--contact", contact, "Contact email for the polite pool")
        ->envname("CITESCOPE_CONTACT");
    cmd->add_option("--metric", metric, "euclidean-unit or cosine")->default_val(metric);
    cmd->add_option("--max-records", max_records, "Stop after N records (0 = all)")
        ->default_val(max_records);
    cmd->add_flag("--offline", offline, "Serve everything from the cache; fail on misses");

    cmd->callback([&app]() {
        auto src = source_from_string(source);
        if (!src) throw CLI::ValidationError("--source", "unknown source '" + source + "'");
        auto mk = metric_from_string(metric);
        if (!mk) throw CLI::ValidationError("--metric", "unknown metric '" + metric + "'");

        ingest::HttpConfig http_cfg;
        http_cfg.cache_dir = cache;
        ingest::CachedHttp http(http_cfg,
                                offline ? ingest::dead_transport() : ingest::live_transport());

        ingest::FetchConfig fetch_cfg;
        fetch_cfg.source = *src;
        fetch_cfg.from = parse_month_flag(from, "--from");
        fetch_cfg.to = parse_month_flag(to, "--to");
        fetch_cfg.base_url = *src == Source::PubMed ? pubmed_base : arxiv_base;
        fetch_cfg.max_records = max_records;

        std::vector<ingest::MetadataRecord> records;
        const auto stats = ingest::fetch_metadata(
            fetch_cfg, http, [&](const ingest::MetadataRecord& r) { records.push_back(r); });
        std::cout << "fetched " << stats.records << " records (" << stats.pages << " pages, "
                  << stats.skipped << " skipped)\n";

        std::vector<ingest::CitationKey> keys;
        keys.reserve(records.size());
        for (const auto& r : records) keys.push_back(ingest::citation_key(r));
        ingest::CitationConfig cit_cfg;
        cit_cfg.base_url = openalex_base;
        cit_cfg.contact_email = contact;
        const auto citations = ingest::fetch_citations(keys, cit_cfg, http);

        std::vector<ingest::EmbeddingRequest> reqs;
        reqs.reserve(records.size());
        for (const auto& r : records) reqs.push_back({r.id, ingest::embedding_text(r)});
        ingest::EmbeddingConfig emb_cfg;
        emb_cfg.endpoint = embed_endpoint;
        emb_cfg.model_tag = embed_model;
        emb_cfg.cache_dir = cache;
        const auto embeddings = ingest::embed_texts(reqs, emb_cfg, http);

        const auto summary = ingest::build_store(
            records, citations, embeddings, out, *mk,
            "ingest " + source + " " + from + ".." + to + " model=" + embed_model);
        write_run_config(out, app, 0);
        std::cout << "store: " << summary.written << " articles ("
                  << summary.dropped_no_embedding << " dropped without embeddings, "
                  << summary.without_citations << " without citation data)\n";
    });
    return kExitOk;
}

int cmd_report(CLI::App& app, CLI::App* cmd) {
    static std::string in, baseline, out;
    cmd->add_option("--in", in, "Report CSV (the algorithm when --baseline is given)")
        ->required();
    cmd->add_option("--baseline", baseline, "Baseline report CSV for comparison");
    cmd->add_option("--out", out, "Output directory")->required();

    cmd->callback([&app]() {
        std::vector<RocSeries> series = parse_report_csv(read_text_file(in));
        if (!baseline.empty()) {
            for (auto& s : parse_report_csv(read_text_file(baseline))) {
                s.predictor += " (baseline)";
                series.push_back(std::move(s));
            }
        }
        fs::create_directories(out);
        write_text_file(fs::path(out) / "roc.svg", roc_svg(series));

        // Pooled fits per series.
        nlohmann::json fits = nlohmann::json::object();
        for (const auto& s : series) {
            const auto fit = log_fit(s.points);
            if (!fit) continue;
            fits[s.predictor + "/" + s.scorer] = {{"a", fit->a},
                                                  {"b", fit->b},
                                                  {"n_points", fit->n_points},
                                                  {"residual_rms", fit->residual_rms}};
        }
        write_text_file(fs::path(out) / "fits.json", fits.dump(2) + "\n");
        write_run_config(out, app, 0);
        std::cout << "report: " << series.size() << " series\n";
    });
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-space citation backtesting engine"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (key=value); flags win");
    app.allow_config_extras(false);

    int exit_code = kExitOk;
    cmd_synth(app, app.add_subcommand("synth", "Generate a synthetic corpus store"));
    cmd_backtest(app, app.add_subcommand("backtest", "Walk-forward monthly backtest"),
                 exit_code);
    cmd_grid(app, app.add_subcommand("grid", "Grid search over (top-P, eps, predictor)"),
             exit_code);
    cmd_ingest(app, app.add_subcommand("ingest", "Build a store from live or cached sources"));
    cmd_report(app,
               app.add_subcommand("report", "Re-plot report CSVs and compare against a baseline"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return exit_code;
}
