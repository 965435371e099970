#include "citescope/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "citescope/strfmt.hpp"

namespace citescope {

const char* const kReportCsvHeader =
    "cutoff,predictor,scorer,eps,top_p,n_train,n_test,n_targets,n_predictions,"
    "tp,fp,fn,tn,tpr,fpr,precision,recall,f1,mcc,accuracy,amplification,warnings";

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void append_month_rows(std::string& out, const MonthResult& m, double eps, double top_p) {
    for (int scorer = 0; scorer < 2; ++scorer) {
        const bool cluster = scorer == 1;
        const ConfusionCounts& c = cluster ? m.counts_cluster : m.counts_naive;
        const MetricSet& s = cluster ? m.metrics_cluster : m.metrics_naive;
        std::string warnings;
        for (const auto& w : m.warnings) {
            if (!warnings.empty()) warnings += "; ";
            warnings += w;
        }
        out += m.cutoff.str();
        out += ',';
        out += csv_quote(m.predictor_tag);
        out += ',';
        out += cluster ? "cluster" : "naive";
        out += ',';
        out += fmt_double(eps);
        out += ',';
        out += fmt_double(top_p);
        out += ',';
        out += std::to_string(m.n_train);
        out += ',';
        out += std::to_string(m.n_test);
        out += ',';
        out += std::to_string(m.n_targets);
        out += ',';
        out += std::to_string(m.n_predictions);
        out += ',';
        out += std::to_string(c.tp);
        out += ',';
        out += std::to_string(c.fp);
        out += ',';
        out += std::to_string(c.fn);
        out += ',';
        out += std::to_string(c.tn);
        out += ',';
        out += fmt_opt(s.tpr);
        out += ',';
        out += fmt_opt(s.fpr);
        out += ',';
        out += fmt_opt(s.precision);
        out += ',';
        out += fmt_opt(s.recall);
        out += ',';
        out += fmt_opt(s.f1);
        out += ',';
        out += fmt_opt(s.mcc);
        out += ',';
        out += fmt_opt(s.accuracy);
        out += ',';
        out += fmt_opt(m.amplification);
        out += ',';
        out += csv_quote(warnings);
        out += '\n';
    }
}

nlohmann::json fit_json(const std::optional<LogFit>& fit) {
    if (!fit) return nullptr;
    return {{"a", fit->a},
            {"b", fit->b},
            {"n_points", fit->n_points},
            {"n_excluded", fit->n_excluded},
            {"residual_rms", fit->residual_rms},
            {"fpr_min", fit->fpr_min},
            {"fpr_max", fit->fpr_max}};
}

nlohmann::json opt_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    return *v;
}

nlohmann::json mean_json(const MeanMetrics& m) {
    return {{"tpr", opt_json(m.tpr)},           {"fpr", opt_json(m.fpr)},
            {"precision", opt_json(m.precision)}, {"recall", opt_json(m.recall)},
            {"f1", opt_json(m.f1)},             {"mcc", opt_json(m.mcc)},
            {"accuracy", opt_json(m.accuracy)},  {"n_months", m.n_months}};
}

nlohmann::json summary_block(const BacktestSummary& s) {
    return {{"fit_naive", fit_json(s.fit_naive)},
            {"fit_cluster", fit_json(s.fit_cluster)},
            {"mean_naive", mean_json(s.mean_naive)},
            {"mean_cluster", mean_json(s.mean_cluster)},
            {"months_run", s.months_run},
            {"months_skipped", s.months_skipped},
            {"median_amplification", opt_json(s.median_amplification)},
            {"warnings", s.bias_warnings}};
}

}  // namespace

std::string report_csv(const BacktestRun& run) {
    std::string out = kReportCsvHeader;
    out += '\n';
    for (const MonthResult& m : run.months)
        append_month_rows(out, m, run.params.scoring.eps, run.params.scoring.top_p);
    return out;
}

std::string report_csv(const GridResult& grid) {
    std::string out = kReportCsvHeader;
    out += '\n';
    for (const GridCell& cell : grid.cells)
        for (const MonthResult& m : cell.months) append_month_rows(out, m, cell.eps, cell.top_p);
    return out;
}

std::string heat_csv(const GridResult& grid) {
    std::string out = "predictor,scorer,eps,top_p,mean_accuracy,mean_precision,n_months,failed\n";
    for (const GridCell& cell : grid.cells) {
        for (int scorer = 0; scorer < 2; ++scorer) {
            const bool cluster = scorer == 1;
            const MeanMetrics& m = cluster ? cell.summary.mean_cluster : cell.summary.mean_naive;
            out += csv_quote(cell.predictor_tag);
            out += ',';
            out += cluster ? "cluster" : "naive";
            out += ',';
            out += fmt_double(cell.eps);
            out += ',';
            out += fmt_double(cell.top_p);
            out += ',';
            out += fmt_opt(m.accuracy);
            out += ',';
            out += fmt_opt(m.precision);
            out += ',';
            out += std::to_string(m.n_months);
            out += ',';
            out += cell.failed ? "1" : "0";
            out += '\n';
        }
    }
    return out;
}

std::string summary_json(const BacktestRun& run) {
    nlohmann::json j = {
        {"predictor", run.predictor_tag},
        {"eps", run.params.scoring.eps},
        {"top_p", run.params.scoring.top_p},
        {"horizon_months", run.params.scoring.horizon_months},
        {"cutoff_start", run.params.cutoff_start.str()},
        {"cutoff_end", run.params.cutoff_end.str()},
        {"seed", run.params.seed},
        {"summary", summary_block(run.summary)},
    };
    return j.dump(2) + "\n";
}

std::string summary_json(const GridResult& grid) {
    nlohmann::json cells = nlohmann::json::array();
    for (const GridCell& c : grid.cells) {
        nlohmann::json jc = {{"predictor", c.predictor_tag},
                             {"eps", c.eps},
                             {"top_p", c.top_p},
                             {"failed", c.failed},
                             {"summary", summary_block(c.summary)}};
        if (c.failed) jc["error"] = c.error;
        cells.push_back(jc);
    }
    nlohmann::json j = {{"cells", cells},
                        {"index_builds", grid.index_builds},
                        {"any_failed", grid.any_failed}};
    return j.dump(2) + "\n";
}

std::string summary_json(const CompareSummary& cs) {
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& d : cs.deltas)
        deltas.push_back({{"cutoff", d.cutoff.str()},
                          {"dtpr", opt_json(d.dtpr)},
                          {"dfpr", opt_json(d.dfpr)}});
    nlohmann::json uplift = nlohmann::json::array();
    for (const auto& u : cs.uplift)
        uplift.push_back({{"fpr", u.fpr},
                          {"uplift_naive", opt_json(u.uplift_naive)},
                          {"uplift_cluster", opt_json(u.uplift_cluster)}});
    nlohmann::json j = {
        {"algorithm", cs.algorithm_tag},
        {"baseline", cs.baseline_tag},
        {"month_deltas_cluster", deltas},
        {"uplift", uplift},
        {"alg_fit_naive", fit_json(cs.alg_fit_naive)},
        {"alg_fit_cluster", fit_json(cs.alg_fit_cluster)},
        {"base_fit_naive", fit_json(cs.base_fit_naive)},
        {"base_fit_cluster", fit_json(cs.base_fit_cluster)},
        {"alg_mean_naive", mean_json(cs.alg_mean_naive)},
        {"alg_mean_cluster", mean_json(cs.alg_mean_cluster)},
        {"base_mean_naive", mean_json(cs.base_mean_naive)},
        {"base_mean_cluster", mean_json(cs.base_mean_cluster)},
        {"warnings", cs.bias_warnings},
    };
    return j.dump(2) + "\n";
}

std::vector<RocSeries> parse_report_csv(const std::string& csv) {
    std::vector<std::string> lines = split(csv, '\n');
    if (lines.empty()) throw std::runtime_error("report csv: empty");
    // Column positions from the fixed header.
    const std::vector<std::string> header = split(lines[0], ',');
    int col_pred = -1, col_scorer = -1, col_tpr = -1, col_fpr = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "predictor") col_pred = static_cast<int>(i);
        if (header[i] == "scorer") col_scorer = static_cast<int>(i);
        if (header[i] == "tpr") col_tpr = static_cast<int>(i);
        if (header[i] == "fpr") col_fpr = static_cast<int>(i);
    }
    if (col_pred < 0 || col_scorer < 0 || col_tpr < 0 || col_fpr < 0)
        throw std::runtime_error("report csv: missing required columns");

    std::map<std::pair<std::string, std::string>, std::vector<RocPoint>> by_series;
    for (size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        // Quoted fields only occur in the trailing warnings column, which is
        // past every column read here.
        const std::vector<std::string> f = split(lines[li], ',');
        const size_t need = static_cast<size_t>(std::max({col_pred, col_scorer, col_tpr, col_fpr}));
        if (f.size() <= need)
            throw std::runtime_error("report csv line " + std::to_string(li + 1) +
                                     ": too few fields");
        RocPoint p;
        if (!f[col_tpr].empty()) p.tpr = parse_double(f[col_tpr]);
        if (!f[col_fpr].empty()) p.fpr = parse_double(f[col_fpr]);
        by_series[{f[col_pred], f[col_scorer]}].push_back(p);
    }

    std::vector<RocSeries> out;
    for (auto& [key, pts] : by_series) out.push_back({key.first, key.second, std::move(pts)});
    return out;
}

namespace {

struct SvgScale {
    double log_min = -4, log_max = 0;  // x range in log10(fpr)
    double y_max = 1.0;
    double width = 760, height = 560;
    double ml = 70, mr = 180, mt = 30, mb = 55;

    double x(double fpr) const {
        const double t = (std::log10(fpr) - log_min) / (log_max - log_min);
        return ml + t * (width - ml - mr);
    }
    double y(double tpr) const {
        const double t = tpr / y_max;
        return height - mb - t * (height - mt - mb);
    }
};

const char* series_color(size_t i) {
    // First series blue, then yellow, mirroring the usual algorithm/baseline
    // palette; the random reference is always red.
    static const char* colors[] = {"#1f6fd6", "#e3b505", "#2e933c", "#8e44ad",
                                   "#e67e22", "#16a085", "#7f8c8d"};
    return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

}  // namespace

std::string roc_svg(const std::vector<RocSeries>& series) {
    // Data-driven x range, padded to whole decades.
    double fmin = 1e-3, fmax = 1.0, ymax = 0.0;
    bool any = false;
    for (const auto& s : series)
        for (const auto& p : s.points) {
            if (!p.fpr || !p.tpr || *p.fpr <= 0) continue;
            if (!any) {
                fmin = *p.fpr;
                fmax = *p.fpr;
                any = true;
            }
            fmin = std::min(fmin, *p.fpr);
            fmax = std::max(fmax, *p.fpr);
            ymax = std::max(ymax, *p.tpr);
        }
    SvgScale sc;
    sc.log_min = std::floor(std::log10(any ? fmin : 1e-3));
    sc.log_max = std::ceil(std::log10(any ? fmax : 1.0));
    if (sc.log_max <= sc.log_min) sc.log_max = sc.log_min + 1;
    sc.y_max = std::max(0.05, ymax * 1.1);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(sc.width) +
           "\" height=\"" + fmt_double(sc.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // Axes and decade grid.
    for (int e = static_cast<int>(sc.log_min); e <= static_cast<int>(sc.log_max); ++e) {
        const double x = sc.x(std::pow(10.0, e));
        svg += "<line x1=\"" + fmt_double(x) + "\" y1=\"" + fmt_double(sc.y(0)) + "\" x2=\"" +
               fmt_double(x) + "\" y2=\"" + fmt_double(sc.y(sc.y_max)) +
               "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(sc.y(0) + 18) +
               "\" font-size=\"11\" text-anchor=\"middle\">1e" + std::to_string(e) + "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double v = sc.y_max * i / 5.0;
        svg += "<line x1=\"" + fmt_double(sc.x(std::pow(10.0, sc.log_min))) + "\" y1=\"" +
               fmt_double(sc.y(v)) + "\" x2=\"" + fmt_double(sc.x(std::pow(10.0, sc.log_max))) +
               "\" y2=\"" + fmt_double(sc.y(v)) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + fmt_double(sc.ml - 8) + "\" y=\"" + fmt_double(sc.y(v) + 4) +
               "\" font-size=\"11\" text-anchor=\"end\">" + fmt_double(std::round(v * 1000) / 1000) +
               "</text>\n";
    }
    svg += "<text x=\"" + fmt_double((sc.ml + sc.width - sc.mr) / 2) + "\" y=\"" +
           fmt_double(sc.height - 12) +
           "\" font-size=\"13\" text-anchor=\"middle\">false positive rate (log scale)</text>\n";
    svg += "<text x=\"16\" y=\"" + fmt_double((sc.mt + sc.height - sc.mb) / 2) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt_double((sc.mt + sc.height - sc.mb) / 2) +
           ")\">true positive rate</text>\n";

    // Random-classifier reference y = x, in red.
    {
        std::string pts;
        for (int i = 0; i <= 100; ++i) {
            const double lx = sc.log_min + (sc.log_max - sc.log_min) * i / 100.0;
            const double fpr = std::pow(10.0, lx);
            const double tpr = std::min(fpr, sc.y_max);
            pts += fmt_double(sc.x(fpr)) + "," + fmt_double(sc.y(tpr)) + " ";
        }
        svg += "<polyline points=\"" + pts +
               "\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" "
               "stroke-dasharray=\"5,3\"/>\n";
        svg += "<text x=\"" + fmt_double(sc.width - sc.mr + 14) + "\" y=\"" + fmt_double(sc.mt + 12) +
               "\" font-size=\"12\" fill=\"#d62728\">random (y=x)</text>\n";
    }

    double legend_y = sc.mt + 30;
    for (size_t si = 0; si < series.size(); ++si) {
        const RocSeries& s = series[si];
        const char* color = series_color(si);
        for (const auto& p : s.points) {
            if (!p.fpr || !p.tpr || *p.fpr <= 0) continue;
            svg += "<circle cx=\"" + fmt_double(sc.x(*p.fpr)) + "\" cy=\"" +
                   fmt_double(sc.y(std::min(*p.tpr, sc.y_max))) + "\" r=\"2.5\" fill=\"" + color +
                   "\" fill-opacity=\"0.65\"/>\n";
        }
        if (auto fit = log_fit(s.points)) {
            std::string pts;
            for (int i = 0; i <= 100; ++i) {
                const double fpr =
                    fit->fpr_min * std::pow(fit->fpr_max / fit->fpr_min, i / 100.0);
                const double tpr = fit->a * std::log(fpr) + fit->b;
                if (tpr < 0 || tpr > sc.y_max) continue;
                pts += fmt_double(sc.x(fpr)) + "," + fmt_double(sc.y(tpr)) + " ";
            }
            svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"2\"/>\n";
        }
        svg += "<circle cx=\"" + fmt_double(sc.width - sc.mr + 18) + "\" cy=\"" +
               fmt_double(legend_y - 4) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
        svg += "<text x=\"" + fmt_double(sc.width - sc.mr + 28) + "\" y=\"" + fmt_double(legend_y) +
               "\" font-size=\"12\">" + s.predictor + " / " + s.scorer + "</text>\n";
        legend_y += 18;
    }
    svg += "</svg>\n";
    return svg;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace citescope
