#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "citescope/backtest.hpp"
#include "citescope/ingest.hpp"
#include "citescope/metric.hpp"
#include "citescope/report.hpp"
#include "citescope/store.hpp"
#include "citescope/synth.hpp"

namespace py = pybind11;
using namespace citescope;

namespace {

Month month_from_str(const std::string& s) {
    auto m = Month::parse(s);
    if (!m) throw py::value_error("expected YYYY-MM, got '" + s + "'");
    return *m;
}

Date date_from_str(const std::string& s) {
    auto d = Date::parse(s);
    if (!d) throw py::value_error("expected YYYY-MM-DD, got '" + s + "'");
    return *d;
}

MetricKind metric_from_str(const std::string& s) {
    auto m = metric_from_string(s);
    if (!m) throw py::value_error("unknown metric '" + s + "'");
    return *m;
}

py::object opt_to_py(const std::optional<double>& v) {
    if (!v) return py::none();
    return py::float_(*v);
}

py::dict metricset_to_py(const MetricSet& m) {
    py::dict d;
    d["tpr"] = opt_to_py(m.tpr);
    d["fpr"] = opt_to_py(m.fpr);
    d["precision"] = opt_to_py(m.precision);
    d["recall"] = opt_to_py(m.recall);
    d["f1"] = opt_to_py(m.f1);
    d["mcc"] = opt_to_py(m.mcc);
    d["accuracy"] = opt_to_py(m.accuracy);
    return d;
}

py::dict counts_to_py(const ConfusionCounts& c) {
    py::dict d;
    d["tp"] = c.tp;
    d["fp"] = c.fp;
    d["fn"] = c.fn;
    d["tn"] = c.tn;
    return d;
}

py::dict month_result_to_py(const MonthResult& m) {
    py::dict d;
    d["cutoff"] = m.cutoff.str();
    d["skipped"] = m.skipped;
    d["n_train"] = m.n_train;
    d["n_test"] = m.n_test;
    d["n_targets"] = m.n_targets;
    d["n_predictions"] = m.n_predictions;
    d["counts_naive"] = counts_to_py(m.counts_naive);
    d["counts_cluster"] = counts_to_py(m.counts_cluster);
    d["metrics_naive"] = metricset_to_py(m.metrics_naive);
    d["metrics_cluster"] = metricset_to_py(m.metrics_cluster);
    d["amplification"] = opt_to_py(m.amplification);
    d["predictor"] = m.predictor_tag;
    d["warnings"] = m.warnings;
    return d;
}

py::object fit_to_py(const std::optional<LogFit>& fit) {
    if (!fit) return py::none();
    py::dict d;
    d["a"] = fit->a;
    d["b"] = fit->b;
    d["n_points"] = fit->n_points;
    d["n_excluded"] = fit->n_excluded;
    d["residual_rms"] = fit->residual_rms;
    d["fpr_min"] = fit->fpr_min;
    d["fpr_max"] = fit->fpr_max;
    return d;
}

py::dict summary_to_py(const BacktestSummary& s) {
    py::dict d;
    d["fit_naive"] = fit_to_py(s.fit_naive);
    d["fit_cluster"] = fit_to_py(s.fit_cluster);
    d["months_run"] = s.months_run;
    d["months_skipped"] = s.months_skipped;
    d["median_amplification"] = opt_to_py(s.median_amplification);
    d["warnings"] = s.bias_warnings;
    auto mean = [](const MeanMetrics& m) {
        py::dict md;
        md["tpr"] = opt_to_py(m.tpr);
        md["fpr"] = opt_to_py(m.fpr);
        md["precision"] = opt_to_py(m.precision);
        md["recall"] = opt_to_py(m.recall);
        md["f1"] = opt_to_py(m.f1);
        md["mcc"] = opt_to_py(m.mcc);
        md["accuracy"] = opt_to_py(m.accuracy);
        md["n_months"] = m.n_months;
        return md;
    };
    d["mean_naive"] = mean(s.mean_naive);
    d["mean_cluster"] = mean(s.mean_cluster);
    return d;
}

PredictorConfig predictor_from_kwargs(const std::string& kind, double n_ratio,
                                      double jitter_sigma, double trend_top_p,
                                      double hotspot_eps, int hotspot_window,
                                      uint32_t hotspot_keep, const std::string& predictions) {
    auto k = predictor_kind_from_string(kind);
    if (!k) throw py::value_error("unknown predictor '" + kind + "'");
    PredictorConfig pc;
    pc.kind = *k;
    pc.n_ratio = n_ratio;
    pc.jitter_sigma = jitter_sigma;
    pc.top_p_for_trend = trend_top_p;
    pc.hotspot.eps_h = hotspot_eps;
    pc.hotspot.recent_window_months = hotspot_window;
    pc.hotspot.n_keep = hotspot_keep;
    pc.predictions_path = predictions;
    return pc;
}

}  // namespace

PYBIND11_MODULE(_citescope, m) {
    m.doc() = "latent-space citation backtesting engine";

    py::class_<Article>(m, "Article")
        .def(py::init([](const std::string& id, const std::vector<float>& coords,
                         const std::string& published, int64_t citations,
                         const std::string& source, bool has_citation_data) {
                 Article a;
                 a.id = id;
                 a.coords = coords;
                 a.published = date_from_str(published);
                 a.citations = citations;
                 auto src = source_from_string(source);
                 if (!src) throw py::value_error("unknown source '" + source + "'");
                 a.source = *src;
                 a.has_citation_data = has_citation_data;
                 return a;
             }),
             py::arg("id"), py::arg("coords"), py::arg("published"), py::arg("citations") = 0,
             py::arg("source") = "synthetic", py::arg("has_citation_data") = true)
        .def_readonly("id", &Article::id)
        .def_readonly("coords", &Article::coords)
        .def_property_readonly("published",
                               [](const Article& a) { return a.published.str(); })
        .def_readonly("citations", &Article::citations)
        .def_readonly("has_citation_data", &Article::has_citation_data)
        .def_property_readonly("source",
                               [](const Article& a) { return std::string(to_string(a.source)); })
        .def("__repr__", [](const Article& a) {
            return "<Article " + a.id + " @ " + a.published.str() + ">";
        });

    py::class_<Corpus>(m, "Corpus")
        .def_readonly("dim", &Corpus::dim)
        .def_readonly("provenance", &Corpus::provenance)
        .def_property_readonly("metric",
                               [](const Corpus& c) { return std::string(to_string(c.metric)); })
        .def("__len__", &Corpus::size)
        .def("article", [](const Corpus& c, size_t i) {
            if (i >= c.size()) throw py::index_error();
            return c.articles[i];
        })
        .def("__repr__", [](const Corpus& c) {
            return "<Corpus dim=" + std::to_string(c.dim) + " n=" + std::to_string(c.size()) + ">";
        });

    m.def("make_corpus",
          [](uint32_t dim, const std::vector<Article>& articles, const std::string& metric,
             const std::string& provenance) {
              return make_corpus(dim, metric_from_str(metric), articles, provenance);
          },
          py::arg("dim"), py::arg("articles"), py::arg("metric") = "euclidean-unit",
          py::arg("provenance") = "");

    m.def("load_corpus", [](const std::string& path) { return load_corpus(path); },
          py::arg("store_path"));
    m.def("store_write",
          [](const Corpus& corpus, const std::string& path) { store_write(corpus, path); },
          py::arg("corpus"), py::arg("store_path"));

    m.def("synth_corpus",
          [](uint32_t dim, uint32_t n_background, uint32_t n_clusters, uint32_t n_per_cluster,
             double cluster_radius, const std::vector<std::string>& cluster_birth_months,
             int growth_window_months, const std::string& start, const std::string& end,
             double citation_alpha, double boost_in_clusters, const std::string& metric,
             uint64_t seed) {
              SynthSpec spec;
              spec.dim = dim;
              spec.n_background = n_background;
              spec.n_clusters = n_clusters;
              spec.n_per_cluster = n_per_cluster;
              spec.cluster_radius = cluster_radius;
              for (const auto& b : cluster_birth_months)
                  spec.cluster_birth_months.push_back(month_from_str(b));
              spec.growth_window_months = growth_window_months;
              spec.start = month_from_str(start);
              spec.end = month_from_str(end);
              spec.citation_alpha = citation_alpha;
              spec.boost_in_clusters = boost_in_clusters;
              spec.metric = metric_from_str(metric);
              spec.seed = seed;
              return synth_corpus(spec);
          },
          py::arg("dim") = 4, py::arg("n_background") = 0, py::arg("n_clusters") = 0,
          py::arg("n_per_cluster") = 0, py::arg("cluster_radius") = 0.05,
          py::arg("cluster_birth_months") = std::vector<std::string>{},
          py::arg("growth_window_months") = 12, py::arg("start") = "2015-01",
          py::arg("end") = "2024-12", py::arg("citation_alpha") = 2.5,
          py::arg("boost_in_clusters") = 1.0, py::arg("metric") = "euclidean-unit",
          py::arg("seed") = 0);

    m.def("distance",
          [](const std::vector<float>& a, const std::vector<float>& b, const std::string& metric) {
              return distance(a, b, metric_from_str(metric));
          },
          py::arg("a"), py::arg("b"), py::arg("metric") = "euclidean-unit");

    py::class_<RangeIndex>(m, "RangeIndex")
        .def(py::init([](const std::vector<std::vector<float>>& points, uint32_t dim,
                         const std::string& metric) {
                 return RangeIndex::build(points, dim, metric_from_str(metric));
             }),
             py::arg("points"), py::arg("dim"), py::arg("metric") = "euclidean-unit")
        .def("query",
             [](const RangeIndex& idx, const std::vector<float>& center, double eps) {
                 return idx.query(center, eps);
             },
             py::arg("center"), py::arg("eps"))
        .def("__len__", &RangeIndex::size);

    m.def("n_predictions_for", &n_predictions_for, py::arg("n_train_articles"),
          py::arg("n_ratio"));

    m.def("run_backtest",
          [](const Corpus& corpus, const std::string& from, const std::string& to, double eps,
             double top_p, int horizon_months, const std::string& predictor, double n_ratio,
             double jitter_sigma, double trend_top_p, double hotspot_eps, int hotspot_window,
             uint32_t hotspot_keep, const std::string& predictions, uint64_t seed,
             unsigned jobs) {
              BacktestParams params;
              params.cutoff_start = month_from_str(from);
              params.cutoff_end = month_from_str(to);
              params.scoring.eps = eps;
              params.scoring.top_p = top_p;
              params.scoring.horizon_months = horizon_months;
              params.predictor = predictor_from_kwargs(predictor, n_ratio, jitter_sigma,
                                                       trend_top_p, hotspot_eps, hotspot_window,
                                                       hotspot_keep, predictions);
              params.seed = seed;
              params.jobs = jobs;
              BacktestRun run;
              {
                  py::gil_scoped_release release;
                  run = run_backtest(corpus, params);
              }
              py::dict d;
              d["predictor"] = run.predictor_tag;
              py::list months;
              for (const auto& mr : run.months) months.append(month_result_to_py(mr));
              d["months"] = months;
              d["summary"] = summary_to_py(run.summary);
              d["report_csv"] = report_csv(run);
              d["summary_json"] = summary_json(run);
              return d;
          },
          py::arg("corpus"), py::arg("cutoff_start"), py::arg("cutoff_end"),
          py::arg("eps") = 0.035, py::arg("top_p") = 15.0, py::arg("horizon_months") = 24,
          py::arg("predictor") = "baseline", py::arg("n_ratio") = 100.0,
          py::arg("jitter_sigma") = 0.0, py::arg("trend_top_p") = 15.0,
          py::arg("hotspot_eps") = 0.0, py::arg("hotspot_window") = 12,
          py::arg("hotspot_keep") = 0, py::arg("predictions") = "", py::arg("seed") = 0,
          py::arg("jobs") = 0);

    m.def("grid_search",
          [](const Corpus& corpus, const std::string& from, const std::string& to,
             const std::vector<double>& top_p_grid, const std::vector<double>& eps_grid,
             const std::vector<std::string>& predictors, int horizon_months, double n_ratio,
             uint64_t seed, unsigned jobs) {
              BacktestParams base;
              base.cutoff_start = month_from_str(from);
              base.cutoff_end = month_from_str(to);
              base.scoring.horizon_months = horizon_months;
              base.seed = seed;
              base.jobs = jobs;
              std::vector<PredictorConfig> configs;
              for (const auto& p : predictors)
                  configs.push_back(
                      predictor_from_kwargs(p, n_ratio, 0.0, 15.0, 0.0, 12, 0, ""));
              GridResult grid;
              {
                  py::gil_scoped_release release;
                  grid = grid_search(corpus, base, top_p_grid, eps_grid, configs);
              }
              py::dict d;
              py::list cells;
              for (const auto& c : grid.cells) {
                  py::dict cd;
                  cd["predictor"] = c.predictor_tag;
                  cd["eps"] = c.eps;
                  cd["top_p"] = c.top_p;
                  cd["failed"] = c.failed;
                  cd["summary"] = summary_to_py(c.summary);
                  cells.append(cd);
              }
              d["cells"] = cells;
              d["index_builds"] = grid.index_builds;
              d["any_failed"] = grid.any_failed;
              d["cells_csv"] = report_csv(grid);
              d["heat_csv"] = heat_csv(grid);
              return d;
          },
          py::arg("corpus"), py::arg("cutoff_start"), py::arg("cutoff_end"),
          py::arg("top_p_grid"), py::arg("eps_grid"),
          py::arg("predictors") = std::vector<std::string>{"baseline"},
          py::arg("horizon_months") = 24, py::arg("n_ratio") = 100.0, py::arg("seed") = 0,
          py::arg("jobs") = 0);

    m.attr("__version__") = "0.1.0";
}
