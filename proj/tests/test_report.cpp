#include <doctest.h>

#include "citescope/report.hpp"
#include "citescope/strfmt.hpp"
#include "citescope/synth.hpp"
#include "test_helpers.hpp"

using namespace citescope;

namespace {

BacktestRun small_run() {
    SynthSpec s;
    s.dim = 3;
    s.n_background = 300;
    s.start = Month::of(2019, 1);
    s.end = Month::of(2021, 12);
    s.seed = 17;
    const static Corpus corpus = synth_corpus(s);

    BacktestParams p;
    p.cutoff_start = Month::of(2020, 1);
    p.cutoff_end = Month::of(2020, 4);
    p.scoring.eps = 0.3;
    p.scoring.top_p = 15.0;
    p.scoring.horizon_months = 6;
    p.predictor.n_ratio = 10.0;
    p.seed = 9;
    return run_backtest(corpus, p);
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("csv header and row shape") {
    const BacktestRun run = small_run();
    const std::string csv = report_csv(run);
    const auto lines = split(csv, '\n');
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == kReportCsvHeader);
    // One row per month per scorer.
    size_t rows = 0;
    for (size_t i = 1; i < lines.size(); ++i)
        if (!trim(lines[i]).empty()) ++rows;
    CHECK(rows == run.months.size() * 2);

    const auto fields = split(lines[1], ',');
    CHECK(fields.size() == 22);
    CHECK(fields[1] == "baseline");
    CHECK((fields[2] == "naive" || fields[2] == "cluster"));
    CHECK(fields[3] == "0.3");
    CHECK(fields[4] == "15");
}

TEST_CASE("report csv parses back into roc series") {
    const BacktestRun run = small_run();
    const auto series = parse_report_csv(report_csv(run));
    REQUIRE(series.size() == 2);  // one predictor, two scorers
    for (const auto& s : series) {
        CHECK(s.predictor == "baseline");
        CHECK(s.points.size() == run.months.size());
    }
}

TEST_CASE("summary json carries fits and warnings") {
    const BacktestRun run = small_run();
    const std::string js = summary_json(run);
    CHECK(js.find("\"fit_cluster\"") != std::string::npos);
    CHECK(js.find("\"months_run\"") != std::string::npos);
    CHECK(js.find("\"seed\"") != std::string::npos);
}

TEST_CASE("svg renders the reference line, points and fit") {
    const BacktestRun run = small_run();
    RocSeries series{"baseline", "cluster", {}};
    for (const auto& m : run.months)
        series.points.push_back({m.metrics_cluster.fpr, m.metrics_cluster.tpr});
    const std::string svg = roc_svg({series});
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("random (y=x)") != std::string::npos);
    CHECK(svg.find("circle") != std::string::npos);
    CHECK(svg.find("baseline / cluster") != std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("svg copes with empty and degenerate series") {
    const std::string svg = roc_svg({});
    CHECK(svg.find("<svg") == 0);
    RocSeries s{"x", "naive", {{0.0, 0.0}, {std::nullopt, std::nullopt}}};
    CHECK(roc_svg({s}).find("</svg>") != std::string::npos);
}

TEST_CASE("csv quoting round-trips warnings with commas") {
    BacktestRun run = small_run();
    run.months[0].warnings.push_back("note, with comma and \"quotes\"");
    const std::string csv = report_csv(run);
    CHECK(csv.find("\"") != std::string::npos);
    // Parser only needs the numeric columns, which stay unquoted.
    CHECK_NOTHROW(parse_report_csv(csv));
}

}  // TEST_SUITE
