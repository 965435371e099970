#pragma once

#include <filesystem>

#include "citescope/backtest.hpp"

namespace citescope {

// Report CSV, one row per month per scorer per predictor:
// cutoff,predictor,scorer,eps,top_p,n_train,n_test,n_targets,n_predictions,
// tp,fp,fn,tn,tpr,fpr,precision,recall,f1,mcc,accuracy,amplification,warnings
// Absent values serialize as empty fields. Byte-identical for identical runs.
extern const char* const kReportCsvHeader;

std::string report_csv(const BacktestRun& run);
std::string report_csv(const GridResult& grid);

// Mean precision/accuracy per (eps, top_p) per predictor and scorer.
std::string heat_csv(const GridResult& grid);

std::string summary_json(const BacktestRun& run);
std::string summary_json(const GridResult& grid);
std::string summary_json(const CompareSummary& cs);

// Parses a report CSV back into per-month ROC points, keyed by
// (predictor, scorer).
struct RocSeries {
    std::string predictor;
    std::string scorer;
    std::vector<RocPoint> points;
};
std::vector<RocSeries> parse_report_csv(const std::string& csv);

// Static ROC scatter: log-scaled x axis, y=x random reference in red, one
// point series per (predictor, scorer) plus its logarithmic fit.
std::string roc_svg(const std::vector<RocSeries>& series);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace citescope
