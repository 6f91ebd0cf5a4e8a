#pragma once

#include "runner.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace recoverbench {

/// Names of the numeric result columns usable as heatmap metrics.
const std::vector<std::string>& metric_names();

/// Value of `metric` in a row; throws for an unknown metric.
std::optional<double> metric_value(const ResultRow& row, const std::string& metric);

/// SNR on the vertical axis (highest at the top), signal channels on the
/// horizontal axis. Values map to a white-to-black ramp; missing cells are hatched.
std::string heatmap_svg(const GridResult& grid, const std::string& metric, Track method);
void render_heatmap(const GridResult& grid, const std::string& metric, Track method,
                    const std::filesystem::path& out_path);

/// Pivot table of one metric: a row per SNR, a column per signal-channel count.
void write_metric_table(std::ostream& out, const GridResult& grid, const std::string& metric, Track method);

struct MethodSummary {
    Track method = Track::svm;
    std::size_t cells = 0;
    std::size_t failed = 0;
    std::optional<double> perfect_accuracy_fraction;
    std::optional<double> mean_balanced_accuracy;
    std::optional<double> mean_cosine_feature;
    std::optional<double> mean_cosine_channel;
    std::optional<double> mean_tp_adaptive;
    std::optional<double> mean_fp_adaptive;
    std::optional<double> mean_fp_top10;
    std::optional<double> full_tp_fraction; // cells with every signal channel recovered
};

struct GridSummary {
    std::vector<MethodSummary> methods;
    std::optional<double> mkl_outperforms_svm_fraction; // MKL accuracy > SVM + 0.05
    std::vector<std::string> missing_cells;             // "snr=..,n=..,method=.."

    const MethodSummary* find(Track t) const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

GridSummary summarize(const GridResult& grid);

} // namespace recoverbench
