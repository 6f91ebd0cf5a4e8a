#pragma once

#include "cv.hpp"
#include "dataio.hpp"
#include "inject.hpp"
#include "recovery.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace recoverbench {

enum class Track { univariate, svm, mkl };

const char* track_name(Track t) noexcept;
Track parse_track(const std::string& name);

struct GridConfig {
    std::optional<NoiseSpec> generate;   // exactly one of generate / dataset_path
    std::filesystem::path dataset_path;
    std::vector<double> snr_values;
    std::vector<std::size_t> sparsity_channels;
    std::vector<Track> methods{Track::univariate, Track::svm, Track::mkl};
    std::size_t n_perm_univariate = 5000;
    std::size_t n_perm_model = 500;
    bool permute_all_cells = false;                                // model permutation test on every cell
    std::vector<std::pair<double, std::size_t>> permutation_cells; // or only on these (snr, n) cells
    std::vector<double> c_grid = default_c_grid();
    std::size_t k_outer = 10;
    std::size_t k_inner = 5;
    std::uint64_t master_seed = 1;
    std::filesystem::path output_dir = "recoverbench_out";
    Window window{0.0, 1000.0};
    double gaussian_fwhm_ms = 200.0;
    double q = 0.05;
    std::size_t threads = 0; // 0: RECOVERBENCH_THREADS or hardware concurrency
    MklOptions mkl{};
    SvmOptions svm{};

    /// Fills default SNR / sparsity lists for a dataset with `n_channels`.
    void apply_defaults(std::size_t n_channels);
    void validate(std::size_t n_channels) const;
    bool permutes(double snr, std::size_t n_signal) const;
};

/// NoiseSpec from JSON using the field names; missing fields keep defaults.
NoiseSpec noise_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NoiseSpec& spec);

/// Parses the JSON config; unknown keys are rejected.
GridConfig parse_grid_config(const nlohmann::json& j);
GridConfig load_grid_config(const std::filesystem::path& file);
nlohmann::json to_json(const GridConfig& config);

/// Stable per-cell seed; depends only on the master seed and the cell.
std::uint64_t cell_seed(std::uint64_t master_seed, double snr, std::size_t n_signal);

/// One line of the results CSV. Missing values are empty optionals.
struct ResultRow {
    double snr = 0.0;
    std::size_t n_signal_channels = 0;
    double s_in = 0.0;
    Track method = Track::svm;
    std::optional<double> balanced_accuracy, p_value;
    std::optional<double> cosine_feature, cosine_channel;
    std::optional<double> tp_adaptive, fp_adaptive, tp_top10, fp_top10;
    std::optional<std::size_t> fp_top10_raw_count;
    std::string error_code = "ok";

    bool failed() const { return error_code != "ok" && error_code != "no_signal"; }
    bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultsHeader =
    "snr,n_signal_channels,s_in,method,balanced_accuracy,p_value,cosine_feature,cosine_channel,"
    "tp_adaptive,fp_adaptive,tp_top10,fp_top10,fp_top10_raw_count,error_code";

std::string format_row(const ResultRow& row);
ResultRow parse_row(const std::string& line);

struct GridResult {
    std::vector<ResultRow> rows;
    nlohmann::json provenance;
    std::size_t failed_rows() const;
};

/// Reads a results CSV. Malformed lines are a parse error; a trailing line
/// without newline is ignored as an interrupted write.
GridResult load_results(const std::filesystem::path& csv);

/// Evaluates every requested track on one cell, starting from `baseline`.
std::vector<ResultRow> run_cell(const EpochDataset& baseline, const GridConfig& config, double snr,
                                std::size_t n_signal, const std::vector<Track>& tracks);

/// Runs the sweep, writing `results.csv` and `provenance.json` under
/// output_dir. Existing complete rows that match the expected sequence are
/// kept and the rest recomputed.
GridResult run_grid(const GridConfig& config);

/// Worker count from an explicit request, RECOVERBENCH_THREADS, or the hardware.
std::size_t resolve_threads(std::size_t requested);

} // namespace recoverbench
