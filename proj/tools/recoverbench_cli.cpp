// Command-line front end. Talks to the library only through the C API.
#include "recoverbench/recoverbench.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPartial = 2;

struct CliError {
    std::string message;
};

void check(rb_status s, const std::string& context) {
    if (s != RB_OK) throw CliError{context + ": " + rb_status_name(s) + ": " + rb_last_error()};
}

struct DatasetDeleter {
    void operator()(rb_dataset* d) const { rb_dataset_free(d); }
};
struct TruthDeleter {
    void operator()(rb_truth* t) const { rb_truth_free(t); }
};
struct GridDeleter {
    void operator()(rb_grid* g) const { rb_grid_free(g); }
};
struct StringDeleter {
    void operator()(char* s) const { rb_string_free(s); }
};
using Dataset = std::unique_ptr<rb_dataset, DatasetDeleter>;
using Truth = std::unique_ptr<rb_truth, TruthDeleter>;
using Grid = std::unique_ptr<rb_grid, GridDeleter>;
using String = std::unique_ptr<char, StringDeleter>;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError{"cannot open " + path};
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Dataset read_dataset(const std::string& dir) {
    rb_dataset* d = nullptr;
    check(rb_dataset_read(dir.c_str(), &d), "reading " + dir);
    return Dataset(d);
}

Truth read_truth_if(const std::string& dir) {
    if (dir.empty()) return nullptr;
    rb_truth* t = nullptr;
    check(rb_truth_read(dir.c_str(), &t), "reading ground truth " + dir);
    return Truth(t);
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw CliError{"cannot write " + path};
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Signal-recovery benchmark for weight maps of linear classifiers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rb_version()));

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a correlated-noise baseline dataset");
    std::string gen_out, gen_spec;
    json gen_overrides = json::object();
    std::optional<std::uint64_t> gen_seed;
    std::optional<std::size_t> gen_a, gen_b, gen_channels, gen_time;
    std::optional<double> gen_ar, gen_spatial, gen_jitter, gen_rate;
    gen->add_option("-o,--out", gen_out, "Output dataset directory")->required();
    gen->add_option("--spec", gen_spec, "JSON file with noise parameters");
    gen->add_option("--seed", gen_seed, "Random seed");
    gen->add_option("--trials-a", gen_a, "Number of A trials");
    gen->add_option("--trials-b", gen_b, "Number of B trials");
    gen->add_option("--channels", gen_channels, "Number of channels");
    gen->add_option("--time", gen_time, "Samples per trial");
    gen->add_option("--sampling-rate", gen_rate, "Samples per second");
    gen->add_option("--ar", gen_ar, "Temporal AR(1) coefficient");
    gen->add_option("--spatial-correlation", gen_spatial, "Constant cross-channel correlation");
    gen->add_option("--jitter", gen_jitter, "Per-trial log-amplitude standard deviation");

    // inject
    auto* inj = app.add_subcommand("inject", "Add the smoothed rectangular signal to condition A");
    std::string inj_in, inj_out;
    double inj_snr = 4.0, inj_fwhm = 200.0;
    std::size_t inj_channels = 0;
    std::uint64_t inj_seed = 0;
    std::vector<double> inj_window{0.0, 1000.0};
    inj->add_option("-i,--in", inj_in, "Input dataset directory")->required();
    inj->add_option("-o,--out", inj_out, "Output directory (dataset + truth files)")->required();
    inj->add_option("--snr", inj_snr, "Target SNR")->capture_default_str();
    inj->add_option("--channels", inj_channels, "Number of signal channels")->required();
    inj->add_option("--seed", inj_seed, "Channel-order seed")->capture_default_str();
    inj->add_option("--fwhm", inj_fwhm, "Gaussian smoothing FWHM in ms")->capture_default_str();
    inj->add_option("--window", inj_window, "Signal window start end (ms)")->expected(2);

    // univariate
    auto* uni = app.add_subcommand("univariate", "Per-channel permutation test with FDR correction");
    std::string uni_in, uni_truth, uni_csv, uni_json;
    std::size_t uni_perm = 5000;
    std::uint64_t uni_seed = 0;
    double uni_q = 0.05;
    std::string uni_stat = "median_difference";
    std::vector<double> uni_window{0.0, 1000.0};
    uni->add_option("-i,--in", uni_in, "Dataset directory")->required();
    uni->add_option("--truth", uni_truth, "Ground-truth directory for TP/FP rates");
    uni->add_option("--n-perm", uni_perm, "Permutations")->capture_default_str();
    uni->add_option("--seed", uni_seed, "Permutation seed")->capture_default_str();
    uni->add_option("--q", uni_q, "FDR level")->capture_default_str();
    uni->add_option("--statistic", uni_stat, "median_difference or median_pairwise_difference")
        ->capture_default_str();
    uni->add_option("--window", uni_window, "Averaging window start end (ms)")->expected(2);
    uni->add_option("--csv", uni_csv, "Write channel_id,stat,p,significant here");
    uni->add_option("-o,--out", uni_json, "Write the JSON result here (default: stdout)");

    // train
    auto* train = app.add_subcommand("train", "Nested cross-validated SVM or MKL");
    std::string tr_in, tr_truth, tr_out, tr_method = "svm";
    std::size_t tr_perm = 0, tr_outer = 10, tr_inner = 5;
    std::uint64_t tr_seed = 0;
    std::vector<double> tr_window{0.0, 1000.0};
    std::vector<double> tr_cgrid;
    train->add_option("-i,--in", tr_in, "Dataset directory")->required();
    train->add_option("--method", tr_method, "svm or mkl")->check(CLI::IsMember({"svm", "mkl"}))->capture_default_str();
    train->add_option("--truth", tr_truth, "Ground-truth directory for recovery metrics");
    train->add_option("--n-perm", tr_perm, "Label permutations for the model p-value")->capture_default_str();
    train->add_option("--seed", tr_seed, "Fold seed")->capture_default_str();
    train->add_option("--k-outer", tr_outer, "Outer folds")->capture_default_str();
    train->add_option("--k-inner", tr_inner, "Inner folds")->capture_default_str();
    train->add_option("--window", tr_window, "Kernel window start end (ms)")->expected(2);
    train->add_option("--c-grid", tr_cgrid, "Soft-margin values to search");
    train->add_option("-o,--out", tr_out, "Write the JSON report here (default: stdout)");

    // grid
    auto* grid = app.add_subcommand("grid", "Run or resume an SNR x sparsity sweep");
    std::string grid_config, grid_outdir;
    std::size_t grid_threads = 0;
    grid->add_option("-c,--config", grid_config, "JSON config file")->required();
    grid->add_option("--output-dir", grid_outdir, "Override the config output_dir");
    grid->add_option("--threads", grid_threads, "Worker threads (RECOVERBENCH_THREADS takes precedence)");

    // report
    auto* report = app.add_subcommand("report", "Render one metric of a results CSV");
    std::string rep_results, rep_metric, rep_method = "svm", rep_format = "svg", rep_out;
    report->add_option("-r,--results", rep_results, "results.csv")->required();
    report->add_option("--metric", rep_metric, "Metric column")->required();
    report->add_option("--method", rep_method, "univariate, svm or mkl")->capture_default_str();
    report->add_option("--format", rep_format, "svg or csv")->check(CLI::IsMember({"svg", "csv"}))->capture_default_str();
    report->add_option("-o,--out", rep_out, "Output file (csv defaults to stdout)");

    // summarize
    auto* summ = app.add_subcommand("summarize", "Aggregate a results CSV");
    std::string sum_results, sum_out;
    bool sum_json = false;
    summ->add_option("-r,--results", sum_results, "results.csv")->required();
    summ->add_flag("--json", sum_json, "Emit JSON instead of text");
    summ->add_option("-o,--out", sum_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*gen) {
            json spec = gen_spec.empty() ? json::object() : json::parse(slurp(gen_spec));
            if (gen_seed) spec["seed"] = *gen_seed;
            if (gen_a) spec["n_trials_a"] = *gen_a;
            if (gen_b) spec["n_trials_b"] = *gen_b;
            if (gen_channels) spec["n_channels"] = *gen_channels;
            if (gen_time) spec["n_time"] = *gen_time;
            if (gen_rate) spec["sampling_rate"] = *gen_rate;
            if (gen_ar) spec["ar_coefficient"] = *gen_ar;
            if (gen_spatial) spec["spatial_correlation"] = *gen_spatial;
            if (gen_jitter) spec["trial_jitter_sd"] = *gen_jitter;
            rb_dataset* d = nullptr;
            check(rb_dataset_generate(spec.dump().c_str(), &d), "generate");
            Dataset ds(d);
            check(rb_dataset_write(ds.get(), gen_out.c_str()), "writing " + gen_out);
            std::size_t n_trials = 0, n_channels = 0, n_time = 0;
            check(rb_dataset_shape(ds.get(), &n_trials, &n_channels, &n_time), "shape");
            std::cerr << "wrote " << gen_out << " (" << n_trials << " trials, " << n_channels << " channels, "
                      << n_time << " samples)\n";
            return kExitOk;
        }
        if (*inj) {
            auto ds = read_dataset(inj_in);
            const json spec = {{"snr_in", inj_snr},
                               {"n_signal_channels", inj_channels},
                               {"gaussian_fwhm_ms", inj_fwhm},
                               {"channel_order_seed", inj_seed},
                               {"window_ms", inj_window}};
            rb_dataset* out = nullptr;
            rb_truth* truth = nullptr;
            check(rb_inject(ds.get(), spec.dump().c_str(), &out, &truth), "inject");
            Dataset out_ds(out);
            Truth out_truth(truth);
            check(rb_dataset_write(out_ds.get(), inj_out.c_str()), "writing " + inj_out);
            check(rb_truth_write(out_truth.get(), inj_out.c_str()), "writing truth to " + inj_out);
            return kExitOk;
        }
        if (*uni) {
            auto ds = read_dataset(uni_in);
            auto truth = read_truth_if(uni_truth);
            const json opts = {{"n_perm", uni_perm}, {"seed", uni_seed}, {"q", uni_q},
                               {"statistic", uni_stat}, {"window_ms", uni_window}};
            char* result = nullptr;
            check(rb_univariate(ds.get(), truth.get(), opts.dump().c_str(), uni_csv.empty() ? nullptr : uni_csv.c_str(),
                                &result),
                  "univariate");
            String text(result);
            emit(text.get(), uni_json);
            return kExitOk;
        }
        if (*train) {
            auto ds = read_dataset(tr_in);
            auto truth = read_truth_if(tr_truth);
            json opts = {{"method", tr_method}, {"n_perm", tr_perm},   {"seed", tr_seed},
                         {"k_outer", tr_outer}, {"k_inner", tr_inner}, {"window_ms", tr_window}};
            if (!tr_cgrid.empty()) opts["C_grid"] = tr_cgrid;
            char* result = nullptr;
            check(rb_train(ds.get(), truth.get(), opts.dump().c_str(), &result), "train");
            String text(result);
            emit(text.get(), tr_out);
            return kExitOk;
        }
        if (*grid) {
            std::string config_text;
            try {
                config_text = slurp(grid_config);
            } catch (const CliError& e) {
                std::cerr << "error: " << e.message << '\n';
                return kExitConfig;
            }
            rb_grid* g = nullptr;
            const rb_status s = rb_grid_run(config_text.c_str(), grid_outdir.empty() ? nullptr : grid_outdir.c_str(),
                                            grid_threads, &g);
            if (s != RB_OK) {
                std::cerr << "error: grid: " << rb_status_name(s) << ": " << rb_last_error() << '\n';
                return kExitConfig;
            }
            Grid result(g);
            std::size_t rows = 0, failed = 0;
            check(rb_grid_row_count(result.get(), &rows, &failed), "grid");
            std::cerr << rows << " result rows";
            if (failed) std::cerr << ", " << failed << " failed";
            std::cerr << '\n';
            return failed ? kExitPartial : kExitOk;
        }
        if (*report) {
            rb_grid* g = nullptr;
            check(rb_grid_load(rep_results.c_str(), &g), "loading " + rep_results);
            Grid result(g);
            if (rep_format == "svg") {
                const std::string out = rep_out.empty() ? rep_method + "_" + rep_metric + ".svg" : rep_out;
                check(rb_grid_render_heatmap(result.get(), rep_metric.c_str(), rep_method.c_str(), out.c_str()),
                      "report");
                std::cerr << "wrote " << out << '\n';
            } else {
                char* csv = nullptr;
                check(rb_grid_metric_table(result.get(), rep_metric.c_str(), rep_method.c_str(), &csv), "report");
                String text(csv);
                emit(text.get(), rep_out);
            }
            return kExitOk;
        }
        if (*summ) {
            rb_grid* g = nullptr;
            check(rb_grid_load(sum_results.c_str(), &g), "loading " + sum_results);
            Grid result(g);
            char* text = nullptr;
            std::size_t missing = 0;
            check(rb_grid_summarize(result.get(), sum_json ? 1 : 0, &text, &missing), "summarize");
            String owned(text);
            emit(owned.get(), sum_out);
            return missing ? kExitPartial : kExitOk;
        }
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << '\n';
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
