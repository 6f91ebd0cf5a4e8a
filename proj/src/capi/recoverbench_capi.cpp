#include "recoverbench/recoverbench.h"

#include "cv.hpp"
#include "dataio.hpp"
#include "error.hpp"
#include "inject.hpp"
#include "recovery.hpp"
#include "report.hpp"
#include "runner.hpp"
#include "seed.hpp"
#include "unistats.hpp"
#include "version.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace rb = recoverbench;
using nlohmann::json;

struct rb_dataset {
    rb::EpochDataset value;
};
struct rb_truth {
    rb::GroundTruth value;
};
struct rb_grid {
    rb::GridResult value;
};

namespace {

thread_local std::string g_last_error;

rb_status set_error(rb_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <class F>
rb_status guarded(F&& body) {
    try {
        body();
        return RB_OK;
    } catch (const rb::Error& e) {
        return set_error(static_cast<rb_status>(e.code()), e.what());
    } catch (const json::exception& e) {
        return set_error(RB_ERR_PARSE, std::string("JSON: ") + e.what());
    } catch (const std::bad_alloc&) {
        return set_error(RB_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(RB_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(RB_ERR_INTERNAL, "unknown error");
    }
}

void require_arg(const void* p, const char* name) {
    if (!p) rb::fail(rb::ErrorCode::invalid_argument, std::string(name) + " must not be NULL");
}

json parse_options(const char* text) {
    if (!text || !*text) return json::object();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        rb::fail(rb::ErrorCode::parse, std::string("options: malformed JSON: ") + e.what());
    }
    rb::require(j.is_object(), rb::ErrorCode::validation, "options must be a JSON object");
    return j;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

rb::Window window_from(const json& j, rb::Window fallback = {}) {
    if (!j.contains("window_ms")) return fallback;
    const auto w = j.at("window_ms").get<std::vector<double>>();
    rb::require(w.size() == 2, rb::ErrorCode::validation, "window_ms must be [start, end]");
    return {w[0], w[1]};
}

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

} // namespace

extern "C" {

RB_API const char* rb_version(void) { return rb::kVersionString; }

RB_API const char* rb_status_name(rb_status status) {
    return rb::error_code_name(static_cast<rb::ErrorCode>(status));
}

RB_API const char* rb_last_error(void) { return g_last_error.c_str(); }

RB_API void rb_string_free(char* s) { std::free(s); }

// ---- datasets ---------------------------------------------------------------

RB_API rb_status rb_dataset_generate(const char* noise_spec_json, rb_dataset** out) {
    return guarded([&] {
        require_arg(out, "out");
        const auto spec = rb::noise_spec_from_json(parse_options(noise_spec_json));
        *out = new rb_dataset{rb::generate_baseline(spec)};
    });
}

RB_API rb_status rb_dataset_read(const char* dir, rb_dataset** out) {
    return guarded([&] {
        require_arg(dir, "dir");
        require_arg(out, "out");
        *out = new rb_dataset{rb::read_dataset(dir)};
    });
}

RB_API rb_status rb_dataset_write(const rb_dataset* dataset, const char* dir) {
    return guarded([&] {
        require_arg(dataset, "dataset");
        require_arg(dir, "dir");
        rb::write_dataset(dataset->value, dir);
    });
}

RB_API void rb_dataset_free(rb_dataset* dataset) { delete dataset; }

RB_API rb_status rb_dataset_shape(const rb_dataset* dataset, size_t* n_trials, size_t* n_channels, size_t* n_time) {
    return guarded([&] {
        require_arg(dataset, "dataset");
        if (n_trials) *n_trials = dataset->value.n_trials;
        if (n_channels) *n_channels = dataset->value.n_channels;
        if (n_time) *n_time = dataset->value.n_time;
    });
}

RB_API rb_status rb_dataset_data(const rb_dataset* dataset, const double** data) {
    return guarded([&] {
        require_arg(dataset, "dataset");
        require_arg(data, "data");
        *data = dataset->value.data.data();
    });
}

RB_API rb_status rb_dataset_labels(const rb_dataset* dataset, char* out, size_t capacity) {
    return guarded([&] {
        require_arg(dataset, "dataset");
        require_arg(out, "out");
        const auto& labels = dataset->value.labels;
        rb::require(capacity >= labels.size(), rb::ErrorCode::invalid_argument, "label buffer too small");
        for (std::size_t i = 0; i < labels.size(); ++i) out[i] = rb::label_char(labels[i]);
    });
}

// ---- injection --------------------------------------------------------------

RB_API rb_status rb_inject(const rb_dataset* dataset, const char* injection_spec_json, rb_dataset** out,
                           rb_truth** truth) {
    return guarded([&] {
        require_arg(dataset, "dataset");
        require_arg(out, "out");
        require_arg(truth, "truth");
        const json j = parse_options(injection_spec_json);
        rb::InjectionSpec spec;
        spec.snr_in = j.value("snr_in", spec.snr_in);
        spec.n_signal_channels = j.value("n_signal_channels", spec.n_signal_channels);
        spec.window = window_from(j, spec.window);
        spec.gaussian_fwhm_ms = j.value("gaussian_fwhm_ms", spec.gaussian_fwhm_ms);
        spec.channel_order_seed = j.value("channel_order_seed", spec.channel_order_seed);
        auto [data, gt] = rb::inject_signal(dataset->value, spec);
        auto* d = new rb_dataset{std::move(data)};
        auto* t = new rb_truth{std::move(gt)};
        *out = d;
        *truth = t;
    });
}

RB_API rb_status rb_truth_read(const char* dir, rb_truth** out) {
    return guarded([&] {
        require_arg(dir, "dir");
        require_arg(out, "out");
        *out = new rb_truth{rb::read_truth(dir)};
    });
}

RB_API rb_status rb_truth_write(const rb_truth* truth, const char* dir) {
    return guarded([&] {
        require_arg(truth, "truth");
        require_arg(dir, "dir");
        rb::write_truth(truth->value, dir);
    });
}

RB_API void rb_truth_free(rb_truth* truth) { delete truth; }

RB_API rb_status rb_truth_signal_channels(const rb_truth* truth, size_t* out, size_t capacity, size_t* count) {
    return guarded([&] {
        require_arg(truth, "truth");
        const auto& sc = truth->value.signal_channels;
        if (count) *count = sc.size();
        for (std::size_t i = 0; i < sc.size() && i < capacity && out; ++i) out[i] = sc[i];
    });
}

// ---- analyses ---------------------------------------------------------------

RB_API rb_status rb_univariate(const rb_dataset* dataset, const rb_truth* truth, const char* options_json,
                               const char* csv_path, char** result_json) {
    return guarded([&] {
        require_arg(dataset, "dataset");
        const json j = parse_options(options_json);
        const auto window = window_from(j);
        const std::size_t n_perm = j.value("n_perm", std::size_t{5000});
        const std::uint64_t seed = j.value("seed", std::uint64_t{0});
        const double q = j.value("q", 0.05);
        const std::string stat_name = j.value("statistic", std::string("median_difference"));
        rb::UnivariateStatistic stat;
        if (stat_name == "median_difference") stat = rb::UnivariateStatistic::median_difference;
        else if (stat_name == "median_pairwise_difference") stat = rb::UnivariateStatistic::median_pairwise_difference;
        else rb::fail(rb::ErrorCode::validation, "unknown statistic '" + stat_name + "'");

        const auto& d = dataset->value;
        const auto means = rb::trial_means(d, window);
        auto res = rb::permutation_test(means, d.labels, n_perm, seed, stat);
        res.q = q;
        res.significant = rb::fdr_correct(res.p_values, q);

        if (csv_path) {
            std::ofstream out(csv_path, std::ios::trunc);
            rb::require(static_cast<bool>(out), rb::ErrorCode::io, std::string("cannot write ") + csv_path);
            rb::write_univariate_csv(out, res, d.channel_ids);
        }
        if (result_json) {
            json r;
            r["stat"] = res.stat;
            r["p_values"] = res.p_values;
            r["significant"] = res.significant;
            r["q"] = q;
            r["n_permutations"] = n_perm;
            r["statistic"] = stat_name;
            if (truth) {
                const auto rates = rb::univariate_rates(res.significant, truth->value);
                r["tp_rate"] = rates.tp_rate;
                r["fp_rate"] = opt(rates.fp_rate);
            }
            *result_json = dup_string(r.dump(2));
        }
    });
}

RB_API rb_status rb_train(const rb_dataset* dataset, const rb_truth* truth, const char* options_json,
                          char** report_json) {
    return guarded([&] {
        require_arg(dataset, "dataset");
        require_arg(report_json, "report_json");
        const json j = parse_options(options_json);
        const auto& d = dataset->value;

        rb::CvOptions opt_cv;
        opt_cv.method = rb::parse_method(j.value("method", std::string("svm")));
        opt_cv.window = window_from(j);
        if (j.contains("C_grid")) opt_cv.c_grid = j.at("C_grid").get<std::vector<double>>();
        if (j.contains("svm")) opt_cv.svm.tol = j.at("svm").value("tol", opt_cv.svm.tol);
        opt_cv.mkl.svm = opt_cv.svm;
        if (j.contains("mkl")) {
            const auto& m = j.at("mkl");
            opt_cv.mkl.d_tol = m.value("d_tol", opt_cv.mkl.d_tol);
            opt_cv.mkl.gap_tol = m.value("gap_tol", opt_cv.mkl.gap_tol);
            opt_cv.mkl.max_outer = m.value("max_outer", opt_cv.mkl.max_outer);
        }
        const std::size_t k_outer = j.value("k_outer", std::size_t{10});
        const std::size_t k_inner = j.value("k_inner", std::size_t{5});
        const std::uint64_t seed = j.value("seed", std::uint64_t{0});
        const std::size_t n_perm = j.value("n_perm", std::size_t{0});

        const auto plan = rb::make_folds(d.labels, k_outer, k_inner, seed);
        const auto raw = rb::build_channel_kernels(d, opt_cv.window);
        auto cv = rb::run_cv(d, raw, plan, opt_cv);
        cv.p_value = rb::model_permutation_test(d, raw, plan, opt_cv, cv.balanced_accuracy, n_perm,
                                                rb::derive_seed(seed, {0x7065726dULL}));

        json r;
        r["method"] = rb::method_name(cv.method);
        r["balanced_accuracy"] = cv.balanced_accuracy;
        r["p_value"] = opt(cv.p_value);
        json folds = json::array();
        std::vector<std::vector<double>> per_fold;
        for (const auto& f : cv.folds) {
            folds.push_back({{"test_indices", f.test_indices},
                             {"chosen_c", f.chosen_c},
                             {"inner_scores", f.inner_scores},
                             {"balanced_accuracy", f.balanced_accuracy},
                             {"kernel_weights", f.model.kernel_weights},
                             {"channel_contributions", f.model.channel_contributions},
                             {"dropped_channels", f.dropped_channels},
                             {"primal_dual_max_diff", f.primal_dual_max_diff}});
            per_fold.push_back(f.model.channel_contributions);
        }
        r["folds"] = folds;
        r["er"] = rb::expected_ranking(per_fold);
        r["recovery"] = truth ? rb::to_json(rb::assemble_report(cv, truth->value)) : json(nullptr);
        *report_json = dup_string(r.dump(2));
    });
}

// ---- grids ------------------------------------------------------------------

RB_API rb_status rb_grid_run(const char* config_json, const char* output_dir, size_t threads, rb_grid** out) {
    return guarded([&] {
        require_arg(out, "out");
        json j;
        try {
            j = json::parse(config_json ? config_json : "{}");
        } catch (const json::exception& e) {
            rb::fail(rb::ErrorCode::validation, std::string("config: malformed JSON: ") + e.what());
        }
        auto config = rb::parse_grid_config(j);
        if (output_dir) config.output_dir = output_dir;
        if (threads > 0) config.threads = threads;
        *out = new rb_grid{rb::run_grid(config)};
    });
}

RB_API rb_status rb_grid_load(const char* results_csv, rb_grid** out) {
    return guarded([&] {
        require_arg(results_csv, "results_csv");
        require_arg(out, "out");
        *out = new rb_grid{rb::load_results(results_csv)};
    });
}

RB_API void rb_grid_free(rb_grid* grid) { delete grid; }

RB_API rb_status rb_grid_row_count(const rb_grid* grid, size_t* rows, size_t* failed_rows) {
    return guarded([&] {
        require_arg(grid, "grid");
        if (rows) *rows = grid->value.rows.size();
        if (failed_rows) *failed_rows = grid->value.failed_rows();
    });
}

RB_API rb_status rb_grid_render_heatmap(const rb_grid* grid, const char* metric, const char* method,
                                        const char* svg_path) {
    return guarded([&] {
        require_arg(grid, "grid");
        require_arg(metric, "metric");
        require_arg(method, "method");
        require_arg(svg_path, "svg_path");
        rb::render_heatmap(grid->value, metric, rb::parse_track(method), svg_path);
    });
}

RB_API rb_status rb_grid_metric_table(const rb_grid* grid, const char* metric, const char* method, char** csv) {
    return guarded([&] {
        require_arg(grid, "grid");
        require_arg(metric, "metric");
        require_arg(method, "method");
        require_arg(csv, "csv");
        std::ostringstream s;
        rb::write_metric_table(s, grid->value, metric, rb::parse_track(method));
        *csv = dup_string(s.str());
    });
}

RB_API rb_status rb_grid_summarize(const rb_grid* grid, int as_json, char** text, size_t* missing_cells) {
    return guarded([&] {
        require_arg(grid, "grid");
        require_arg(text, "text");
        const auto summary = rb::summarize(grid->value);
        if (missing_cells) *missing_cells = summary.missing_cells.size();
        *text = dup_string(as_json ? summary.to_json().dump(2) : summary.to_text());
    });
}

} // extern "C"
