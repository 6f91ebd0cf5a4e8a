#include "runner.hpp"

#include "error.hpp"
#include "kernels.hpp"
#include "seed.hpp"
#include "unistats.hpp"
#include "version.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace recoverbench {

namespace fs = std::filesystem;
using nlohmann::json;

const char* track_name(Track t) noexcept {
    switch (t) {
    case Track::univariate: return "univariate";
    case Track::svm: return "svm";
    case Track::mkl: return "mkl";
    }
    return "?";
}

Track parse_track(const std::string& name) {
    if (name == "univariate") return Track::univariate;
    if (name == "svm") return Track::svm;
    if (name == "mkl") return Track::mkl;
    fail(ErrorCode::validation, "unknown method '" + name + "' (expected univariate, svm or mkl)");
}

// ---------------------------------------------------------------------------
// Config

void GridConfig::apply_defaults(std::size_t n_channels) {
    if (snr_values.empty())
        for (int i = 2; i <= 16; ++i) snr_values.push_back(0.5 * i);
    if (sparsity_channels.empty())
        for (std::size_t n = 2; n <= n_channels; n += 2) sparsity_channels.push_back(n);
}

void GridConfig::validate(std::size_t n_channels) const {
    require(!snr_values.empty(), ErrorCode::validation, "snr_values must not be empty");
    require(!sparsity_channels.empty(), ErrorCode::validation, "sparsity_channels must not be empty");
    require(!methods.empty(), ErrorCode::validation, "methods must not be empty");
    for (double s : snr_values) require(s >= 0 && std::isfinite(s), ErrorCode::validation, "snr_values must be >= 0");
    for (auto n : sparsity_channels)
        require(n <= n_channels, ErrorCode::validation,
                "sparsity_channels entry " + std::to_string(n) + " exceeds the channel count");
    require(std::set<double>(snr_values.begin(), snr_values.end()).size() == snr_values.size(),
            ErrorCode::validation, "snr_values contains duplicates");
    require(std::set<std::size_t>(sparsity_channels.begin(), sparsity_channels.end()).size() ==
                sparsity_channels.size(),
            ErrorCode::validation, "sparsity_channels contains duplicates");
    require(std::set<Track>(methods.begin(), methods.end()).size() == methods.size(), ErrorCode::validation,
            "methods contains duplicates");
    require(q > 0 && q <= 1, ErrorCode::validation, "q must lie in (0, 1]");
    require(k_outer >= 2 && k_inner >= 2, ErrorCode::validation, "k_outer and k_inner must be >= 2");
    require(!c_grid.empty(), ErrorCode::validation, "C_grid must not be empty");
    for (double c : c_grid) require(c > 0 && std::isfinite(c), ErrorCode::validation, "C_grid values must be > 0");
    require(generate.has_value() != !dataset_path.empty(), ErrorCode::validation,
            "dataset must specify exactly one of generate or path");
}

bool GridConfig::permutes(double snr, std::size_t n_signal) const {
    if (n_perm_model == 0) return false;
    if (permute_all_cells) return true;
    return std::find(permutation_cells.begin(), permutation_cells.end(), std::make_pair(snr, n_signal)) !=
           permutation_cells.end();
}

namespace {

NoiseSpec parse_noise_spec(const json& j) {
    static const std::set<std::string> known{"n_trials_a",  "n_trials_b",          "n_channels",
                                             "n_time",      "sampling_rate",       "time_start_ms",
                                             "ar_coefficient", "spatial_correlation", "trial_jitter_sd",
                                             "seed"};
    for (const auto& [k, v] : j.items())
        require(known.count(k) > 0, ErrorCode::validation, "dataset.generate: unknown key '" + k + "'");
    NoiseSpec s;
    s.n_trials_a = j.value("n_trials_a", s.n_trials_a);
    s.n_trials_b = j.value("n_trials_b", s.n_trials_b);
    s.n_channels = j.value("n_channels", s.n_channels);
    s.n_time = j.value("n_time", s.n_time);
    s.sampling_rate = j.value("sampling_rate", s.sampling_rate);
    s.time_start_ms = j.value("time_start_ms", s.time_start_ms);
    s.ar_coefficient = j.value("ar_coefficient", s.ar_coefficient);
    s.spatial_correlation = j.value("spatial_correlation", s.spatial_correlation);
    s.trial_jitter_sd = j.value("trial_jitter_sd", s.trial_jitter_sd);
    s.seed = j.value("seed", s.seed);
    return s;
}

} // namespace

json to_json(const NoiseSpec& s) {
    return {{"n_trials_a", s.n_trials_a},         {"n_trials_b", s.n_trials_b},
            {"n_channels", s.n_channels},         {"n_time", s.n_time},
            {"sampling_rate", s.sampling_rate},   {"time_start_ms", s.time_start_ms},
            {"ar_coefficient", s.ar_coefficient}, {"spatial_correlation", s.spatial_correlation},
            {"trial_jitter_sd", s.trial_jitter_sd}, {"seed", s.seed}};
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace

NoiseSpec noise_spec_from_json(const json& j) { return parse_noise_spec(j); }

GridConfig parse_grid_config(const json& j) {
    static const std::set<std::string> known{
        "dataset", "snr_values", "sparsity_channels", "methods", "n_perm_univariate", "n_perm_model",
        "permutation_cells", "C_grid", "k_outer", "k_inner", "master_seed", "output_dir", "window_ms",
        "gaussian_fwhm_ms", "q", "threads", "mkl", "svm"};
    require(j.is_object(), ErrorCode::validation, "config must be a JSON object");
    for (const auto& [k, v] : j.items())
        require(known.count(k) > 0, ErrorCode::validation, "config: unknown key '" + k + "'");

    GridConfig c;
    try {
        if (j.contains("dataset")) {
            const auto& d = j.at("dataset");
            if (d.contains("generate")) c.generate = parse_noise_spec(d.at("generate"));
            if (d.contains("path")) c.dataset_path = d.at("path").get<std::string>();
        } else {
            c.generate = NoiseSpec{};
        }
        if (j.contains("snr_values")) c.snr_values = j.at("snr_values").get<std::vector<double>>();
        if (j.contains("sparsity_channels"))
            c.sparsity_channels = j.at("sparsity_channels").get<std::vector<std::size_t>>();
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& m : j.at("methods")) c.methods.push_back(parse_track(m.get<std::string>()));
        }
        c.n_perm_univariate = j.value("n_perm_univariate", c.n_perm_univariate);
        c.n_perm_model = j.value("n_perm_model", c.n_perm_model);
        if (j.contains("permutation_cells")) {
            const auto& pc = j.at("permutation_cells");
            if (pc.is_string()) {
                require(pc.get<std::string>() == "all", ErrorCode::validation,
                        "permutation_cells must be \"all\" or a list of [snr, n_signal_channels]");
                c.permute_all_cells = true;
            } else {
                for (const auto& cell : pc) {
                    require(cell.is_array() && cell.size() == 2, ErrorCode::validation,
                            "permutation_cells entries must be [snr, n_signal_channels]");
                    c.permutation_cells.emplace_back(cell[0].get<double>(), cell[1].get<std::size_t>());
                }
            }
        }
        if (j.contains("C_grid")) c.c_grid = j.at("C_grid").get<std::vector<double>>();
        c.k_outer = j.value("k_outer", c.k_outer);
        c.k_inner = j.value("k_inner", c.k_inner);
        c.master_seed = j.value("master_seed", c.master_seed);
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("window_ms")) {
            const auto w = j.at("window_ms").get<std::vector<double>>();
            require(w.size() == 2, ErrorCode::validation, "window_ms must be [start, end]");
            c.window = {w[0], w[1]};
        }
        c.gaussian_fwhm_ms = j.value("gaussian_fwhm_ms", c.gaussian_fwhm_ms);
        c.q = j.value("q", c.q);
        c.threads = j.value("threads", c.threads);
        if (j.contains("svm")) {
            c.svm.tol = j.at("svm").value("tol", c.svm.tol);
        }
        c.mkl.svm = c.svm;
        if (j.contains("mkl")) {
            const auto& m = j.at("mkl");
            c.mkl.d_tol = m.value("d_tol", c.mkl.d_tol);
            c.mkl.gap_tol = m.value("gap_tol", c.mkl.gap_tol);
            c.mkl.max_outer = m.value("max_outer", c.mkl.max_outer);
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::validation, std::string("config: ") + e.what());
    }
    return c;
}

GridConfig load_grid_config(const fs::path& file) {
    std::ifstream in(file);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open config " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::validation, "config " + file.string() + ": malformed JSON: " + e.what());
    }
    return parse_grid_config(j);
}

json to_json(const GridConfig& c) {
    json j;
    if (c.generate) j["dataset"] = {{"generate", to_json(*c.generate)}};
    else j["dataset"] = {{"path", c.dataset_path.string()}};
    j["snr_values"] = c.snr_values;
    j["sparsity_channels"] = c.sparsity_channels;
    json methods = json::array();
    for (auto m : c.methods) methods.push_back(track_name(m));
    j["methods"] = methods;
    j["n_perm_univariate"] = c.n_perm_univariate;
    j["n_perm_model"] = c.n_perm_model;
    if (c.permute_all_cells) {
        j["permutation_cells"] = "all";
    } else {
        json cells = json::array();
        for (const auto& [s, n] : c.permutation_cells) cells.push_back({s, n});
        j["permutation_cells"] = cells;
    }
    j["C_grid"] = c.c_grid;
    j["k_outer"] = c.k_outer;
    j["k_inner"] = c.k_inner;
    j["master_seed"] = c.master_seed;
    j["output_dir"] = c.output_dir.string();
    j["window_ms"] = {c.window.start_ms, c.window.end_ms};
    j["gaussian_fwhm_ms"] = c.gaussian_fwhm_ms;
    j["q"] = c.q;
    j["svm"] = {{"tol", c.svm.tol}};
    j["mkl"] = {{"d_tol", c.mkl.d_tol}, {"gap_tol", c.mkl.gap_tol}, {"max_outer", c.mkl.max_outer}};
    return j;
}

std::uint64_t cell_seed(std::uint64_t master_seed, double snr, std::size_t n_signal) {
    return derive_seed(master_seed, {bits_of(snr), static_cast<std::uint64_t>(n_signal)});
}

// ---------------------------------------------------------------------------
// CSV rows

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
std::string fmt_opt(const std::optional<T>& v) {
    if (!v) return "NA";
    if constexpr (std::is_same_v<T, double>) return fmt_double(*v);
    else return std::to_string(*v);
}

double parse_double(const std::string& s, const char* column) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        fail(ErrorCode::parse, std::string("results CSV: bad number '") + s + "' in column " + column);
    return v;
}

std::optional<double> parse_opt(const std::string& s, const char* column) {
    if (s == "NA") return std::nullopt;
    return parse_double(s, column);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string format_row(const ResultRow& r) {
    std::ostringstream s;
    s << fmt_double(r.snr) << ',' << r.n_signal_channels << ',' << fmt_double(r.s_in) << ',' << track_name(r.method)
      << ',' << fmt_opt(r.balanced_accuracy) << ',' << fmt_opt(r.p_value) << ',' << fmt_opt(r.cosine_feature) << ','
      << fmt_opt(r.cosine_channel) << ',' << fmt_opt(r.tp_adaptive) << ',' << fmt_opt(r.fp_adaptive) << ','
      << fmt_opt(r.tp_top10) << ',' << fmt_opt(r.fp_top10) << ',' << fmt_opt(r.fp_top10_raw_count) << ','
      << r.error_code;
    return s.str();
}

ResultRow parse_row(const std::string& line) {
    const auto f = split_csv(line);
    require(f.size() == 14, ErrorCode::parse,
            "results CSV: expected 14 fields, found " + std::to_string(f.size()) + " in '" + line + "'");
    ResultRow r;
    r.snr = parse_double(f[0], "snr");
    r.n_signal_channels = static_cast<std::size_t>(parse_double(f[1], "n_signal_channels"));
    r.s_in = parse_double(f[2], "s_in");
    r.method = parse_track(f[3]);
    r.balanced_accuracy = parse_opt(f[4], "balanced_accuracy");
    r.p_value = parse_opt(f[5], "p_value");
    r.cosine_feature = parse_opt(f[6], "cosine_feature");
    r.cosine_channel = parse_opt(f[7], "cosine_channel");
    r.tp_adaptive = parse_opt(f[8], "tp_adaptive");
    r.fp_adaptive = parse_opt(f[9], "fp_adaptive");
    r.tp_top10 = parse_opt(f[10], "tp_top10");
    r.fp_top10 = parse_opt(f[11], "fp_top10");
    if (auto v = parse_opt(f[12], "fp_top10_raw_count")) r.fp_top10_raw_count = static_cast<std::size_t>(*v);
    r.error_code = f[13];
    require(!r.error_code.empty(), ErrorCode::parse, "results CSV: empty error_code");
    return r;
}

std::size_t GridResult::failed_rows() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.failed(); }));
}

namespace {

// Complete (newline-terminated) lines after the header.
std::vector<std::string> read_complete_lines(const fs::path& csv, bool& header_ok) {
    std::ifstream in(csv, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open " + csv.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (true) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string::npos) break;
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    header_ok = !lines.empty() && lines.front() == kResultsHeader;
    if (!lines.empty()) lines.erase(lines.begin());
    return lines;
}

} // namespace

GridResult load_results(const fs::path& csv) {
    bool header_ok = false;
    const auto lines = read_complete_lines(csv, header_ok);
    require(header_ok, ErrorCode::parse, csv.string() + ": missing or unexpected results header");
    GridResult g;
    for (const auto& l : lines) g.rows.push_back(parse_row(l));
    const auto prov = csv.parent_path() / "provenance.json";
    if (fs::exists(prov)) {
        std::ifstream in(prov);
        try {
            g.provenance = json::parse(in);
        } catch (const json::exception&) {
            g.provenance = nullptr;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Cells

namespace {

ResultRow blank_row(double snr, std::size_t n_signal, std::size_t n_channels, Track t) {
    ResultRow r;
    r.snr = snr;
    r.n_signal_channels = n_signal;
    r.s_in = static_cast<double>(n_signal) / static_cast<double>(n_channels);
    r.method = t;
    return r;
}

std::string code_of(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) return error_code_name(err->code());
    return error_code_name(ErrorCode::internal);
}

} // namespace

std::vector<ResultRow> run_cell(const EpochDataset& baseline, const GridConfig& config, double snr,
                                std::size_t n_signal, const std::vector<Track>& tracks) {
    const std::uint64_t seed = cell_seed(config.master_seed, snr, n_signal);
    std::vector<ResultRow> rows;
    for (auto t : tracks) rows.push_back(blank_row(snr, n_signal, baseline.n_channels, t));

    EpochDataset data;
    GroundTruth truth;
    try {
        InjectionSpec spec;
        spec.snr_in = snr;
        spec.n_signal_channels = n_signal;
        spec.window = config.window;
        spec.gaussian_fwhm_ms = config.gaussian_fwhm_ms;
        spec.channel_order_seed = stream_seed(seed, Stream::channel_order);
        std::tie(data, truth) = inject_signal(baseline, spec);
    } catch (const std::exception& e) {
        for (auto& r : rows) r.error_code = code_of(e);
        return rows;
    }
    const bool no_signal = !truth.has_signal();

    std::optional<KernelSet> raw;
    std::optional<FoldPlan> plan;
    for (auto& row : rows) {
        try {
            if (row.method == Track::univariate) {
                const auto means = trial_means(data, config.window);
                auto uni = permutation_test(means, data.labels, config.n_perm_univariate,
                                            stream_seed(seed, Stream::univariate_perm));
                uni.significant = fdr_correct(uni.p_values, config.q);
                if (no_signal) {
                    const auto hits = std::count(uni.significant.begin(), uni.significant.end(), true);
                    row.fp_adaptive = static_cast<double>(hits) / static_cast<double>(data.n_channels);
                    row.error_code = "no_signal";
                } else {
                    const auto rates = univariate_rates(uni.significant, truth);
                    row.tp_adaptive = rates.tp_rate;
                    row.fp_adaptive = rates.fp_rate;
                }
                continue;
            }
            if (!raw) raw = build_channel_kernels(data, config.window);
            if (!plan) plan = make_folds(data.labels, config.k_outer, config.k_inner, stream_seed(seed, Stream::folds));
            CvOptions opt;
            opt.method = row.method == Track::svm ? Method::svm : Method::mkl;
            opt.c_grid = config.c_grid;
            opt.window = config.window;
            opt.svm = config.svm;
            opt.mkl = config.mkl;
            auto cv = run_cv(data, *raw, *plan, opt);
            if (config.permutes(snr, n_signal)) {
                cv.p_value = model_permutation_test(
                    data, *raw, *plan, opt, cv.balanced_accuracy, config.n_perm_model,
                    derive_seed(stream_seed(seed, Stream::model_perm), {static_cast<std::uint64_t>(opt.method)}));
            }
            const auto rep = assemble_report(cv, truth);
            row.balanced_accuracy = rep.balanced_accuracy;
            row.p_value = rep.p_value;
            row.cosine_feature = rep.cosine_feature;
            row.cosine_channel = rep.cosine_channel;
            row.tp_adaptive = rep.tp_adaptive;
            row.fp_adaptive = rep.fp_adaptive;
            row.tp_top10 = rep.tp_top10;
            row.fp_top10 = rep.fp_top10;
            row.fp_top10_raw_count = rep.fp_top10_raw_count;
            if (!rep.marker.empty()) row.error_code = rep.marker;
        } catch (const std::exception& e) {
            row.error_code = code_of(e);
        }
    }
    return rows;
}

std::size_t resolve_threads(std::size_t requested) {
    if (const char* env = std::getenv("RECOVERBENCH_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    if (requested > 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct CellJob {
    double snr;
    std::size_t n_signal;
    std::vector<Track> tracks;
};

EpochDataset load_baseline(const GridConfig& config) {
    if (config.generate) return generate_baseline(*config.generate);
    return read_dataset(config.dataset_path);
}

} // namespace

GridResult run_grid(const GridConfig& input) {
    const EpochDataset baseline = load_baseline(input);
    GridConfig config = input;
    config.apply_defaults(baseline.n_channels);
    config.validate(baseline.n_channels);

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    require(!ec, ErrorCode::io, "cannot create output directory " + config.output_dir.string());

    GridResult result;
    // The output location does not affect results, so it is left out of the hash.
    json config_json = to_json(config);
    config_json.erase("output_dir");
    const std::uint64_t config_hash = fnv1a(config_json.dump());

    // Rows written under a different configuration are never reused.
    bool reusable = true;
    if (const auto prov_path = config.output_dir / "provenance.json"; fs::exists(prov_path)) {
        std::ifstream in(prov_path);
        const json old = json::parse(in, nullptr, /*allow_exceptions=*/false);
        reusable = old.is_object() && old.contains("config_hash") && old["config_hash"] == config_hash;
    }

    result.provenance = {{"config", config_json},
                         {"config_hash", config_hash},
                         {"master_seed", config.master_seed},
                         {"baseline_seed", baseline.seed ? json(*baseline.seed) : json(nullptr)},
                         {"version", kVersionString},
                         {"template_fwhm_convention", "full width at half maximum"}};
    {
        std::ofstream prov(config.output_dir / "provenance.json", std::ios::trunc);
        require(static_cast<bool>(prov), ErrorCode::io, "cannot write provenance.json");
        prov << result.provenance.dump(2) << '\n';
    }

    // Expected row sequence.
    std::vector<ResultRow> keys;
    for (double snr : config.snr_values)
        for (auto n : config.sparsity_channels)
            for (auto t : config.methods) keys.push_back(blank_row(snr, n, baseline.n_channels, t));

    const fs::path csv = config.output_dir / "results.csv";
    std::size_t kept = 0;
    if (reusable && fs::exists(csv)) {
        bool header_ok = false;
        const auto lines = read_complete_lines(csv, header_ok);
        if (header_ok) {
            for (const auto& line : lines) {
                if (kept >= keys.size()) break;
                ResultRow row;
                try {
                    row = parse_row(line);
                } catch (const Error&) {
                    break;
                }
                const auto& k = keys[kept];
                if (row.snr != k.snr || row.n_signal_channels != k.n_signal_channels || row.method != k.method) break;
                result.rows.push_back(row);
                ++kept;
            }
        }
    }
    std::ofstream out(csv, std::ios::trunc | std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + csv.string());
    out << kResultsHeader << '\n';
    for (const auto& r : result.rows) out << format_row(r) << '\n';
    out.flush();

    std::vector<CellJob> jobs;
    for (std::size_t i = kept; i < keys.size(); ++i) {
        const auto& k = keys[i];
        if (jobs.empty() || jobs.back().snr != k.snr || jobs.back().n_signal != k.n_signal_channels)
            jobs.push_back({k.snr, k.n_signal_channels, {}});
        jobs.back().tracks.push_back(k.method);
    }

    std::vector<std::optional<std::vector<ResultRow>>> done(jobs.size());
    std::mutex mu;
    std::condition_variable cv;
    std::size_t next_job = 0;
    auto worker = [&] {
        while (true) {
            std::size_t idx;
            {
                std::lock_guard lock(mu);
                if (next_job >= jobs.size()) return;
                idx = next_job++;
            }
            auto rows = run_cell(baseline, config, jobs[idx].snr, jobs[idx].n_signal, jobs[idx].tracks);
            {
                std::lock_guard lock(mu);
                done[idx] = std::move(rows);
            }
            cv.notify_all();
        }
    };

    const std::size_t n_threads = std::min(resolve_threads(config.threads), std::max<std::size_t>(jobs.size(), 1));
    std::vector<std::thread> pool;
    if (n_threads > 1)
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);

    for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
        std::vector<ResultRow> rows;
        if (n_threads > 1) {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return done[idx].has_value(); });
            rows = std::move(*done[idx]);
            done[idx].reset();
        } else {
            rows = run_cell(baseline, config, jobs[idx].snr, jobs[idx].n_signal, jobs[idx].tracks);
        }
        for (const auto& r : rows) {
            out << format_row(r) << '\n';
            result.rows.push_back(r);
        }
        out.flush();
    }
    for (auto& t : pool) t.join();
    return result;
}

} // namespace recoverbench
