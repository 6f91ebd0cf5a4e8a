// Acceptance suite. Each criterion prints one PASS/FAIL line; the process
// exits non-zero when any criterion fails. Pass criterion numbers on the
// command line to run a subset.

#include "cv.hpp"
#include "dataio.hpp"
#include "fixtures.hpp"
#include "inject.hpp"
#include "kernels.hpp"
#include "learners.hpp"
#include "oracles.hpp"
#include "report.hpp"
#include "runner.hpp"
#include "seed.hpp"
#include "unistats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace recoverbench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(precision);
    s << v;
    return s.str();
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

const fs::path kWork = fs::current_path() / "acceptance_out";

// ---------------------------------------------------------------------------
// 1. SVM solver against a projected-gradient QP oracle

Outcome solver_correctness() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> dims(3, 40);
    std::uniform_real_distribution<double> sep(0.0, 1.5);
    const std::vector<double> cs{0.1, 1.0, 10.0, 100.0, 0.5};

    double worst_gap = 0.0, worst_kkt = 0.0, solver_seconds = 0.0;
    Stopwatch total;
    for (int p = 0; p < 25; ++p) {
        const auto prob = oracle::random_problem(rng, 20, static_cast<std::size_t>(dims(rng)), sep(rng));
        const Matrix k = oracle::linear_kernel(prob.x);
        const double c = cs[p % cs.size()];

        Stopwatch sw;
        const auto sol = svm_train(k, prob.y, c);
        solver_seconds += sw.seconds();

        const auto ref = oracle::svm_dual_qp(k, prob.y, c);
        const double objective = oracle::dual_objective(oracle::signed_kernel(k, prob.y), sol.alphas);
        worst_gap = std::max(worst_gap, std::abs(objective - ref.objective));
        worst_kkt = std::max(worst_kkt, kkt_violation(k, prob.y, c, sol.alphas, sol.bias));
    }
    const bool pass = worst_gap <= 1e-4 && worst_kkt <= 1e-3 && solver_seconds < 10.0;
    return {pass, "25 problems, max |objective - oracle| " + sci(worst_gap) + " (<= 1e-4), max KKT violation " +
                      sci(worst_kkt) + " (<= 1e-3), solver time " + fmt(solver_seconds, 3) + " s (< 10 s), with oracle " +
                      fmt(total.seconds(), 1) + " s"};
}

// ---------------------------------------------------------------------------
// 2. MKL against an exhaustive simplex grid

Outcome mkl_correctness() {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> sep(0.2, 1.2);
    const std::vector<double> cs{0.1, 1.0, 10.0};
    const auto grid = oracle::simplex_grid3(0.05);

    double worst_excess = -INFINITY, worst_refined = 0.0, below_grid = 0.0, worst_zero = 0.0, mkl_seconds = 0.0;
    Stopwatch total;
    for (int p = 0; p < 10; ++p) {
        const std::size_t n = 30;
        std::vector<Matrix> raw;
        std::vector<double> y;
        for (int m = 0; m < 3; ++m) {
            auto prob = oracle::random_problem(rng, n, 6, m == 0 ? sep(rng) : 0.3 * sep(rng));
            raw.push_back(oracle::linear_kernel(prob.x));
            y = prob.y;
        }
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), 0);
        const auto kernels = prepare_kernels(raw, all, true);
        const double c = cs[p % cs.size()];

        Stopwatch sw;
        const auto sol = mkl_train(kernels, y, c);
        mkl_seconds += sw.seconds();

        auto j_of = [&](std::span<const double> d) {
            return oracle::svm_dual_qp(oracle::weighted_sum(kernels, d), y, c).objective;
        };
        double best = INFINITY;
        std::vector<double> best_d;
        for (const auto& d : grid) {
            const double j = j_of(d);
            if (j < best) {
                best = j;
                best_d = d;
            }
        }
        const double j_mkl = j_of(sol.d);
        // The 0.05 grid only bounds the optimum from above; J is convex in d,
        // so a compass search started at the best grid point refines it.
        const double refined = oracle::simplex_compass_search(j_of, best_d, 0.025, 1e-5).second;
        worst_excess = std::max(worst_excess, j_mkl - best);
        worst_refined = std::max(worst_refined, std::abs(j_mkl - refined));
        below_grid = std::max(below_grid, best - j_mkl);

        // A fourth, all-zero kernel must receive no weight.
        auto with_zero = kernels;
        with_zero.emplace_back(n, n, 0.0);
        Stopwatch sw2;
        const auto sol0 = mkl_train(with_zero, y, c);
        mkl_seconds += sw2.seconds();
        worst_zero = std::max(worst_zero, sol0.d[3]);
    }
    const bool pass = worst_excess <= 1e-3 && worst_refined <= 1e-3 && worst_zero < 1e-6 && mkl_seconds < 60.0;
    return {pass, "10 problems, max J(d_mkl) - min grid J " + sci(worst_excess) +
                      " (<= 1e-3; MKL undercuts the 0.05 grid by up to " + sci(below_grid) +
                      "), max |J(d_mkl) - refined grid optimum| " + sci(worst_refined) + " (<= 1e-3), max zero-kernel weight " +
                      sci(worst_zero) + " (< 1e-6), MKL time " + fmt(mkl_seconds, 2) + " s (< 60 s), with oracle " +
                      fmt(total.seconds(), 1) + " s"};
}

// ---------------------------------------------------------------------------
// 3. Primal weight maps reproduce kernel decisions

Outcome primal_dual() {
    const auto baseline = generate_baseline(NoiseSpec{});
    InjectionSpec spec;
    spec.snr_in = 4.0;
    spec.n_signal_channels = 10;
    spec.channel_order_seed = stream_seed(cell_seed(1, 4.0, 10), Stream::channel_order);
    const auto data = inject_signal(baseline, spec).first;
    const auto raw = build_channel_kernels(data, {0.0, 1000.0});
    const auto plan = make_folds(data.labels, 10, 5, 5);

    double worst = 0.0;
    std::size_t folds = 0;
    for (auto method : {Method::svm, Method::mkl}) {
        CvOptions opt;
        opt.method = method;
        const auto cv = run_cv(data, raw, plan, opt);
        for (const auto& f : cv.folds) {
            worst = std::max(worst, f.primal_dual_max_diff);
            ++folds;
        }
    }
    return {worst <= 1e-6, std::to_string(folds) + " folds (SVM and MKL, train and test trials), max |<w,x~>+b - f| " +
                               sci(worst) + " (<= 1e-6)"};
}

// ---------------------------------------------------------------------------
// 4. Null calibration

Outcome null_calibration() {
    Stopwatch sw;
    // (a) univariate FDR false-positive fraction, 100 seeds
    double fp_sum = 0.0;
    for (std::uint64_t s = 1; s <= 100; ++s) {
        NoiseSpec ns;
        ns.seed = 1000 + s;
        const auto d = generate_baseline(ns);
        const auto means = trial_means(d, {0.0, 1000.0});
        auto r = permutation_test(means, d.labels, 5000, derive_seed(s, {3}));
        const auto sig = fdr_correct(r.p_values, 0.05);
        fp_sum += static_cast<double>(std::count(sig.begin(), sig.end(), true)) / static_cast<double>(d.n_channels);
    }
    const double fp_mean = fp_sum / 100.0;
    const double a_seconds = sw.seconds();

    // (b) SVM model permutation p-values, 50 seeds
    const std::size_t n_perm = 99;
    std::size_t below = 0;
    std::vector<double> ps;
    for (std::uint64_t s = 1; s <= 50; ++s) {
        NoiseSpec ns;
        ns.seed = 5000 + s;
        const auto d = generate_baseline(ns);
        const auto raw = build_channel_kernels(d, {0.0, 1000.0});
        const auto plan = make_folds(d.labels, 10, 5, derive_seed(s, {2}));
        CvOptions opt;
        opt.compute_maps = false;
        const auto cv = run_cv(d, raw, plan, opt);
        const auto p = model_permutation_test(d, raw, plan, opt, cv.balanced_accuracy, n_perm, derive_seed(s, {4}));
        ps.push_back(*p);
        if (*p < 0.05) ++below;
    }
    const double frac = static_cast<double>(below) / 50.0;
    const double p_mean = std::accumulate(ps.begin(), ps.end(), 0.0) / 50.0;
    const bool pass = fp_mean <= 0.07 && fp_mean <= 0.05 && frac <= 0.14;
    return {pass, "(a) mean univariate FDR FP fraction " + fmt(fp_mean, 4) + " over 100 seeds (<= 0.07; <= 0.05 also met: " +
                      (fp_mean <= 0.05 ? "yes" : "no") + "), " + fmt(a_seconds, 1) + " s; (b) SVM permutation p < 0.05 in " +
                      std::to_string(below) + "/50 seeds = " + fmt(frac, 2) + " (<= 0.14), " + std::to_string(n_perm) +
                      " permutations each, mean p " + fmt(p_mean, 3) + ", " + fmt(sw.seconds() - a_seconds, 1) + " s"};
}

// ---------------------------------------------------------------------------
// 5 / 6. Reduced grid

const std::vector<double> kSnr{1.0, 2.0, 4.0, 8.0};
const std::vector<std::size_t> kChannels{2, 10, 20, 38};

struct ReducedGrid {
    GridResult result;
    double seconds = 0.0;
    std::map<std::tuple<double, std::size_t, Track>, ResultRow> cells;

    const ResultRow& at(double snr, std::size_t n, Track t) const { return cells.at({snr, n, t}); }
};

const ReducedGrid& reduced_grid() {
    static std::optional<ReducedGrid> cache;
    if (cache) return *cache;
    ::unsetenv("RECOVERBENCH_THREADS");
    GridConfig config;
    config.generate = NoiseSpec{};
    config.snr_values = kSnr;
    config.sparsity_channels = kChannels;
    config.threads = 1;
    config.output_dir = kWork / "reduced_grid";
    fs::remove_all(config.output_dir);
    ReducedGrid g;
    Stopwatch sw;
    g.result = run_grid(config);
    g.seconds = sw.seconds();
    for (const auto& r : g.result.rows) g.cells[{r.snr, r.n_signal_channels, r.method}] = r;
    cache = std::move(g);
    return *cache;
}

Outcome grid_trends() {
    const auto& g = reduced_grid();
    std::ostringstream detail;
    bool pass = g.seconds < 1800.0 && g.result.failed_rows() == 0 && g.cells.size() == 4 * 4 * 3;
    detail << "grid " << fmt(g.seconds, 1) << " s single-threaded (< 1800 s), failed rows " << g.result.failed_rows();

    // (a) accuracy non-decreasing in SNR, 0.02 allowance
    std::size_t violations = 0;
    double worst_drop = 0.0;
    for (auto t : {Track::svm, Track::mkl})
        for (auto n : kChannels)
            for (std::size_t k = 1; k < kSnr.size(); ++k) {
                const double lo = g.at(kSnr[k - 1], n, t).balanced_accuracy.value_or(NAN);
                const double hi = g.at(kSnr[k], n, t).balanced_accuracy.value_or(NAN);
                const double drop = lo - hi;
                worst_drop = std::max(worst_drop, drop);
                if (!(drop <= 0.02)) ++violations;
            }
    const bool a = violations == 0;
    detail << "; (a) monotone in SNR: " << (a ? "yes" : "no") << ", largest drop " << fmt(worst_drop, 4);

    // (b) SNR 8, all channels
    const double ba_svm = g.at(8.0, 38, Track::svm).balanced_accuracy.value_or(NAN);
    const double ba_mkl = g.at(8.0, 38, Track::mkl).balanced_accuracy.value_or(NAN);
    const bool b = ba_svm >= 0.98 && ba_mkl >= 0.98;
    detail << "; (b) accuracy at SNR 8, S=100%: SVM " << fmt(ba_svm, 4) << ", MKL " << fmt(ba_mkl, 4) << " (>= 0.98)";

    // (c) ML adaptive FP at SNR >= 4
    std::size_t zero = 0, defined = 0;
    for (auto t : {Track::svm, Track::mkl})
        for (double snr : {4.0, 8.0})
            for (auto n : kChannels) {
                const auto fp = g.at(snr, n, t).fp_adaptive;
                if (!fp) continue;
                ++defined;
                if (*fp == 0.0) ++zero;
            }
    const double zero_frac = defined ? double(zero) / double(defined) : 0.0;
    const bool c = defined > 0 && zero_frac >= 0.9;
    detail << "; (c) FP=0 in " << zero << "/" << defined << " ML cells with SNR >= 4 (" << fmt(zero_frac, 3)
           << ", >= 0.9)";

    // (d) grid-mean FP, MKL vs SVM
    auto mean_fp = [&](Track t) {
        double s = 0.0;
        std::size_t n = 0;
        for (double snr : kSnr)
            for (auto ch : kChannels)
                if (const auto fp = g.at(snr, ch, t).fp_adaptive) {
                    s += *fp;
                    ++n;
                }
        return n ? s / double(n) : NAN;
    };
    const double fp_svm = mean_fp(Track::svm), fp_mkl = mean_fp(Track::mkl);
    const bool d = fp_mkl <= fp_svm;
    detail << "; (d) mean FP MKL " << fmt(fp_mkl, 4) << " <= SVM " << fmt(fp_svm, 4);

    pass = pass && a && b && c && d;
    return {pass, detail.str()};
}

Outcome cosine_trend() {
    const auto& g = reduced_grid();
    auto mean = [&](Track t, bool channel) {
        double s = 0.0;
        std::size_t n = 0;
        for (double snr : kSnr)
            for (auto ch : kChannels) {
                const auto& r = g.at(snr, ch, t);
                if (const auto v = channel ? r.cosine_channel : r.cosine_feature) {
                    s += *v;
                    ++n;
                }
            }
        return n ? s / double(n) : NAN;
    };
    const double svm_f = mean(Track::svm, false), svm_c = mean(Track::svm, true);
    const double mkl_f = mean(Track::mkl, false), mkl_c = mean(Track::mkl, true);
    const bool pass = svm_c > svm_f && mkl_c > mkl_f;
    return {pass, "SVM channel " + fmt(svm_c) + " > feature " + fmt(svm_f) + "; MKL channel " + fmt(mkl_c) +
                      " > feature " + fmt(mkl_f)};
}

// ---------------------------------------------------------------------------
// 7. Univariate power

Outcome univariate_power() {
    const std::size_t n_seeds = 20;
    std::size_t full = 0;
    for (std::uint64_t s = 1; s <= n_seeds; ++s) {
        GridConfig config;
        NoiseSpec ns;
        ns.seed = 300 + s;
        config.generate = ns;
        config.master_seed = 900 + s;
        const auto baseline = generate_baseline(ns);
        bool all = true;
        for (double snr : {4.0, 8.0})
            for (auto n : kChannels) {
                const auto rows = run_cell(baseline, config, snr, n, {Track::univariate});
                if (!(rows[0].tp_adaptive && *rows[0].tp_adaptive == 1.0)) all = false;
            }
        if (all) ++full;
    }
    const double frac = double(full) / double(n_seeds);

    // Reported only: fraction of all reduced-grid cells with every signal channel found.
    const auto& g = reduced_grid();
    std::size_t cells = 0, full_cells = 0;
    for (double snr : kSnr)
        for (auto n : kChannels) {
            ++cells;
            const auto tp = g.at(snr, n, Track::univariate).tp_adaptive;
            if (tp && *tp == 1.0) ++full_cells;
        }
    return {frac >= 0.95, "TP=1 in every SNR >= 4 cell for " + std::to_string(full) + "/" + std::to_string(n_seeds) +
                              " seeds = " + fmt(frac, 2) + " (>= 0.95); reduced grid cells with full TP: " +
                              std::to_string(full_cells) + "/" + std::to_string(cells)};
}

// ---------------------------------------------------------------------------
// 8. Determinism and resumability

GridConfig small_config(const fs::path& dir) {
    GridConfig config;
    NoiseSpec ns;
    ns.n_trials_a = 30;
    ns.n_trials_b = 28;
    ns.n_channels = 12;
    ns.n_time = 301;
    ns.sampling_rate = 300.0;
    ns.seed = 42;
    config.generate = ns;
    config.snr_values = {2.0, 8.0};
    config.sparsity_channels = {4, 12};
    config.n_perm_univariate = 500;
    config.n_perm_model = 20;
    config.permutation_cells = {{8.0, 4}};
    config.master_seed = 7;
    config.output_dir = dir;
    return config;
}

Outcome determinism() {
    const auto dir1 = kWork / "det_1", dir2 = kWork / "det_2", dir3 = kWork / "det_3", dir4 = kWork / "det_4";
    for (const auto& d : {dir1, dir2, dir3, dir4}) fs::remove_all(d);

    auto c1 = small_config(dir1);
    c1.threads = 1;
    run_grid(c1);
    auto c2 = small_config(dir2);
    c2.threads = 3;
    run_grid(c2);
    const auto csv1 = fixture::read_file(dir1 / "results.csv");
    const auto csv2 = fixture::read_file(dir2 / "results.csv");
    const bool identical = csv1 == csv2 && !csv1.empty();
    const bool prov_same = fixture::read_file(dir1 / "provenance.json") == fixture::read_file(dir2 / "provenance.json");

    // Keep the header and the first 5 rows plus half of the 6th, then resume.
    fs::create_directories(dir3);
    std::vector<std::string> lines;
    {
        std::istringstream in(csv1);
        for (std::string l; std::getline(in, l);) lines.push_back(l);
    }
    std::string truncated;
    for (std::size_t i = 0; i <= 5; ++i) truncated += lines[i] + "\n";
    truncated += lines[6].substr(0, lines[6].size() / 2);
    fixture::write_file(dir3 / "results.csv", truncated);
    run_grid(small_config(dir3));
    const bool resumed = fixture::read_file(dir3 / "results.csv") == csv1;

    // A subset config reproduces the same cells.
    auto c4 = small_config(dir4);
    c4.snr_values = {8.0};
    c4.sparsity_channels = {4};
    const auto sub = run_grid(c4);
    bool subset = !sub.rows.empty();
    const auto full = load_results(dir1 / "results.csv");
    for (const auto& r : sub.rows) {
        const auto it = std::find_if(full.rows.begin(), full.rows.end(), [&](const ResultRow& f) {
            return f.snr == r.snr && f.n_signal_channels == r.n_signal_channels && f.method == r.method;
        });
        subset = subset && it != full.rows.end() && *it == r;
    }

    const bool pass = identical && prov_same && resumed && subset;
    return {pass, std::string("rerun (1 vs 3 threads) byte-identical: ") + (identical ? "yes" : "no") +
                      ", provenance identical: " + (prov_same ? "yes" : "no") + ", truncated rerun reproduces " +
                      std::to_string(lines.size() - 6) + " missing rows exactly: " + (resumed ? "yes" : "no") +
                      ", subset grid matches: " + (subset ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 9. Formats

Outcome formats() {
    // EPD round trip of a default-size dataset.
    const auto d = generate_baseline(NoiseSpec{});
    const auto epd = kWork / "epd";
    fs::remove_all(epd);
    write_dataset(d, epd);
    const bool round_trip = read_dataset(epd) == d;

    // Every metric and method of the reduced grid as SVG.
    const auto& g = reduced_grid();
    const auto svg_dir = kWork / "svg";
    fs::remove_all(svg_dir);
    fs::create_directories(svg_dir);
    std::size_t svgs = 0, bad_svgs = 0;
    std::string why;
    for (auto t : {Track::univariate, Track::svm, Track::mkl})
        for (const auto& m : metric_names()) {
            const auto path = svg_dir / (std::string(track_name(t)) + "_" + m + ".svg");
            render_heatmap(g.result, m, t, path);
            ++svgs;
            std::string w;
            if (!fixture::xml_well_formed(path, &w)) {
                ++bad_svgs;
                why = path.filename().string() + ": " + w;
            }
        }

    // Results CSV schema.
    const std::string expected_header =
        "snr,n_signal_channels,s_in,method,balanced_accuracy,p_value,cosine_feature,cosine_channel,"
        "tp_adaptive,fp_adaptive,tp_top10,fp_top10,fp_top10_raw_count,error_code";
    std::ifstream in(kWork / "reduced_grid" / "results.csv");
    std::string header, line;
    std::getline(in, header);
    std::size_t rows = 0, bad_rows = 0;
    const std::set<std::string> methods{"univariate", "svm", "mkl"};
    while (std::getline(in, line)) {
        ++rows;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 14 || !methods.count(f[3]) || f[13].empty()) ++bad_rows;
    }
    const bool schema = header == expected_header && rows == 48 && bad_rows == 0;

    const bool pass = round_trip && bad_svgs == 0 && schema;
    return {pass, std::string("EPD round trip lossless: ") + (round_trip ? "yes" : "no") + ", SVG well-formed " +
                      std::to_string(svgs - bad_svgs) + "/" + std::to_string(svgs) + (why.empty() ? "" : " (" + why + ")") +
                      ", CSV header exact: " + (header == expected_header ? "yes" : "no") + ", " + std::to_string(rows) +
                      " rows with 14 fields, malformed " + std::to_string(bad_rows)};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 solver correctness", solver_correctness},
        {"2 MKL correctness", mkl_correctness},
        {"3 primal-dual consistency", primal_dual},
        {"4 null calibration", null_calibration},
        {"5 grid trends", grid_trends},
        {"6 channel vs feature cosine", cosine_trend},
        {"7 univariate power", univariate_power},
        {"8 determinism and resumability", determinism},
        {"9 format conformance", formats},
    };
    std::set<std::string> only;
    for (int i = 1; i < argc; ++i) only.insert(argv[i]);

    fs::create_directories(kWork);
    int failures = 0;
    for (const auto& [name, run] : criteria) {
        const std::string id = name.substr(0, name.find(' '));
        if (!only.empty() && !only.count(id)) continue;
        Stopwatch sw;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "criterion " << name << ": " << o.detail << " ["
                  << fmt(sw.seconds(), 1) << " s]" << std::endl;
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
