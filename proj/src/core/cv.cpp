#include "cv.hpp"

#include "error.hpp"
#include "seed.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace recoverbench {

std::size_t FoldPlan::n_trials() const {
    std::size_t n = 0;
    for (const auto& f : outer) n += f.size();
    return n;
}

namespace {

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& excluded,
                                    const std::vector<std::size_t>* universe = nullptr) {
    std::vector<char> drop(n, 0);
    for (auto i : excluded) drop[i] = 1;
    std::vector<std::size_t> out;
    if (universe) {
        for (auto i : *universe)
            if (!drop[i]) out.push_back(i);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            if (!drop[i]) out.push_back(i);
    }
    return out;
}

// Shuffle each class and deal its trials round-robin into k folds.
std::vector<std::vector<std::size_t>> stratify(std::span<const std::size_t> trials, std::span<const Label> labels,
                                               std::size_t k, std::mt19937_64& rng) {
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t offset = 0;
    for (Label cls : {Label::A, Label::B}) {
        std::vector<std::size_t> members;
        for (auto t : trials)
            if (labels[t] == cls) members.push_back(t);
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t p = 0; p < members.size(); ++p) folds[(offset + p) % k].push_back(members[p]);
        offset = (offset + members.size()) % k;
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

} // namespace

std::vector<std::size_t> FoldPlan::outer_train(std::size_t fold) const {
    return complement(n_trials(), outer.at(fold));
}

std::vector<std::size_t> FoldPlan::inner_train(std::size_t fold, std::size_t sub) const {
    const auto universe = outer_train(fold);
    return complement(n_trials(), inner.at(fold).at(sub), &universe);
}

FoldPlan make_folds(std::span<const Label> labels, std::size_t k_outer, std::size_t k_inner, std::uint64_t seed) {
    require(k_outer >= 2 && k_inner >= 2, ErrorCode::validation, "fold counts must be at least 2");
    const auto n_a = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::A));
    const std::size_t n_b = labels.size() - n_a;
    if (n_a < k_outer || n_b < k_outer) {
        fail(ErrorCode::validation, "too few trials per class for " + std::to_string(k_outer) +
                                        "-fold cross-validation (A: " + std::to_string(n_a) +
                                        ", B: " + std::to_string(n_b) + ")");
    }
    FoldPlan plan;
    plan.seed = seed;
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::mt19937_64 rng(seed);
    plan.outer = stratify(all, labels, k_outer, rng);

    for (std::size_t f = 0; f < k_outer; ++f) {
        const auto train = plan.outer_train(f);
        std::size_t ta = 0;
        for (auto t : train) ta += labels[t] == Label::A;
        require(ta >= k_inner && train.size() - ta >= k_inner, ErrorCode::validation,
                "too few training trials per class for the inner folds");
        std::mt19937_64 inner_rng(derive_seed(seed, {f}));
        plan.inner.push_back(stratify(train, labels, k_inner, inner_rng));
    }
    return plan;
}

double balanced_accuracy(std::span<const Label> predicted, std::span<const Label> truth, bool allow_missing_class) {
    require(predicted.size() == truth.size(), ErrorCode::invalid_argument, "prediction and label lengths differ");
    double correct[2] = {0, 0};
    double total[2] = {0, 0};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto k = static_cast<std::size_t>(truth[i]);
        total[k] += 1;
        correct[k] += predicted[i] == truth[i];
    }
    double sum = 0.0;
    int classes = 0;
    for (int k = 0; k < 2; ++k) {
        if (total[k] == 0) {
            require(allow_missing_class, ErrorCode::validation, "balanced accuracy needs both classes in every fold");
            continue;
        }
        sum += correct[k] / total[k];
        ++classes;
    }
    require(classes > 0, ErrorCode::validation, "balanced accuracy of an empty fold");
    return sum / classes;
}

double fold_balanced_accuracy(std::span<const Label> predicted, std::span<const Label> truth,
                              const std::vector<std::vector<std::size_t>>& folds, bool allow_missing_class) {
    require(!folds.empty(), ErrorCode::invalid_argument, "no folds");
    double sum = 0.0;
    std::vector<Label> p, t;
    for (const auto& fold : folds) {
        p.clear();
        t.clear();
        for (auto i : fold) {
            p.push_back(predicted[i]);
            t.push_back(truth[i]);
        }
        sum += balanced_accuracy(p, t, allow_missing_class);
    }
    return sum / static_cast<double>(folds.size());
}

namespace {

struct PreparedSplit {
    std::vector<std::size_t> train;
    std::vector<double> y;
    std::vector<Matrix> train_kernels; // SVM: one summed kernel; MKL: one per channel
    std::vector<Matrix> test_rows;     // test x train blocks
    std::vector<double> scales;
    std::vector<std::size_t> dropped;
};

PreparedSplit prepare_split(const KernelSet& raw, const Matrix* summed, std::span<const std::size_t> train,
                            std::span<const std::size_t> test, std::span<const Label> labels, Method method) {
    PreparedSplit s;
    s.train.assign(train.begin(), train.end());
    for (auto t : train) s.y.push_back(label_sign(labels[t]));
    if (method == Method::svm) {
        const Matrix centered = center_kernel(*summed, train);
        s.train_kernels.push_back(submatrix(centered, train, train));
        s.test_rows.push_back(submatrix(centered, test, train));
        s.scales.assign(raw.size(), 1.0);
    } else {
        auto prepared = prepare_kernels(raw.kernels, train, /*normalize=*/true, &s.scales);
        for (std::size_t m = 0; m < prepared.size(); ++m) {
            if (s.scales[m] == 0.0) s.dropped.push_back(m);
            s.train_kernels.push_back(submatrix(prepared[m], train, train));
            s.test_rows.push_back(submatrix(prepared[m], test, train));
        }
    }
    return s;
}

struct Fit {
    std::vector<double> alphas;
    double bias = 0.0;
    std::vector<double> d;
};

Fit fit(const PreparedSplit& s, double c, const CvOptions& opt) {
    Fit f;
    if (opt.method == Method::svm) {
        auto sol = svm_train(s.train_kernels.front(), s.y, c, opt.svm);
        f.alphas = std::move(sol.alphas);
        f.bias = sol.bias;
    } else {
        auto sol = mkl_train(s.train_kernels, s.y, c, opt.mkl);
        f.alphas = std::move(sol.alphas);
        f.bias = sol.bias;
        f.d = std::move(sol.d);
    }
    return f;
}

std::vector<double> predict_split(const PreparedSplit& s, const Fit& f, Method method) {
    if (method == Method::svm) return decision_values(s.test_rows.front(), s.y, f.alphas, f.bias);
    return decision_values(combine_kernels(s.test_rows, f.d), s.y, f.alphas, f.bias);
}

std::vector<double> sorted_grid(std::vector<double> grid) {
    require(!grid.empty(), ErrorCode::validation, "C grid is empty");
    for (double c : grid) require(c > 0 && std::isfinite(c), ErrorCode::validation, "C values must be positive");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

} // namespace

CvResult run_cv(const EpochDataset& dataset, const KernelSet& raw, const FoldPlan& plan, const CvOptions& opt,
                std::span<const Label> labels) {
    if (labels.empty()) labels = dataset.labels;
    const std::size_t n = dataset.n_trials;
    require(labels.size() == n && plan.n_trials() == n && raw.n() == n, ErrorCode::invalid_argument,
            "fold plan, kernels and labels must cover the same trials");
    const auto grid = sorted_grid(opt.c_grid);
    const bool permuted = labels.data() != dataset.labels.data();

    std::optional<Matrix> summed;
    if (opt.method == Method::svm) summed = sum_kernels(raw);
    const Matrix* summed_ptr = summed ? &*summed : nullptr;

    CvResult res;
    res.method = opt.method;
    res.decisions.assign(n, 0.0);
    res.predictions.assign(n, Label::B);
    std::vector<char> covered(n, 0);

    for (std::size_t f = 0; f < plan.outer.size(); ++f) {
        FoldResult fold;
        fold.test_indices = plan.outer[f];
        const auto outer_train = plan.outer_train(f);

        // Inner model selection.
        std::vector<PreparedSplit> inner;
        for (std::size_t g = 0; g < plan.inner[f].size(); ++g)
            inner.push_back(prepare_split(raw, summed_ptr, plan.inner_train(f, g), plan.inner[f][g], labels,
                                          opt.method));
        fold.inner_scores.assign(grid.size(), 0.0);
        for (std::size_t ci = 0; ci < grid.size(); ++ci) {
            double score = 0.0;
            for (std::size_t g = 0; g < inner.size(); ++g) {
                const auto fit_g = fit(inner[g], grid[ci], opt);
                const auto dv = predict_split(inner[g], fit_g, opt.method);
                std::vector<Label> p, t;
                for (std::size_t r = 0; r < dv.size(); ++r) {
                    p.push_back(decision_label(dv[r]));
                    t.push_back(labels[plan.inner[f][g][r]]);
                }
                score += balanced_accuracy(p, t, permuted);
            }
            fold.inner_scores[ci] = score / static_cast<double>(inner.size());
        }
        std::size_t best = 0;
        for (std::size_t ci = 1; ci < grid.size(); ++ci)
            if (fold.inner_scores[ci] > fold.inner_scores[best]) best = ci;
        fold.chosen_c = grid[best];

        // Outer model.
        const auto split = prepare_split(raw, summed_ptr, outer_train, fold.test_indices, labels, opt.method);
        const auto model_fit = fit(split, fold.chosen_c, opt);
        fold.decisions = predict_split(split, model_fit, opt.method);
        fold.dropped_channels = split.dropped;

        std::vector<Label> p, t;
        for (std::size_t r = 0; r < fold.test_indices.size(); ++r) {
            const auto trial = fold.test_indices[r];
            res.decisions[trial] = fold.decisions[r];
            res.predictions[trial] = decision_label(fold.decisions[r]);
            require(!covered[trial], ErrorCode::internal, "trial predicted twice");
            covered[trial] = 1;
            p.push_back(res.predictions[trial]);
            t.push_back(labels[trial]);
        }
        fold.balanced_accuracy = balanced_accuracy(p, t, permuted);

        auto& model = fold.model;
        model.method = opt.method;
        model.c = fold.chosen_c;
        model.train_indices = outer_train;
        model.y = split.y;
        model.alphas = model_fit.alphas;
        model.bias = model_fit.bias;
        model.kernel_scales = split.scales;
        model.kernel_weights = opt.method == Method::mkl ? model_fit.d : std::vector<double>(raw.size(), 1.0);

        if (opt.compute_maps) {
            weight_map(model, dataset, opt.window);
            if (opt.method == Method::svm)
                model.channel_contributions = channel_contribution(model.weight_map, dataset.samples_in(opt.window));
            else
                model.channel_contributions = model.kernel_weights;

            // Primal-dual audit over train and test trials of this fold.
            const auto train_dv = decision_values(opt.method == Method::svm
                                                      ? split.train_kernels.front()
                                                      : combine_kernels(split.train_kernels, model_fit.d),
                                                  split.y, model_fit.alphas, model_fit.bias);
            double worst = 0.0;
            for (std::size_t i = 0; i < outer_train.size(); ++i)
                worst = std::max(worst, std::abs(primal_decision(model, dataset, outer_train[i], opt.window) -
                                                 train_dv[i]));
            for (std::size_t r = 0; r < fold.test_indices.size(); ++r)
                worst = std::max(worst, std::abs(primal_decision(model, dataset, fold.test_indices[r], opt.window) -
                                                 fold.decisions[r]));
            fold.primal_dual_max_diff = worst;
        }
        res.folds.push_back(std::move(fold));
    }
    require(std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }), ErrorCode::internal,
            "fold plan leaves trials without a prediction");

    double sum = 0.0;
    for (const auto& f : res.folds) sum += f.balanced_accuracy;
    res.balanced_accuracy = sum / static_cast<double>(res.folds.size());
    return res;
}

CvResult run_cv(const EpochDataset& dataset, const FoldPlan& plan, const CvOptions& opt) {
    const auto raw = build_channel_kernels(dataset, opt.window);
    return run_cv(dataset, raw, plan, opt);
}

std::optional<double> model_permutation_test(const EpochDataset& dataset, const KernelSet& raw,
                                             const FoldPlan& plan, const CvOptions& opt, double observed,
                                             std::size_t n_perm, std::uint64_t seed) {
    if (n_perm == 0) return std::nullopt;
    CvOptions quick = opt;
    quick.compute_maps = false;
    std::mt19937_64 rng(seed);
    std::vector<Label> permuted = dataset.labels;
    std::size_t exceed = 0;
    for (std::size_t k = 0; k < n_perm; ++k) {
        std::shuffle(permuted.begin(), permuted.end(), rng);
        const auto r = run_cv(dataset, raw, plan, quick, permuted);
        if (r.balanced_accuracy >= observed) ++exceed;
    }
    return static_cast<double>(1 + exceed) / static_cast<double>(1 + n_perm);
}

} // namespace recoverbench
