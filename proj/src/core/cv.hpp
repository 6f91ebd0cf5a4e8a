#pragma once

#include "dataio.hpp"
#include "kernels.hpp"
#include "learners.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace recoverbench {

/// Class-stratified outer folds, each with its own stratified inner folds
/// over the outer-training trials. All indices are dataset trial indices.
struct FoldPlan {
    std::vector<std::vector<std::size_t>> outer;              // test trials per outer fold
    std::vector<std::vector<std::vector<std::size_t>>> inner; // [outer][inner] test trials
    std::uint64_t seed = 0;

    std::size_t n_trials() const;
    std::vector<std::size_t> outer_train(std::size_t fold) const;
    std::vector<std::size_t> inner_train(std::size_t fold, std::size_t sub) const;
};

FoldPlan make_folds(std::span<const Label> labels, std::size_t k_outer = 10, std::size_t k_inner = 5,
                    std::uint64_t seed = 0);

inline const std::vector<double>& default_c_grid() {
    static const std::vector<double> grid{0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
    return grid;
}

struct CvOptions {
    Method method = Method::svm;
    std::vector<double> c_grid = default_c_grid();
    Window window{0.0, 1000.0};
    SvmOptions svm{};
    MklOptions mkl{};
    bool compute_maps = true; // weight maps and contributions of each outer model
};

struct FoldResult {
    std::vector<std::size_t> test_indices;
    std::vector<double> inner_scores; // mean inner balanced accuracy per C
    double chosen_c = 0.0;
    TrainedModel model;
    std::vector<double> decisions;    // per test trial
    double balanced_accuracy = 0.0;
    std::vector<std::size_t> dropped_channels; // MKL: zero-variance kernels
    double primal_dual_max_diff = 0.0;         // |<w, x~> + b - f_kernel| over all trials
};

struct CvResult {
    Method method = Method::svm;
    std::vector<double> decisions;  // per dataset trial
    std::vector<Label> predictions; // per dataset trial
    std::vector<FoldResult> folds;
    double balanced_accuracy = 0.0; // per-fold values averaged
    std::optional<double> p_value;
};

/// Mean of per-class accuracies. Throws when a class is absent from `truth`
/// unless `allow_missing_class`, in which case absent classes are skipped.
double balanced_accuracy(std::span<const Label> predicted, std::span<const Label> truth,
                         bool allow_missing_class = false);

/// Per-fold balanced accuracy averaged over the folds of `plan`.
double fold_balanced_accuracy(std::span<const Label> predicted, std::span<const Label> truth,
                              const std::vector<std::vector<std::size_t>>& folds,
                              bool allow_missing_class = false);

/// Nested cross-validation on precomputed raw per-channel kernels.
/// `labels` overrides dataset.labels (used by the permutation test).
CvResult run_cv(const EpochDataset& dataset, const KernelSet& raw, const FoldPlan& plan, const CvOptions& opt,
                std::span<const Label> labels = {});

CvResult run_cv(const EpochDataset& dataset, const FoldPlan& plan, const CvOptions& opt);

/// Label-permutation p-value of the cross-validated balanced accuracy, with
/// the fold plan held fixed. Empty when n_perm is 0.
std::optional<double> model_permutation_test(const EpochDataset& dataset, const KernelSet& raw,
                                             const FoldPlan& plan, const CvOptions& opt, double observed,
                                             std::size_t n_perm, std::uint64_t seed);

} // namespace recoverbench
