#pragma once

#include "dataio.hpp"
#include "inject.hpp"
#include "matrix.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace recoverbench {

/// How the per-channel class difference is summarised.
enum class UnivariateStatistic {
    median_difference,          // median(A means) - median(B means)
    median_pairwise_difference, // median over all (a, b) pairs of a - b
};

struct UnivariateResult {
    std::vector<double> stat;
    std::vector<double> p_values;
    std::vector<bool> significant;
    double q = 0.05;
    std::size_t n_permutations = 0;
};

/// Per-trial, per-channel mean over the window: [n_trials][n_channels].
Matrix trial_means(const EpochDataset& dataset, const Window& window);

/// One-sided (A > B) label-permutation test per channel. Each permutation
/// shuffles the labels once and is applied to every channel. p-values use the
/// add-one estimator; `significant` is left empty.
UnivariateResult permutation_test(const Matrix& means, std::span<const Label> labels, std::size_t n_perm,
                                  std::uint64_t seed,
                                  UnivariateStatistic statistic = UnivariateStatistic::median_difference);

/// Benjamini-Hochberg step-up at level q.
std::vector<bool> fdr_correct(std::span<const double> p_values, double q = 0.05);

struct UnivariateRates {
    double tp_rate = 0.0;
    std::optional<double> fp_rate; // empty when every channel carries signal
};

UnivariateRates univariate_rates(const std::vector<bool>& significant, const GroundTruth& truth);

/// channel_id,stat,p,significant
void write_univariate_csv(std::ostream& out, const UnivariateResult& result,
                          std::span<const std::string> channel_ids);

} // namespace recoverbench
