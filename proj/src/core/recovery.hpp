#pragma once

#include "cv.hpp"
#include "inject.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace recoverbench {

/// Per fold, channels with positive contribution are ranked p_c, p_c - 1, ...
/// in descending order (ties: lower index first); zero contributions rank 0.
/// The result is the fold mean rounded half away from zero.
std::vector<int> expected_ranking(const std::vector<std::vector<double>>& per_fold_contributions);

/// dot(a, b) / (|a| |b|); empty when either vector is zero.
std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b);

enum class ThresholdMode { adaptive, top10 };

struct RankRates {
    double threshold = 0.0;
    double tp = 0.0;
    std::optional<double> fp;  // empty when every channel carries signal
    std::size_t fp_count = 0;  // non-signal channels ranked above the threshold
};

/// thresh = p_c - |I_in| (adaptive) or p_c - 10 (top10);
/// TP = #{c in I_in : er_c > thresh} / |I_in|, FP = #{c not in I_in : er_c > thresh} / thresh.
RankRates tp_fp_rates(std::span<const int> er, const GroundTruth& truth, ThresholdMode mode);

struct RecoveryReport {
    Method method = Method::svm;
    double balanced_accuracy = 0.0;
    std::optional<double> p_value;
    std::vector<int> er;
    std::optional<double> cosine_feature;
    std::optional<double> cosine_channel;
    std::optional<double> tp_adaptive, fp_adaptive;
    std::optional<double> tp_top10, fp_top10;
    std::optional<std::size_t> fp_top10_raw_count;
    std::string marker; // empty, or "no_signal" for a cell without injected signal

    bool operator==(const RecoveryReport&) const = default;
};

RecoveryReport assemble_report(const CvResult& cv, const GroundTruth& truth);

nlohmann::json to_json(const RecoveryReport& r);
RecoveryReport report_from_json(const nlohmann::json& j);

} // namespace recoverbench
