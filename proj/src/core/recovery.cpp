#include "recovery.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace recoverbench {

std::vector<int> expected_ranking(const std::vector<std::vector<double>>& per_fold_contributions) {
    require(!per_fold_contributions.empty(), ErrorCode::invalid_argument, "expected ranking needs at least one fold");
    const std::size_t pc = per_fold_contributions.front().size();
    std::vector<double> sum(pc, 0.0);
    std::vector<std::size_t> order(pc);
    for (const auto& wc : per_fold_contributions) {
        require(wc.size() == pc, ErrorCode::invalid_argument, "folds disagree on the channel count");
        for (double v : wc)
            require(v >= 0 && std::isfinite(v), ErrorCode::validation, "channel contributions must be finite and >= 0");
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return wc[a] > wc[b]; });
        for (std::size_t pos = 0; pos < pc; ++pos) {
            const auto c = order[pos];
            if (wc[c] > 0) sum[c] += static_cast<double>(pc - pos);
        }
    }
    std::vector<int> er(pc);
    const auto folds = static_cast<double>(per_fold_contributions.size());
    for (std::size_t c = 0; c < pc; ++c) er[c] = static_cast<int>(std::round(sum[c] / folds));
    return er;
}

std::optional<double> cosine_similarity(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), ErrorCode::invalid_argument, "cosine similarity needs equal-length vectors");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) return std::nullopt;
    return std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
}

RankRates tp_fp_rates(std::span<const int> er, const GroundTruth& truth, ThresholdMode mode) {
    require(er.size() == truth.n_channels, ErrorCode::invalid_argument, "ranking length differs from the channel count");
    const std::size_t pc = truth.n_channels;
    const std::size_t n_signal = truth.signal_channels.size();
    require(n_signal > 0, ErrorCode::validation, "TP/FP rates need at least one signal channel");

    RankRates r;
    r.threshold = mode == ThresholdMode::adaptive ? static_cast<double>(pc - n_signal)
                                                  : static_cast<double>(pc) - 10.0;
    std::size_t tp = 0;
    for (std::size_t c = 0; c < pc; ++c) {
        if (static_cast<double>(er[c]) <= r.threshold) continue;
        (truth.is_signal(c) ? tp : r.fp_count) += 1;
    }
    r.tp = static_cast<double>(tp) / static_cast<double>(n_signal);
    if (n_signal < pc && r.threshold > 0) r.fp = static_cast<double>(r.fp_count) / r.threshold;
    return r;
}

RecoveryReport assemble_report(const CvResult& cv, const GroundTruth& truth) {
    require(!cv.folds.empty(), ErrorCode::invalid_argument, "cross-validation result has no folds");
    RecoveryReport rep;
    rep.method = cv.method;
    rep.balanced_accuracy = cv.balanced_accuracy;
    rep.p_value = cv.p_value;

    const std::size_t nc = truth.n_channels, nt = truth.n_time;
    std::vector<std::vector<double>> per_fold;
    std::vector<double> mean_w(nc * nt, 0.0), mean_wc(nc, 0.0);
    const double inv = 1.0 / static_cast<double>(cv.folds.size());
    for (const auto& f : cv.folds) {
        const auto& m = f.model;
        require(m.weight_map.rows() == nc && m.weight_map.cols() == nt && m.channel_contributions.size() == nc,
                ErrorCode::invalid_argument, "fold model does not match the ground-truth dimensions");
        per_fold.push_back(m.channel_contributions);
        const auto w = m.weight_map.values();
        for (std::size_t i = 0; i < w.size(); ++i) mean_w[i] += w[i] * inv;
        for (std::size_t c = 0; c < nc; ++c) mean_wc[c] += m.channel_contributions[c] * inv;
    }
    rep.er = expected_ranking(per_fold);

    if (!truth.has_signal() || truth.signal_channels.empty()) {
        rep.marker = "no_signal";
        return rep;
    }
    rep.cosine_feature = cosine_similarity(mean_w, truth.x_in);
    rep.cosine_channel = cosine_similarity(mean_wc, truth.channel_means);
    const auto adaptive = tp_fp_rates(rep.er, truth, ThresholdMode::adaptive);
    const auto top10 = tp_fp_rates(rep.er, truth, ThresholdMode::top10);
    rep.tp_adaptive = adaptive.tp;
    rep.fp_adaptive = adaptive.fp;
    rep.tp_top10 = top10.tp;
    rep.fp_top10 = top10.fp;
    if (top10.fp) rep.fp_top10_raw_count = top10.fp_count;
    return rep;
}

namespace {

template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> opt_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

} // namespace

nlohmann::json to_json(const RecoveryReport& r) {
    return {
        {"method", method_name(r.method)},
        {"balanced_accuracy", r.balanced_accuracy},
        {"p_value", opt_json(r.p_value)},
        {"er", r.er},
        {"cosine_feature", opt_json(r.cosine_feature)},
        {"cosine_channel", opt_json(r.cosine_channel)},
        {"tp_adaptive", opt_json(r.tp_adaptive)},
        {"fp_adaptive", opt_json(r.fp_adaptive)},
        {"tp_top10", opt_json(r.tp_top10)},
        {"fp_top10", opt_json(r.fp_top10)},
        {"fp_top10_raw_count", opt_json(r.fp_top10_raw_count)},
        {"marker", r.marker},
    };
}

RecoveryReport report_from_json(const nlohmann::json& j) {
    RecoveryReport r;
    try {
        r.method = parse_method(j.at("method").get<std::string>());
        r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
        r.p_value = opt_from<double>(j, "p_value");
        r.er = j.at("er").get<std::vector<int>>();
        r.cosine_feature = opt_from<double>(j, "cosine_feature");
        r.cosine_channel = opt_from<double>(j, "cosine_channel");
        r.tp_adaptive = opt_from<double>(j, "tp_adaptive");
        r.fp_adaptive = opt_from<double>(j, "fp_adaptive");
        r.tp_top10 = opt_from<double>(j, "tp_top10");
        r.fp_top10 = opt_from<double>(j, "fp_top10");
        r.fp_top10_raw_count = opt_from<std::size_t>(j, "fp_top10_raw_count");
        r.marker = j.value("marker", std::string{});
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("recovery report: ") + e.what());
    }
    return r;
}

} // namespace recoverbench
