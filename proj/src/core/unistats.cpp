#include "unistats.hpp"

#include "error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

namespace recoverbench {

Matrix trial_means(const EpochDataset& dataset, const Window& window) {
    const auto r = dataset.samples_in(window);
    Matrix out(dataset.n_trials, dataset.n_channels);
    for (std::size_t i = 0; i < dataset.n_trials; ++i) {
        for (std::size_t c = 0; c < dataset.n_channels; ++c) {
            const auto tr = dataset.trace(i, c);
            double s = 0.0;
            for (std::size_t t = r.first; t < r.last; ++t) s += tr[t];
            out(i, c) = s / static_cast<double>(r.size());
        }
    }
    return out;
}

namespace {

double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    const double hi = *mid;
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

class StatisticEvaluator {
public:
    StatisticEvaluator(UnivariateStatistic kind, std::size_t n_a, std::size_t n_b)
        : kind_(kind) {
        a_.reserve(n_a);
        b_.reserve(n_b);
        if (kind == UnivariateStatistic::median_pairwise_difference) pairs_.reserve(n_a * n_b);
    }

    // `is_a[i]` selects the class of row i.
    double operator()(const Matrix& means, std::size_t channel, const std::vector<char>& is_a) {
        a_.clear();
        b_.clear();
        for (std::size_t i = 0; i < means.rows(); ++i) (is_a[i] ? a_ : b_).push_back(means(i, channel));
        if (kind_ == UnivariateStatistic::median_difference) return median_inplace(a_) - median_inplace(b_);
        pairs_.clear();
        for (double x : a_)
            for (double y : b_) pairs_.push_back(x - y);
        return median_inplace(pairs_);
    }

private:
    UnivariateStatistic kind_;
    std::vector<double> a_, b_, pairs_;
};

} // namespace

UnivariateResult permutation_test(const Matrix& means, std::span<const Label> labels, std::size_t n_perm,
                                  std::uint64_t seed, UnivariateStatistic statistic) {
    require(labels.size() == means.rows(), ErrorCode::invalid_argument, "labels length differs from trial count");
    const auto n_a = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::A));
    const std::size_t n_b = labels.size() - n_a;
    require(n_a >= 2 && n_b >= 2, ErrorCode::validation,
            "permutation test needs two classes with at least two trials each");

    const std::size_t n_channels = means.cols();
    std::vector<char> is_a(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) is_a[i] = labels[i] == Label::A;

    StatisticEvaluator eval(statistic, n_a, n_b);
    UnivariateResult res;
    res.n_permutations = n_perm;
    res.stat.resize(n_channels);
    for (std::size_t c = 0; c < n_channels; ++c) res.stat[c] = eval(means, c, is_a);

    std::vector<std::size_t> exceed(n_channels, 0);
    std::mt19937_64 rng(seed);
    std::vector<char> perm = is_a;
    for (std::size_t k = 0; k < n_perm; ++k) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t c = 0; c < n_channels; ++c)
            if (eval(means, c, perm) >= res.stat[c]) ++exceed[c];
    }
    res.p_values.resize(n_channels);
    for (std::size_t c = 0; c < n_channels; ++c)
        res.p_values[c] = static_cast<double>(1 + exceed[c]) / static_cast<double>(1 + n_perm);
    return res;
}

std::vector<bool> fdr_correct(std::span<const double> p_values, double q) {
    require(q > 0 && q <= 1, ErrorCode::validation, "FDR level q must lie in (0, 1]");
    const std::size_t m = p_values.size();
    for (double p : p_values)
        require(p > 0 && p <= 1, ErrorCode::validation, "p-values must lie in (0, 1]");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });

    std::size_t cutoff = 0; // number of rejected hypotheses
    for (std::size_t i = m; i-- > 0;) {
        if (p_values[order[i]] <= static_cast<double>(i + 1) * q / static_cast<double>(m)) {
            cutoff = i + 1;
            break;
        }
    }
    std::vector<bool> significant(m, false);
    for (std::size_t i = 0; i < cutoff; ++i) significant[order[i]] = true;
    return significant;
}

UnivariateRates univariate_rates(const std::vector<bool>& significant, const GroundTruth& truth) {
    require(significant.size() == truth.n_channels, ErrorCode::invalid_argument,
            "significance mask length differs from the ground-truth channel count");
    const std::size_t n_signal = truth.signal_channels.size();
    require(n_signal > 0, ErrorCode::validation, "TP rate is undefined without signal channels");
    std::size_t tp = 0, fp = 0;
    for (std::size_t c = 0; c < significant.size(); ++c) {
        if (!significant[c]) continue;
        (truth.is_signal(c) ? tp : fp) += 1;
    }
    UnivariateRates r;
    r.tp_rate = static_cast<double>(tp) / static_cast<double>(n_signal);
    const std::size_t n_null = truth.n_channels - n_signal;
    if (n_null > 0) r.fp_rate = static_cast<double>(fp) / static_cast<double>(n_null);
    return r;
}

void write_univariate_csv(std::ostream& out, const UnivariateResult& result,
                          std::span<const std::string> channel_ids) {
    require(channel_ids.size() == result.stat.size(), ErrorCode::invalid_argument, "channel id count mismatch");
    auto shortest = [](double v) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    };
    out << "channel_id,stat,p,significant\n";
    for (std::size_t c = 0; c < result.stat.size(); ++c) {
        const bool sig = c < result.significant.size() && result.significant[c];
        out << channel_ids[c] << ',' << shortest(result.stat[c]) << ',' << shortest(result.p_values[c]) << ','
            << (sig ? 1 : 0) << '\n';
    }
}

} // namespace recoverbench
