#include "inject.hpp"

#include "error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace recoverbench {

namespace fs = std::filesystem;
using nlohmann::json;

bool GroundTruth::has_signal() const {
    return std::any_of(x_in.begin(), x_in.end(), [](double v) { return v != 0.0; });
}

bool GroundTruth::is_signal(std::size_t channel) const {
    return std::binary_search(signal_channels.begin(), signal_channels.end(), channel);
}

std::vector<double> build_template(const Window& window, double gaussian_fwhm_ms,
                                   std::span<const double> time_offsets_ms, double sampling_rate) {
    require(!time_offsets_ms.empty(), ErrorCode::range, "empty time axis");
    require(gaussian_fwhm_ms >= 0 && std::isfinite(gaussian_fwhm_ms), ErrorCode::validation,
            "gaussian_fwhm_ms must be finite and >= 0");
    const double step = 1000.0 / sampling_rate;
    const double eps = 1e-9 * step;
    require(window.start_ms <= window.end_ms, ErrorCode::range, "window start is after window end");
    require(window.start_ms >= time_offsets_ms.front() - eps && window.end_ms <= time_offsets_ms.back() + eps,
            ErrorCode::range, "injection window lies outside the dataset time range");

    const double t0 = time_offsets_ms.front();
    auto rect = [&](double t) { return (t >= window.start_ms - eps && t <= window.end_ms + eps) ? 1.0 : 0.0; };

    const std::size_t n = time_offsets_ms.size();
    std::vector<double> out(n);
    if (gaussian_fwhm_ms == 0.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] = rect(time_offsets_ms[i]);
        return out;
    }

    const double sigma = gaussian_fwhm_ms / (2.0 * std::sqrt(2.0 * std::log(2.0))) / step;
    const auto half = static_cast<long>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
    for (long k = -half; k <= half; ++k) {
        const double x = static_cast<double>(k) / sigma;
        kernel[static_cast<std::size_t>(k + half)] = std::exp(-0.5 * x * x);
    }
    const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
    for (auto& v : kernel) v /= total;

    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (long k = -half; k <= half; ++k) {
            const double t = t0 + (static_cast<double>(i) - static_cast<double>(k)) * step;
            s += kernel[static_cast<std::size_t>(k + half)] * rect(t);
        }
        out[i] = std::clamp(s, 0.0, 1.0);
    }
    return out;
}

double amplitude_for_channel(const EpochDataset& dataset, std::size_t channel, const Window& window) {
    require(channel < dataset.n_channels, ErrorCode::range, "channel index out of range");
    const auto b_trials = dataset.trials_of(Label::B);
    require(b_trials.size() >= 2, ErrorCode::validation, "amplitude needs at least two B trials");
    const auto r = dataset.samples_in(window);

    std::vector<double> mean_trace(r.size(), 0.0);
    for (auto trial : b_trials) {
        const auto tr = dataset.trace(trial, channel);
        for (std::size_t t = r.first; t < r.last; ++t) mean_trace[t - r.first] += tr[t];
    }
    for (auto& v : mean_trace) v /= static_cast<double>(b_trials.size());

    const double mu = std::accumulate(mean_trace.begin(), mean_trace.end(), 0.0) / static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : mean_trace) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(r.size()));
    if (!(sd > 1e-12 * (std::abs(mu) + 1.0))) {
        fail(ErrorCode::degenerate, "channel " + dataset.channel_ids[channel] +
                                        ": B-trial average is constant over the window (zero std)");
    }
    return sd;
}

std::vector<std::size_t> channel_permutation(std::size_t n_channels, std::uint64_t seed) {
    std::vector<std::size_t> order(n_channels);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

std::pair<EpochDataset, GroundTruth> inject_signal(const EpochDataset& dataset, const InjectionSpec& spec) {
    require(spec.snr_in >= 0 && std::isfinite(spec.snr_in), ErrorCode::validation, "snr_in must be finite and >= 0");
    require(spec.n_signal_channels <= dataset.n_channels, ErrorCode::validation,
            "n_signal_channels exceeds the channel count");

    GroundTruth truth;
    truth.n_channels = dataset.n_channels;
    truth.n_time = dataset.n_time;
    truth.x_in.assign(dataset.n_channels * dataset.n_time, 0.0);
    truth.channel_means.assign(dataset.n_channels, 0.0);
    truth.snr_in = spec.snr_in;
    truth.window = spec.window;
    truth.gaussian_fwhm_ms = spec.gaussian_fwhm_ms;
    truth.channel_order_seed = spec.channel_order_seed;
    truth.s_in = static_cast<double>(spec.n_signal_channels) / static_cast<double>(dataset.n_channels);

    const auto order = channel_permutation(dataset.n_channels, spec.channel_order_seed);
    truth.signal_channels.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.n_signal_channels));
    std::sort(truth.signal_channels.begin(), truth.signal_channels.end());

    const auto shape = build_template(spec.window, spec.gaussian_fwhm_ms, dataset.time_offsets_ms,
                                      dataset.sampling_rate);
    EpochDataset out = dataset;
    if (spec.snr_in == 0.0) return {std::move(out), std::move(truth)};

    const auto a_trials = dataset.trials_of(Label::A);
    for (auto c : truth.signal_channels) {
        const double amplitude = spec.snr_in * amplitude_for_channel(dataset, c, spec.window);
        double* x = truth.x_in.data() + c * dataset.n_time;
        for (std::size_t t = 0; t < dataset.n_time; ++t) x[t] = amplitude * shape[t];
        truth.channel_means[c] =
            std::accumulate(x, x + dataset.n_time, 0.0) / static_cast<double>(dataset.n_time);
        for (auto trial : a_trials) {
            auto tr = out.trace(trial, c);
            for (std::size_t t = 0; t < dataset.n_time; ++t) tr[t] += x[t];
        }
    }
    return {std::move(out), std::move(truth)};
}

void write_truth(const GroundTruth& truth, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorCode::io, "cannot create directory " + dir.string());
    json j;
    j["format_version"] = 1;
    j["n_channels"] = truth.n_channels;
    j["n_time"] = truth.n_time;
    j["signal_channels"] = truth.signal_channels;
    j["s_in"] = truth.s_in;
    j["snr_in"] = truth.snr_in;
    j["channel_means"] = truth.channel_means;
    j["template"] = {{"window_ms", {truth.window.start_ms, truth.window.end_ms}},
                     {"gaussian_fwhm_ms", truth.gaussian_fwhm_ms},
                     {"fwhm_convention", "full width at half maximum"},
                     {"channel_order_seed", truth.channel_order_seed}};
    std::ofstream out(dir / "truth.json", std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write truth.json");
    out << j.dump(2) << '\n';
    out.close();
    write_f64(dir / "x_in.f64", truth.x_in);
}

GroundTruth read_truth(const fs::path& dir) {
    std::ifstream in(dir / "truth.json");
    require(static_cast<bool>(in), ErrorCode::io, "cannot open " + (dir / "truth.json").string());
    GroundTruth t;
    try {
        const json j = json::parse(in);
        t.n_channels = j.at("n_channels").get<std::size_t>();
        t.n_time = j.at("n_time").get<std::size_t>();
        t.signal_channels = j.at("signal_channels").get<std::vector<std::size_t>>();
        t.s_in = j.at("s_in").get<double>();
        t.snr_in = j.at("snr_in").get<double>();
        t.channel_means = j.at("channel_means").get<std::vector<double>>();
        const auto& tpl = j.at("template");
        const auto w = tpl.at("window_ms").get<std::vector<double>>();
        require(w.size() == 2, ErrorCode::parse, "truth.json: window_ms must have two entries");
        t.window = {w[0], w[1]};
        t.gaussian_fwhm_ms = tpl.at("gaussian_fwhm_ms").get<double>();
        t.channel_order_seed = tpl.at("channel_order_seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, "truth.json: " + std::string(e.what()));
    }
    require(t.channel_means.size() == t.n_channels, ErrorCode::parse, "truth.json: channel_means length mismatch");
    for (auto c : t.signal_channels)
        require(c < t.n_channels, ErrorCode::parse, "truth.json: signal channel index out of range");
    std::sort(t.signal_channels.begin(), t.signal_channels.end());
    t.x_in = read_f64(dir / "x_in.f64", t.n_channels * t.n_time);
    return t;
}

} // namespace recoverbench
