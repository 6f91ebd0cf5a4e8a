#include "dataio.hpp"

#include "error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace recoverbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t EpochDataset::count(Label l) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

std::vector<std::size_t> EpochDataset::trials_of(Label l) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == l) out.push_back(i);
    return out;
}

SampleRange EpochDataset::samples_in(const Window& w) const {
    require(!time_offsets_ms.empty(), ErrorCode::range, "dataset has no time samples");
    require(w.start_ms <= w.end_ms, ErrorCode::range, "window start is after window end");
    const double step = 1000.0 / sampling_rate;
    const double eps = 1e-9 * step;
    const double lo = time_offsets_ms.front();
    const double hi = time_offsets_ms.back();
    if (w.start_ms < lo - eps || w.end_ms > hi + eps) {
        std::ostringstream msg;
        msg << "window [" << w.start_ms << ", " << w.end_ms << "] ms lies outside the recorded range ["
            << lo << ", " << hi << "] ms";
        fail(ErrorCode::range, msg.str());
    }
    SampleRange r{n_time, n_time};
    for (std::size_t t = 0; t < n_time; ++t) {
        if (time_offsets_ms[t] >= w.start_ms - eps) {
            r.first = t;
            break;
        }
    }
    r.last = r.first;
    while (r.last < n_time && time_offsets_ms[r.last] <= w.end_ms + eps) ++r.last;
    require(r.size() > 0, ErrorCode::range, "window selects no samples");
    return r;
}

void EpochDataset::validate() const {
    require(n_trials > 0 && n_channels > 0 && n_time > 0, ErrorCode::validation,
            "dataset dimensions must be positive");
    require(data.size() == n_trials * n_channels * n_time, ErrorCode::validation,
            "data length does not match n_trials * n_channels * n_time");
    require(labels.size() == n_trials, ErrorCode::validation, "labels length differs from n_trials");
    require(channel_ids.size() == n_channels, ErrorCode::validation,
            "channel_ids length differs from n_channels");
    require(time_offsets_ms.size() == n_time, ErrorCode::validation,
            "time_offsets_ms length differs from n_time");
    require(std::isfinite(sampling_rate) && sampling_rate > 0, ErrorCode::validation,
            "sampling_rate must be positive");
    require(count(Label::A) > 0 && count(Label::B) > 0, ErrorCode::validation,
            "dataset must contain trials of both classes A and B");
    const double step = 1000.0 / sampling_rate;
    for (std::size_t t = 1; t < n_time; ++t) {
        const double d = time_offsets_ms[t] - time_offsets_ms[t - 1];
        require(d > 0 && std::abs(d - step) <= 1e-6 * step, ErrorCode::validation,
                "time_offsets_ms must increase with step 1000/sampling_rate");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            std::ostringstream msg;
            msg << "non-finite value at flat index " << i;
            fail(ErrorCode::validation, msg.str());
        }
    }
}

std::vector<double> uniform_time_axis(std::size_t n_time, double sampling_rate, double start_ms) {
    std::vector<double> t(n_time);
    const double step = 1000.0 / sampling_rate;
    for (std::size_t i = 0; i < n_time; ++i) t[i] = start_ms + static_cast<double>(i) * step;
    return t;
}

void NoiseSpec::validate() const {
    auto bad = [](const char* field, const char* why) {
        fail(ErrorCode::validation, std::string("NoiseSpec.") + field + ": " + why);
    };
    if (n_trials_a < 1) bad("n_trials_a", "must be >= 1");
    if (n_trials_b < 1) bad("n_trials_b", "must be >= 1");
    if (n_channels < 1) bad("n_channels", "must be >= 1");
    if (n_time < 1) bad("n_time", "must be >= 1");
    if (!(sampling_rate > 0) || !std::isfinite(sampling_rate)) bad("sampling_rate", "must be positive");
    if (!std::isfinite(time_start_ms)) bad("time_start_ms", "must be finite");
    if (!(ar_coefficient >= 0 && ar_coefficient < 1)) bad("ar_coefficient", "must lie in [0, 1)");
    if (!(spatial_correlation >= 0 && spatial_correlation < 1))
        bad("spatial_correlation", "must lie in [0, 1)");
    if (!(trial_jitter_sd >= 0) || !std::isfinite(trial_jitter_sd))
        bad("trial_jitter_sd", "must be finite and >= 0");
}

namespace {

// Lower Cholesky factor of the compound-symmetry matrix (1-rho) I + rho 11'.
std::vector<double> compound_symmetry_cholesky(std::size_t n, double rho) {
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = (i == j) ? 1.0 : rho;
            for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                require(s > 0, ErrorCode::numeric, "spatial covariance is not positive definite");
                l[i * n + i] = std::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    return l;
}

} // namespace

EpochDataset generate_baseline(const NoiseSpec& spec) {
    spec.validate();
    EpochDataset d;
    d.n_trials = spec.n_trials_a + spec.n_trials_b;
    d.n_channels = spec.n_channels;
    d.n_time = spec.n_time;
    d.sampling_rate = spec.sampling_rate;
    d.time_offsets_ms = uniform_time_axis(spec.n_time, spec.sampling_rate, spec.time_start_ms);
    d.seed = spec.seed;
    d.labels.assign(d.n_trials, Label::B);
    std::fill_n(d.labels.begin(), spec.n_trials_a, Label::A);
    d.channel_ids.reserve(d.n_channels);
    for (std::size_t c = 0; c < d.n_channels; ++c) d.channel_ids.push_back("ch" + std::to_string(c + 1));
    d.data.assign(d.n_trials * d.n_channels * d.n_time, 0.0);

    const std::size_t nc = spec.n_channels;
    const auto chol = compound_symmetry_cholesky(nc, spec.spatial_correlation);
    const double phi = spec.ar_coefficient;
    const double innovation_scale = std::sqrt(1.0 - phi * phi);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(nc), e(nc), state(nc);

    auto correlated_draw = [&] {
        for (auto& v : z) v = normal(rng);
        for (std::size_t i = 0; i < nc; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k <= i; ++k) s += chol[i * nc + k] * z[k];
            e[i] = s;
        }
    };

    for (std::size_t trial = 0; trial < d.n_trials; ++trial) {
        const double scale = std::exp(spec.trial_jitter_sd * normal(rng));
        for (std::size_t t = 0; t < d.n_time; ++t) {
            correlated_draw();
            for (std::size_t c = 0; c < nc; ++c) {
                state[c] = (t == 0) ? e[c] : phi * state[c] + innovation_scale * e[c];
                d.trace(trial, c)[t] = scale * state[c];
            }
        }
    }
    return d;
}

void write_f64(const fs::path& file, std::span<const double> values) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io, "cannot open " + file.string() + " for writing");
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
    } else {
        for (double v : values) {
            auto bits = std::bit_cast<std::uint64_t>(v);
            unsigned char bytes[8];
            for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
            out.write(reinterpret_cast<const char*>(bytes), 8);
        }
    }
    require(static_cast<bool>(out), ErrorCode::io, "write failed for " + file.string());
}

std::vector<double> read_f64(const fs::path& file, std::size_t expected_count) {
    std::error_code ec;
    const auto actual_bytes = fs::file_size(file, ec);
    require(!ec, ErrorCode::io, "cannot stat " + file.string());
    const std::uintmax_t expected_bytes = expected_count * sizeof(double);
    if (actual_bytes != expected_bytes) {
        std::ostringstream msg;
        msg << file.filename().string() << ": payload length mismatch, expected " << expected_bytes
            << " bytes but found " << actual_bytes;
        fail(ErrorCode::parse, msg.str());
    }
    std::ifstream in(file, std::ios::binary);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open " + file.string());
    std::vector<double> values(expected_count);
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(expected_bytes));
    } else {
        for (auto& v : values) {
            unsigned char bytes[8];
            in.read(reinterpret_cast<char*>(bytes), 8);
            std::uint64_t bits = 0;
            for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
            v = std::bit_cast<double>(bits);
        }
    }
    require(static_cast<bool>(in), ErrorCode::io, "read failed for " + file.string());
    return values;
}

void write_dataset(const EpochDataset& dataset, const fs::path& dir) {
    dataset.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec, ErrorCode::io, "cannot create directory " + dir.string());

    json meta;
    meta["format_version"] = kEpdFormatVersion;
    meta["n_trials"] = dataset.n_trials;
    meta["n_channels"] = dataset.n_channels;
    meta["n_time"] = dataset.n_time;
    meta["sampling_rate"] = dataset.sampling_rate;
    meta["time_start_ms"] = dataset.time_offsets_ms.front();
    meta["channel_ids"] = dataset.channel_ids;
    json labels = json::array();
    for (auto l : dataset.labels) labels.push_back(std::string(1, label_char(l)));
    meta["labels"] = labels;
    meta["seed"] = dataset.seed ? json(*dataset.seed) : json(nullptr);

    std::ofstream out(dir / "meta.json", std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::io, "cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
    out.close();
    write_f64(dir / "data.f64", dataset.data);
}

EpochDataset read_dataset(const fs::path& dir) {
    const auto meta_path = dir / "meta.json";
    std::ifstream in(meta_path);
    require(static_cast<bool>(in), ErrorCode::io, "cannot open " + meta_path.string());
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, "meta.json: malformed JSON: " + std::string(e.what()));
    }

    EpochDataset d;
    try {
        const int version = meta.at("format_version").get<int>();
        require(version == kEpdFormatVersion, ErrorCode::parse,
                "meta.json: unsupported format_version " + std::to_string(version));
        d.n_trials = meta.at("n_trials").get<std::size_t>();
        d.n_channels = meta.at("n_channels").get<std::size_t>();
        d.n_time = meta.at("n_time").get<std::size_t>();
        d.sampling_rate = meta.at("sampling_rate").get<double>();
        d.channel_ids = meta.at("channel_ids").get<std::vector<std::string>>();
        const double start = meta.value("time_start_ms", 0.0);
        d.time_offsets_ms = uniform_time_axis(d.n_time, d.sampling_rate, start);
        if (!meta.at("seed").is_null()) d.seed = meta.at("seed").get<std::uint64_t>();

        const auto raw_labels = meta.at("labels").get<std::vector<std::string>>();
        std::set<std::string> classes(raw_labels.begin(), raw_labels.end());
        if (classes.size() != 2) {
            fail(ErrorCode::validation, "meta.json: labels declare " + std::to_string(classes.size()) +
                                            " classes, expected exactly 2 (A and B)");
        }
        for (const auto& l : raw_labels) {
            if (l == "A") d.labels.push_back(Label::A);
            else if (l == "B") d.labels.push_back(Label::B);
            else fail(ErrorCode::validation, "meta.json: unknown label '" + l + "'");
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::parse, "meta.json: " + std::string(e.what()));
    }
    require(d.labels.size() == d.n_trials, ErrorCode::parse, "meta.json: labels length differs from n_trials");
    require(d.channel_ids.size() == d.n_channels, ErrorCode::parse,
            "meta.json: channel_ids length differs from n_channels");

    d.data = read_f64(dir / "data.f64", d.n_trials * d.n_channels * d.n_time);
    for (std::size_t i = 0; i < d.data.size(); ++i) {
        if (!std::isfinite(d.data[i])) {
            const std::size_t per_trial = d.n_channels * d.n_time;
            std::ostringstream msg;
            msg << "data.f64: non-finite value at trial " << i / per_trial << ", channel "
                << (i % per_trial) / d.n_time << ", sample " << i % d.n_time;
            fail(ErrorCode::parse, msg.str());
        }
    }
    d.validate();
    return d;
}

} // namespace recoverbench
