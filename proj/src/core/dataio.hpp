#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace recoverbench {

enum class Label : std::uint8_t { A = 0, B = 1 };

inline char label_char(Label l) { return l == Label::A ? 'A' : 'B'; }
/// +1 for condition A, -1 for condition B.
inline double label_sign(Label l) { return l == Label::A ? 1.0 : -1.0; }

/// Closed time interval relative to onset, in milliseconds.
struct Window {
    double start_ms = 0.0;
    double end_ms = 1000.0;
    bool operator==(const Window&) const = default;
};

/// Half-open range of sample indices.
struct SampleRange {
    std::size_t first = 0;
    std::size_t last = 0;
    std::size_t size() const noexcept { return last - first; }
};

/// Epoched multichannel recording, stored C-order [trial][channel][time].
struct EpochDataset {
    std::size_t n_trials = 0;
    std::size_t n_channels = 0;
    std::size_t n_time = 0;
    std::vector<double> data;
    std::vector<Label> labels;
    std::vector<std::string> channel_ids;
    double sampling_rate = 1000.0;
    std::vector<double> time_offsets_ms;
    std::optional<std::uint64_t> seed;

    std::span<const double> trace(std::size_t trial, std::size_t channel) const {
        return {data.data() + (trial * n_channels + channel) * n_time, n_time};
    }
    std::span<double> trace(std::size_t trial, std::size_t channel) {
        return {data.data() + (trial * n_channels + channel) * n_time, n_time};
    }

    std::size_t count(Label l) const;
    std::vector<std::size_t> trials_of(Label l) const;

    /// Samples whose offsets lie in `w`. Throws a range error if the window
    /// leaves the recorded interval or selects no sample.
    SampleRange samples_in(const Window& w) const;

    /// Throws a validation error describing the first violated invariant.
    void validate() const;

    bool operator==(const EpochDataset&) const = default;
};

/// Time axis `start_ms + i * 1000 / sampling_rate`.
std::vector<double> uniform_time_axis(std::size_t n_time, double sampling_rate, double start_ms);

struct NoiseSpec {
    std::size_t n_trials_a = 60;
    std::size_t n_trials_b = 56;
    std::size_t n_channels = 38;
    std::size_t n_time = 1001;
    double sampling_rate = 1000.0;
    double time_start_ms = 0.0;
    double ar_coefficient = 0.9;
    double spatial_correlation = 0.2;
    double trial_jitter_sd = 0.1;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Gaussian AR(1) noise per channel with compound-symmetric innovations
/// across channels and a log-normal amplitude jitter per trial. Trials
/// 0..n_a-1 are labelled A, the rest B.
EpochDataset generate_baseline(const NoiseSpec& spec);

/// Directory layout: meta.json plus data.f64 (little-endian doubles).
void write_dataset(const EpochDataset& dataset, const std::filesystem::path& dir);
EpochDataset read_dataset(const std::filesystem::path& dir);

// Raw little-endian float64 blobs, shared with the ground-truth files.
void write_f64(const std::filesystem::path& file, std::span<const double> values);
std::vector<double> read_f64(const std::filesystem::path& file, std::size_t expected_count);

inline constexpr int kEpdFormatVersion = 1;

} // namespace recoverbench
