#pragma once

#include "dataio.hpp"

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace recoverbench {

struct InjectionSpec {
    double snr_in = 4.0;
    std::size_t n_signal_channels = 0;
    Window window{0.0, 1000.0};
    double gaussian_fwhm_ms = 200.0;
    std::uint64_t channel_order_seed = 0;
};

/// What was added to the A trials.
struct GroundTruth {
    std::size_t n_channels = 0;
    std::size_t n_time = 0;
    std::vector<double> x_in;                 // [channel][time]
    std::vector<std::size_t> signal_channels; // ascending
    double s_in = 0.0;
    double snr_in = 0.0;
    std::vector<double> channel_means;        // time average of x_in per channel
    Window window;
    double gaussian_fwhm_ms = 0.0;
    std::uint64_t channel_order_seed = 0;

    std::span<const double> channel_trace(std::size_t c) const {
        return {x_in.data() + c * n_time, n_time};
    }
    bool has_signal() const;
    bool is_signal(std::size_t channel) const;

    bool operator==(const GroundTruth&) const = default;
};

/// Rectangle of height 1 over `window`, convolved with a unit-sum Gaussian of
/// the given FWHM truncated at +-3 sigma. The rectangle is zero outside the
/// window on the whole time line, so a window edge sits at half height.
std::vector<double> build_template(const Window& window, double gaussian_fwhm_ms,
                                   std::span<const double> time_offsets_ms, double sampling_rate);

/// Population std over the window of the B-trial average on `channel`.
double amplitude_for_channel(const EpochDataset& dataset, std::size_t channel, const Window& window);

/// Pseudo-random channel order; the first n entries form the signal set.
std::vector<std::size_t> channel_permutation(std::size_t n_channels, std::uint64_t seed);

std::pair<EpochDataset, GroundTruth> inject_signal(const EpochDataset& dataset, const InjectionSpec& spec);

/// truth.json + x_in.f64 in `dir`.
void write_truth(const GroundTruth& truth, const std::filesystem::path& dir);
GroundTruth read_truth(const std::filesystem::path& dir);

} // namespace recoverbench
