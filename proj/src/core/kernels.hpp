#pragma once

#include "dataio.hpp"
#include "matrix.hpp"

#include <span>
#include <vector>

namespace recoverbench {

enum class KernelState { raw, centered, normalized };

/// One linear kernel per channel over all trials of a dataset.
struct KernelSet {
    std::vector<Matrix> kernels;
    std::vector<KernelState> states;
    Window window;
    std::vector<std::size_t> trial_index; // row i of every kernel is this dataset trial

    std::size_t size() const noexcept { return kernels.size(); }
    std::size_t n() const noexcept { return trial_index.size(); }
};

/// K_c[i][j] = <x_ic, x_jc> over the window samples.
KernelSet build_channel_kernels(const EpochDataset& dataset, const Window& window);

/// Element-wise sum; equals the linear kernel of the concatenated channels.
Matrix sum_kernels(std::span<const Matrix> kernels);
inline Matrix sum_kernels(const KernelSet& ks) { return sum_kernels(ks.kernels); }

/// Statistics of K over the training block that fully determine centering.
struct CenteringStats {
    std::vector<double> row_means; // mean_{t in train} K(i, t), for every row i
    double grand_mean = 0.0;       // mean_{t,t' in train} K(t, t')
};

CenteringStats centering_stats(const Matrix& k, std::span<const std::size_t> train);

/// Feature-space centering by the training mean, applied to every row and
/// column: K~(x,y) = K(x,y) - m(x) - m(y) + g.
Matrix center_kernel(const Matrix& k, std::span<const std::size_t> train);

/// Mean diagonal of K over the training block.
double train_trace_mean(const Matrix& k, std::span<const std::size_t> train);

/// K / (trace of train block / n_train). Throws a degenerate error on zero trace.
Matrix normalize_kernel(const Matrix& k, std::span<const std::size_t> train);

/// Centered (and optionally normalized) copy of every channel kernel,
/// with train-only constants. `scales[m]` receives the divisor used (1 when
/// not normalizing, 0 for a degenerate kernel that was zeroed out).
std::vector<Matrix> prepare_kernels(std::span<const Matrix> kernels, std::span<const std::size_t> train,
                                    bool normalize, std::vector<double>* scales = nullptr);

} // namespace recoverbench
