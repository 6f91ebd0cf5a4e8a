#include "kernels.hpp"

#include "error.hpp"

#include <cmath>

namespace recoverbench {

KernelSet build_channel_kernels(const EpochDataset& dataset, const Window& window) {
    const auto r = dataset.samples_in(window);
    const std::size_t n = dataset.n_trials;
    KernelSet ks;
    ks.window = window;
    ks.trial_index.resize(n);
    for (std::size_t i = 0; i < n; ++i) ks.trial_index[i] = i;
    ks.kernels.reserve(dataset.n_channels);
    for (std::size_t c = 0; c < dataset.n_channels; ++c) {
        Matrix k(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* xi = dataset.trace(i, c).data() + r.first;
            for (std::size_t j = 0; j <= i; ++j) {
                const double* xj = dataset.trace(j, c).data() + r.first;
                double s = 0.0;
                for (std::size_t t = 0; t < r.size(); ++t) s += xi[t] * xj[t];
                k(i, j) = s;
                k(j, i) = s;
            }
        }
        ks.kernels.push_back(std::move(k));
    }
    ks.states.assign(dataset.n_channels, KernelState::raw);
    return ks;
}

Matrix sum_kernels(std::span<const Matrix> kernels) {
    require(!kernels.empty(), ErrorCode::invalid_argument, "no kernels to sum");
    Matrix out(kernels.front().rows(), kernels.front().cols());
    for (const auto& k : kernels) {
        require(k.rows() == out.rows() && k.cols() == out.cols(), ErrorCode::invalid_argument,
                "kernel size mismatch");
        auto dst = out.values();
        const auto src = k.values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
    return out;
}

CenteringStats centering_stats(const Matrix& k, std::span<const std::size_t> train) {
    require(!train.empty(), ErrorCode::invalid_argument, "centering needs a non-empty training set");
    require(k.rows() == k.cols(), ErrorCode::invalid_argument, "kernel must be square");
    CenteringStats st;
    st.row_means.resize(k.rows());
    const double inv = 1.0 / static_cast<double>(train.size());
    for (std::size_t i = 0; i < k.rows(); ++i) {
        const auto row = k.row(i);
        double s = 0.0;
        for (auto t : train) s += row[t];
        st.row_means[i] = s * inv;
    }
    double g = 0.0;
    for (auto t : train) g += st.row_means[t];
    st.grand_mean = g * inv;
    return st;
}

Matrix center_kernel(const Matrix& k, std::span<const std::size_t> train) {
    const auto st = centering_stats(k, train);
    Matrix out(k.rows(), k.cols());
    for (std::size_t i = 0; i < k.rows(); ++i)
        for (std::size_t j = 0; j < k.cols(); ++j)
            out(i, j) = k(i, j) - st.row_means[i] - st.row_means[j] + st.grand_mean;
    return out;
}

double train_trace_mean(const Matrix& k, std::span<const std::size_t> train) {
    require(!train.empty(), ErrorCode::invalid_argument, "normalization needs a non-empty training set");
    double tr = 0.0;
    for (auto t : train) tr += k(t, t);
    return tr / static_cast<double>(train.size());
}

namespace {

bool degenerate_trace(double trace_mean, const Matrix& k) {
    double scale = 0.0;
    for (double v : k.values()) scale = std::max(scale, std::abs(v));
    return !(trace_mean > 1e-12 * scale);
}

} // namespace

Matrix normalize_kernel(const Matrix& k, std::span<const std::size_t> train) {
    const double s = train_trace_mean(k, train);
    if (degenerate_trace(s, k))
        fail(ErrorCode::degenerate, "kernel has zero trace over the training block (channel carries no variance)");
    Matrix out = k;
    for (auto& v : out.values()) v /= s;
    return out;
}

std::vector<Matrix> prepare_kernels(std::span<const Matrix> kernels, std::span<const std::size_t> train,
                                    bool normalize, std::vector<double>* scales) {
    std::vector<Matrix> out;
    out.reserve(kernels.size());
    if (scales) scales->assign(kernels.size(), 1.0);
    for (std::size_t m = 0; m < kernels.size(); ++m) {
        Matrix c = center_kernel(kernels[m], train);
        if (normalize) {
            const double s = train_trace_mean(c, train);
            if (degenerate_trace(s, c)) {
                c = Matrix(c.rows(), c.cols());
                if (scales) (*scales)[m] = 0.0;
            } else {
                for (auto& v : c.values()) v /= s;
                if (scales) (*scales)[m] = s;
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace recoverbench
