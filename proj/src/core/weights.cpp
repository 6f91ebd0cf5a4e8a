#include "learners.hpp"

#include "error.hpp"

#include <cmath>

namespace recoverbench {

std::vector<std::size_t> TrainedModel::support() const {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < alphas.size(); ++i)
        if (alphas[i] > 0.0) s.push_back(i);
    return s;
}

namespace {

double channel_coefficient(const TrainedModel& model, std::size_t c) {
    const double d = model.kernel_weights.empty() ? 1.0 : model.kernel_weights[c];
    const double s = model.kernel_scales.empty() ? 1.0 : model.kernel_scales[c];
    return (s > 0.0) ? d / s : 0.0;
}

} // namespace

void weight_map(TrainedModel& model, const EpochDataset& dataset, const Window& window) {
    require(model.alphas.size() == model.train_indices.size() && model.y.size() == model.train_indices.size(),
            ErrorCode::invalid_argument, "model coefficients do not match its training set");
    require(!model.train_indices.empty(), ErrorCode::invalid_argument, "model has an empty training set");
    const auto r = dataset.samples_in(window);
    const std::size_t nc = dataset.n_channels, nt = dataset.n_time;

    model.train_mean.assign(nc * nt, 0.0);
    const double inv = 1.0 / static_cast<double>(model.train_indices.size());
    for (auto trial : model.train_indices) {
        for (std::size_t c = 0; c < nc; ++c) {
            const auto tr = dataset.trace(trial, c);
            double* mu = model.train_mean.data() + c * nt;
            for (std::size_t t = r.first; t < r.last; ++t) mu[t] += tr[t] * inv;
        }
    }

    Matrix w(nc, nt);
    for (std::size_t c = 0; c < nc; ++c) {
        const double coef = channel_coefficient(model, c);
        if (coef == 0.0) continue;
        auto wrow = w.row(c);
        const double* mu = model.train_mean.data() + c * nt;
        for (std::size_t i = 0; i < model.train_indices.size(); ++i) {
            const double ay = model.alphas[i] * model.y[i];
            if (ay == 0.0) continue;
            const auto tr = dataset.trace(model.train_indices[i], c);
            for (std::size_t t = r.first; t < r.last; ++t) wrow[t] += ay * (tr[t] - mu[t]);
        }
        for (std::size_t t = r.first; t < r.last; ++t) wrow[t] *= coef;
    }
    model.weight_map = std::move(w);
}

double primal_decision(const TrainedModel& model, const EpochDataset& dataset, std::size_t trial,
                       const Window& window) {
    require(model.weight_map.rows() == dataset.n_channels && model.weight_map.cols() == dataset.n_time,
            ErrorCode::invalid_argument, "weight map shape does not match the dataset");
    const auto r = dataset.samples_in(window);
    double f = model.bias;
    for (std::size_t c = 0; c < dataset.n_channels; ++c) {
        const auto w = model.weight_map.row(c);
        const auto tr = dataset.trace(trial, c);
        const double* mu = model.train_mean.data() + c * dataset.n_time;
        for (std::size_t t = r.first; t < r.last; ++t) f += w[t] * (tr[t] - mu[t]);
    }
    return f;
}

std::vector<double> channel_contribution(const Matrix& w, SampleRange window_samples) {
    require(window_samples.size() > 0 && window_samples.last <= w.cols(), ErrorCode::invalid_argument,
            "window does not fit the weight map");
    std::vector<double> out(w.rows(), 0.0);
    for (std::size_t c = 0; c < w.rows(); ++c) {
        const auto row = w.row(c);
        double s = 0.0;
        for (std::size_t t = window_samples.first; t < window_samples.last; ++t) s += std::abs(row[t]);
        out[c] = s / static_cast<double>(window_samples.size());
    }
    return out;
}

} // namespace recoverbench
