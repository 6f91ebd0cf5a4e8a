#include "learners.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace recoverbench {

Matrix combine_kernels(std::span<const Matrix> kernels, std::span<const double> d) {
    require(!kernels.empty() && kernels.size() == d.size(), ErrorCode::invalid_argument,
            "kernel weights must match the kernel count");
    Matrix out(kernels.front().rows(), kernels.front().cols());
    auto dst = out.values();
    for (std::size_t m = 0; m < kernels.size(); ++m) {
        if (d[m] <= 0.0) continue;
        const auto src = kernels[m].values();
        require(src.size() == dst.size(), ErrorCode::invalid_argument, "kernel size mismatch");
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += d[m] * src[i];
    }
    return out;
}

double mkl_objective(std::span<const Matrix> kernels, std::span<const double> y, double c,
                     std::span<const double> d, const SvmOptions& opt) {
    return svm_train(combine_kernels(kernels, d), y, c, opt).objective;
}

namespace {

// a' Y K Y a
double quadratic_form(const Matrix& k, std::span<const double> ay) {
    double s = 0.0;
    for (std::size_t i = 0; i < ay.size(); ++i) {
        if (ay[i] == 0.0) continue;
        const auto row = k.row(i);
        double r = 0.0;
        for (std::size_t j = 0; j < ay.size(); ++j) r += row[j] * ay[j];
        s += ay[i] * r;
    }
    return s;
}

bool all_zero(const Matrix& k) {
    return std::all_of(k.values().begin(), k.values().end(), [](double v) { return v == 0.0; });
}

} // namespace

MklSolution mkl_train(std::span<const Matrix> kernels, std::span<const double> y, double c,
                      const MklOptions& opt) {
    require(!kernels.empty(), ErrorCode::invalid_argument, "MKL needs at least one kernel");
    const std::size_t m_count = kernels.size();
    std::vector<char> active(m_count);
    for (std::size_t m = 0; m < m_count; ++m) active[m] = !all_zero(kernels[m]);
    const auto n_active = static_cast<std::size_t>(std::count(active.begin(), active.end(), 1));
    require(n_active > 0, ErrorCode::degenerate, "MKL needs at least one non-degenerate kernel");

    std::vector<double> d(m_count, 0.0);
    for (std::size_t m = 0; m < m_count; ++m)
        if (active[m]) d[m] = 1.0 / static_cast<double>(n_active);

    SvmSolution svm = svm_train(combine_kernels(kernels, d), y, c, opt.svm);
    double objective = svm.objective;

    MklSolution out;
    out.objective_history.push_back(objective);

    const std::size_t n = y.size();
    std::vector<double> ay(n), quad(m_count), grad(m_count), dir(m_count), trial_d(m_count);
    out.stop_reason = "max_outer";

    for (std::size_t outer = 0; outer < opt.max_outer; ++outer) {
        for (std::size_t i = 0; i < n; ++i) ay[i] = svm.alphas[i] * y[i];
        double weighted = 0.0, best = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            quad[m] = active[m] ? quadratic_form(kernels[m], ay) : 0.0;
            grad[m] = -0.5 * quad[m];
            weighted += d[m] * quad[m];
            if (active[m]) best = std::max(best, quad[m]);
        }
        const double gap = 0.5 * (best - weighted);
        if (gap <= opt.gap_tol * std::abs(objective)) {
            out.stop_reason = "duality_gap";
            break;
        }

        // Reduced gradient with respect to the largest weight mu.
        std::size_t mu = m_count;
        for (std::size_t m = 0; m < m_count; ++m)
            if (active[m] && (mu == m_count || d[m] > d[mu])) mu = m;
        double dir_mu = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
            dir[m] = 0.0;
            if (!active[m] || m == mu) continue;
            const double reduced = grad[m] - grad[mu];
            if (d[m] <= 0.0 && reduced > 0.0) continue;
            dir[m] = -reduced;
            dir_mu -= dir[m];
        }
        dir[mu] = dir_mu;

        double slope = 0.0, gamma_max = INFINITY;
        for (std::size_t m = 0; m < m_count; ++m) {
            slope += grad[m] * dir[m];
            if (dir[m] < 0.0) gamma_max = std::min(gamma_max, -d[m] / dir[m]);
        }
        if (!(slope < 0.0) || !std::isfinite(gamma_max)) {
            out.stop_reason = "stationary";
            break;
        }

        // Armijo backtracking from the largest feasible step.
        bool accepted = false;
        double gamma = gamma_max;
        SvmSolution candidate;
        for (std::size_t bt = 0; bt < opt.max_backtracks; ++bt, gamma *= 0.5) {
            double total = 0.0;
            for (std::size_t m = 0; m < m_count; ++m) {
                trial_d[m] = std::max(0.0, d[m] + gamma * dir[m]);
                if (gamma == gamma_max && dir[m] < 0.0 && -d[m] / dir[m] == gamma_max) trial_d[m] = 0.0;
                total += trial_d[m];
            }
            for (auto& v : trial_d) v /= total;
            candidate = svm_train(combine_kernels(kernels, trial_d), y, c, opt.svm, svm.alphas);
            if (candidate.objective <= objective + opt.armijo * gamma * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.stop_reason = "line_search";
            break;
        }

        double change = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) change = std::max(change, std::abs(trial_d[m] - d[m]));
        d = trial_d;
        svm = std::move(candidate);
        objective = svm.objective;
        out.objective_history.push_back(objective);
        out.outer_iterations = outer + 1;
        if (change < opt.d_tol) {
            out.stop_reason = "weight_change";
            break;
        }
    }

    double total = 0.0;
    for (auto& v : d) {
        if (v < opt.zero_clamp) v = 0.0;
        total += v;
    }
    for (auto& v : d) v /= total;
    svm = svm_train(combine_kernels(kernels, d), y, c, opt.svm, svm.alphas);

    out.alphas = std::move(svm.alphas);
    out.bias = svm.bias;
    out.d = std::move(d);
    out.objective = svm.objective;
    return out;
}

} // namespace recoverbench
