#include "learners.hpp"

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace recoverbench {

const char* method_name(Method m) noexcept { return m == Method::svm ? "svm" : "mkl"; }

Method parse_method(const std::string& name) {
    if (name == "svm") return Method::svm;
    if (name == "mkl") return Method::mkl;
    fail(ErrorCode::invalid_argument, "unknown method '" + name + "' (expected svm or mkl)");
}

namespace {

void check_problem(const Matrix& k, std::span<const double> y, double c) {
    require(k.rows() == k.cols() && k.rows() == y.size() && !y.empty(), ErrorCode::invalid_argument,
            "kernel must be square and match the label count");
    require(c > 0 && std::isfinite(c), ErrorCode::invalid_argument, "C must be positive");
    double scale = 0.0;
    for (double v : k.values()) {
        require(std::isfinite(v), ErrorCode::numeric, "kernel contains non-finite values");
        scale = std::max(scale, std::abs(v));
    }
    require(asymmetry(k) <= 1e-10 * std::max(scale, 1.0), ErrorCode::invalid_argument, "kernel is not symmetric");
    bool pos = false, neg = false;
    for (double v : y) {
        require(v == 1.0 || v == -1.0, ErrorCode::invalid_argument, "labels must be +1 or -1");
        (v > 0 ? pos : neg) = true;
    }
    require(pos && neg, ErrorCode::validation, "SVM training needs both classes");
}

bool in_up(double y, double a, double c) { return y > 0 ? a < c : a > 0; }
bool in_low(double y, double a, double c) { return y > 0 ? a > 0 : a < c; }

} // namespace

double svm_dual_objective(const Matrix& k, std::span<const double> y, std::span<const double> alphas) {
    const std::size_t n = y.size();
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lin += alphas[i];
        if (alphas[i] == 0.0) continue;
        const auto row = k.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += alphas[j] * y[j] * row[j];
        quad += alphas[i] * y[i] * s;
    }
    return lin - 0.5 * quad;
}

SvmSolution svm_train(const Matrix& k, std::span<const double> y, double c, const SvmOptions& opt,
                      std::span<const double> warm_start) {
    check_problem(k, y, c);
    const std::size_t n = y.size();
    SvmSolution sol;
    sol.alphas.assign(n, 0.0);
    if (!warm_start.empty()) {
        require(warm_start.size() == n, ErrorCode::invalid_argument, "warm start length mismatch");
        for (std::size_t i = 0; i < n; ++i) sol.alphas[i] = std::clamp(warm_start[i], 0.0, c);
    }
    auto& a = sol.alphas;

    // Gradient of 1/2 a'Qa - e'a.
    std::vector<double> grad(n, -1.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (a[j] == 0.0) continue;
        const auto row = k.row(j);
        const double s = a[j] * y[j];
        for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * s * row[t];
    }

    constexpr double tau = 1e-12;
    std::size_t iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = n, j = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            if (in_up(y[t], a[t], c) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(y[t], a[t], c) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == n || j == n || gmax - gmin <= opt.tol) {
            sol.converged = true;
            break;
        }

        const double kii = k(i, i), kjj = k(j, j), kij = k(i, j);
        const double old_ai = a[i], old_aj = a[j];
        if (y[i] != y[j]) {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0) {
                if (a[j] < 0) { a[j] = 0; a[i] = diff; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
            }
            if (diff > 0) {
                if (a[i] > c) { a[i] = c; a[j] = c - diff; }
            } else {
                if (a[j] > c) { a[j] = c; a[i] = c + diff; }
            }
        } else {
            double quad = kii + kjj - 2.0 * kij;
            if (quad <= 0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > c) {
                if (a[i] > c) { a[i] = c; a[j] = sum - c; }
            } else {
                if (a[j] < 0) { a[j] = 0; a[i] = sum; }
            }
            if (sum > c) {
                if (a[j] > c) { a[j] = c; a[i] = sum - c; }
            } else {
                if (a[i] < 0) { a[i] = 0; a[j] = sum; }
            }
        }

        const double dai = (a[i] - old_ai) * y[i];
        const double daj = (a[j] - old_aj) * y[j];
        const auto ri = k.row(i);
        const auto rj = k.row(j);
        for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (dai * ri[t] + daj * rj[t]);
    }
    sol.iterations = iter;

    // Bias from free vectors; midpoint of the feasible interval otherwise.
    double sum_free = 0.0;
    std::size_t n_free = 0;
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (a[t] > 0 && a[t] < c) {
            sum_free += yg;
            ++n_free;
        } else if ((a[t] >= c && y[t] < 0) || (a[t] <= 0 && y[t] > 0)) {
            ub = std::min(ub, yg);
        } else {
            lb = std::max(lb, yg);
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    sol.bias = -rho;

    double lin = 0.0, quad = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        lin += a[t];
        quad += a[t] * (grad[t] + 1.0);
    }
    sol.objective = lin - 0.5 * quad;
    return sol;
}

double kkt_violation(const Matrix& k, std::span<const double> y, double c, std::span<const double> alphas,
                     double bias) {
    const std::size_t n = y.size();
    double worst = 0.0;
    double balance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = alphas[i];
        worst = std::max({worst, -a, a - c});
        balance += a * y[i];
        const auto row = k.row(i);
        double f = bias;
        for (std::size_t j = 0; j < n; ++j) f += alphas[j] * y[j] * row[j];
        const double margin = y[i] * f - 1.0;
        if (a <= 0) worst = std::max(worst, -margin);
        else if (a >= c) worst = std::max(worst, margin);
        else worst = std::max(worst, std::abs(margin));
    }
    return std::max(worst, std::abs(balance));
}

std::vector<double> decision_values(const Matrix& k_rows, std::span<const double> y,
                                    std::span<const double> alphas, double bias) {
    require(k_rows.cols() == y.size() && alphas.size() == y.size(), ErrorCode::invalid_argument,
            "test kernel columns must match the training set");
    std::vector<double> f(k_rows.rows(), bias);
    for (std::size_t r = 0; r < k_rows.rows(); ++r) {
        const auto row = k_rows.row(r);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += alphas[i] * y[i] * row[i];
        f[r] += s;
    }
    return f;
}

} // namespace recoverbench
