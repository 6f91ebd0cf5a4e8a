#pragma once

#include "dataio.hpp"
#include "matrix.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace recoverbench {

enum class Method { svm, mkl };

const char* method_name(Method m) noexcept;
Method parse_method(const std::string& name);

// ---------------------------------------------------------------------------
// Soft-margin SVM on a precomputed kernel

struct SvmOptions {
    double tol = 1e-3;                   // maximal KKT violation at exit
    std::size_t max_iterations = 10'000'000;
};

struct SvmSolution {
    std::vector<double> alphas;
    double bias = 0.0;
    double objective = 0.0; // dual objective sum(a) - 1/2 a'Qa
    std::size_t iterations = 0;
    bool converged = false;
};

/// SMO with maximal-violating-pair selection (lowest index wins ties).
/// `warm_start`, when non-empty, must be feasible for (y, C).
SvmSolution svm_train(const Matrix& k, std::span<const double> y, double c, const SvmOptions& opt = {},
                      std::span<const double> warm_start = {});

/// sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij
double svm_dual_objective(const Matrix& k, std::span<const double> y, std::span<const double> alphas);

/// Largest per-point KKT violation of (alphas, bias) measured on y*f - 1.
/// Box and equality-constraint violations are folded in.
double kkt_violation(const Matrix& k, std::span<const double> y, double c, std::span<const double> alphas,
                     double bias);

/// f(x) = sum_i a_i y_i K(x, x_i) + b for each row of `k_rows` (n_test x n_train).
std::vector<double> decision_values(const Matrix& k_rows, std::span<const double> y,
                                    std::span<const double> alphas, double bias);

inline Label decision_label(double f) { return f >= 0.0 ? Label::A : Label::B; }

// ---------------------------------------------------------------------------
// Sparse multiple kernel learning (reduced-gradient descent on the simplex)

struct MklOptions {
    SvmOptions svm{};
    double d_tol = 1e-4;         // stop when max |delta d| falls below
    double gap_tol = 1e-3;       // relative duality gap
    std::size_t max_outer = 200;
    double armijo = 1e-4;        // sufficient-decrease constant
    std::size_t max_backtracks = 40;
    double zero_clamp = 1e-8;    // weights below are set to 0 and the rest renormalized
};

struct MklSolution {
    std::vector<double> alphas;
    double bias = 0.0;
    std::vector<double> d;
    double objective = 0.0;                 // J(d) at the returned weights
    std::vector<double> objective_history;  // J after each accepted outer step (first entry: start)
    std::size_t outer_iterations = 0;
    std::string stop_reason;
};

/// Weighted kernel sum_m d_m K_m over entries with d_m > 0.
Matrix combine_kernels(std::span<const Matrix> kernels, std::span<const double> d);

/// J(d): optimal SVM dual objective for the combined kernel.
double mkl_objective(std::span<const Matrix> kernels, std::span<const double> y, double c,
                     std::span<const double> d, const SvmOptions& opt = {});

/// Kernels are expected centered and normalized on the training block; an
/// all-zero kernel is treated as degenerate and held at weight 0.
MklSolution mkl_train(std::span<const Matrix> kernels, std::span<const double> y, double c,
                      const MklOptions& opt = {});

// ---------------------------------------------------------------------------
// Trained model, weight map and channel contributions

struct TrainedModel {
    Method method = Method::svm;
    double c = 1.0;
    std::vector<std::size_t> train_indices;
    std::vector<double> y;               // +-1 per train trial
    std::vector<double> alphas;
    double bias = 0.0;
    std::vector<double> kernel_weights;  // d per channel; all ones for SVM
    std::vector<double> kernel_scales;   // normalization divisor per channel; 0 marks a dropped kernel
    Matrix weight_map;                   // [n_channels][n_time]; zero outside the window
    std::vector<double> train_mean;      // [n_channels * n_time] centering mean of train features
    std::vector<double> channel_contributions;

    std::vector<std::size_t> support() const;
};

/// w = sum_i a_i y_i * (d_m / s_m) * (x_i - mean_train), laid out [channel][time].
/// With this scaling f(x) = <w, x - mean_train> + b reproduces the kernel decision.
/// Fills model.weight_map and model.train_mean.
void weight_map(TrainedModel& model, const EpochDataset& dataset, const Window& window);

/// f(x) for dataset trial `trial` computed from the primal weights.
double primal_decision(const TrainedModel& model, const EpochDataset& dataset, std::size_t trial,
                       const Window& window);

/// Mean absolute weight per channel over the window samples.
std::vector<double> channel_contribution(const Matrix& w, SampleRange window_samples);

} // namespace recoverbench
