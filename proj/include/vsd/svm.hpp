#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vsd/core.hpp"

namespace vsd::svm {

struct LinearKernel {};
struct RbfKernel {
    double gamma;
};
// exp(-gamma * sum_i (x_i - y_i)^2 / (x_i + y_i)); zero-denominator terms
// contribute zero. Inputs must be non-negative.
struct ChiSquareKernel {
    double gamma;
};

using KernelSpec = std::variant<LinearKernel, RbfKernel, ChiSquareKernel>;

std::string kernel_name(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, const std::vector<double>& x,
                   const std::vector<double>& y);

struct TrainConfig {
    double c = 1.0;
    double tolerance = 1e-3;
    long max_passes = 1000;  // iteration budget scales with the training size
    std::uint64_t seed = 0;
};

// Soft-margin binary SVM in dual form. Decision value
// f(x) = sum_i alpha_i y_i k(x_i, x) + bias; probability through the Platt
// sigmoid 1 / (1 + exp(platt_a * f + platt_b)).
struct TrainedClassifier {
    KernelSpec kernel;
    FeatureChannel channel = FeatureChannel::Audio;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> alpha_y;  // alpha_i * y_i per support vector
    double bias = 0.0;
    double platt_a = -1.0;
    double platt_b = 0.0;
    double c = 1.0;

    double decision_value(const std::vector<double>& x) const;
    // final dual objective sum(alpha) - 0.5 * alpha' Q alpha, kept for diagnostics
    double dual_objective = 0.0;
};

// SMO over the maximal violating pair until the KKT gap drops below
// config.tolerance. Labels are -1/+1; single-class data is degenerate.
TrainedClassifier train(const std::vector<FeatureVector>& data,
                        const std::vector<int>& labels, const KernelSpec& kernel,
                        const TrainConfig& config);

// Regularized sigmoid fit on decision values: targets (N+ + 1)/(N+ + 2) and
// 1/(N- + 2), Newton iterations with backtracking line search.
std::pair<double, double> platt_fit(const std::vector<double>& decision_values,
                                    const std::vector<int>& labels);

double predict_proba(const TrainedClassifier& clf, const std::vector<double>& x);
double predict_proba(const TrainedClassifier& clf, const FeatureVector& x);

struct GridCell {
    KernelSpec kernel;
    double c;
};

struct GridCellResult {
    GridCell cell;
    double validation_eer = 1.0;
    bool failed = false;
    std::string error;
};

struct GridSearchReport {
    std::vector<GridCellResult> cells;
    std::size_t selected = 0;  // index into cells
};

// Trains every cell on the training set, calibrates and scores on the
// validation set, and keeps the cell with minimal validation EER (ties go to
// the earlier grid position). Failed cells are reported, not fatal, unless
// every cell fails. Cells may be trained concurrently with `workers` threads;
// the selection is an ordered reduction so results do not depend on workers.
std::pair<TrainedClassifier, GridSearchReport> kernel_grid_search(
    const std::vector<FeatureVector>& train_data, const std::vector<int>& train_labels,
    const std::vector<FeatureVector>& validation_data,
    const std::vector<int>& validation_labels, const std::vector<GridCell>& grid,
    const TrainConfig& base_config, int workers = 1);

// C in {0.1, 1, 10, 100}; gamma in {1/dim, 0.1, 1} for RBF and Chi-Square.
// Chi-Square cells are omitted when allow_chi_square is false (negative
// feature values, e.g. the audio channel).
std::vector<GridCell> default_grid(int dim, bool allow_chi_square);

// Classifier file: JSON with kernel spec, support vectors, coefficients,
// bias, Platt params, channel tag and format version.
void save_classifier(const std::string& path, const TrainedClassifier& clf,
                     const std::string& meta_json = {});
TrainedClassifier load_classifier(const std::string& path);

}  // namespace vsd::svm
