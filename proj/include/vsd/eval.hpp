#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vsd/errors.hpp"

namespace vsd::eval {

struct RocPoint {
    double threshold;  // strictly decreasing along the curve; starts at +inf
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;  // endpoints (0,0) and (1,1) always present
    double auc = 0.0;
    double eer = 0.0;
};

// Builds the ROC curve with one point per distinct score (ties grouped) plus a
// +inf sentinel. Classification at threshold t is score >= t. AUC is the
// trapezoid integral; EER linearly interpolates the first crossing of
// fpr = 1 - tpr. Labels are nonzero = positive; both labels must be present.
RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels);

struct ThresholdMetrics {
    double precision;
    double recall;
    double accuracy;
};

// Counts a prediction positive iff score > threshold (strict, matching the
// binary decision rule). Precision of an empty prediction set is 1.0 when no
// positives exist, 0.0 otherwise.
ThresholdMetrics threshold_metrics(const std::vector<double>& scores,
                                   const std::vector<int>& labels,
                                   double threshold = 0.5);

// Average precision over the ranking by descending score, ties kept in stable
// input order. cutoff restricts the ranking to its top-K prefix (AP@K).
double average_precision(const std::vector<double>& scores, const std::vector<int>& labels,
                         std::optional<std::size_t> cutoff = std::nullopt);

// CSV export, header "threshold,fpr,tpr".
std::string roc_to_csv(const RocCurve& curve);

}  // namespace vsd::eval
