#include "vsd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace vsd::eval {

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.empty())
        throw std::invalid_argument("eval: empty input");
    if (scores.size() != labels.size())
        throw std::invalid_argument("eval: scores/labels size mismatch");
    for (double s : scores)
        if (!std::isfinite(s)) throw std::invalid_argument("eval: non-finite score");
}

}  // namespace

RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_inputs(scores, labels);
    const long n = static_cast<long>(scores.size());
    long total_pos = 0;
    for (int y : labels) total_pos += y != 0;
    const long total_neg = n - total_pos;
    if (total_pos == 0 || total_neg == 0)
        throw DataError("roc: both labels must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double t = scores[order[i]];
        // group ties: every item with this score flips at threshold t
        while (i < order.size() && scores[order[i]] == t) {
            if (labels[order[i]] != 0) ++tp; else ++fp;
            ++i;
        }
        curve.points.push_back({t, static_cast<double>(fp) / total_neg,
                                static_cast<double>(tp) / total_pos});
    }

    double auc = 0.0;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const RocPoint& a = curve.points[k - 1];
        const RocPoint& b = curve.points[k];
        auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    curve.auc = auc;

    // First sign change of g = fpr + tpr - 1 along the curve; g(-inf end) = +1,
    // g(start) = -1, so a crossing always exists.
    double eer = 0.5;
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const RocPoint& a = curve.points[k - 1];
        const RocPoint& b = curve.points[k];
        const double ga = a.fpr + a.tpr - 1.0;
        const double gb = b.fpr + b.tpr - 1.0;
        if (ga == 0.0) {
            eer = a.fpr;
            break;
        }
        if (ga < 0.0 && gb >= 0.0) {
            const double denom = (b.fpr - a.fpr) + (b.tpr - a.tpr);
            const double lambda = denom > 0.0 ? -ga / denom : 0.0;
            eer = a.fpr + lambda * (b.fpr - a.fpr);
            break;
        }
    }
    curve.eer = eer;
    return curve;
}

ThresholdMetrics threshold_metrics(const std::vector<double>& scores,
                                   const std::vector<int>& labels, double threshold) {
    check_inputs(scores, labels);
    long tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] > threshold;
        const bool actual = labels[i] != 0;
        if (predicted && actual) ++tp;
        else if (predicted) ++fp;
        else if (actual) ++fn;
        else ++tn;
    }
    ThresholdMetrics m{};
    if (tp + fp > 0)
        m.precision = static_cast<double>(tp) / (tp + fp);
    else
        m.precision = (tp + fn == 0) ? 1.0 : 0.0;
    m.recall = (tp + fn > 0) ? static_cast<double>(tp) / (tp + fn) : 1.0;
    m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(scores.size());
    return m;
}

double average_precision(const std::vector<double>& scores, const std::vector<int>& labels,
                         std::optional<std::size_t> cutoff) {
    check_inputs(scores, labels);
    long total_pos = 0;
    for (int y : labels) total_pos += y != 0;
    if (total_pos == 0)
        throw DataError("average_precision: no positive labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const std::size_t limit = cutoff ? std::min(*cutoff, order.size()) : order.size();
    double sum = 0.0;
    long hits = 0;
    for (std::size_t rank = 0; rank < limit; ++rank) {
        if (labels[order[rank]] != 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
        }
    }
    return hits > 0 ? sum / static_cast<double>(hits) : 0.0;
}

std::string roc_to_csv(const RocCurve& curve) {
    std::ostringstream os;
    os.precision(17);
    os << "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points) {
        if (std::isinf(p.threshold))
            os << "inf";
        else
            os << p.threshold;
        os << ',' << p.fpr << ',' << p.tpr << '\n';
    }
    return os.str();
}

}  // namespace vsd::eval
