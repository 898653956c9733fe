#include "vsd/fusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "vsd/eval.hpp"

namespace vsd::fusion {

using nlohmann::json;

double fuse(const ChannelScores& scores, const WeightTuple& weights) {
    double acc = 0.0;
    for (int c = 0; c < kNumChannels; ++c) {
        const auto& s = scores.score[c];
        if (!s)
            throw DataError("fuse: missing " +
                            channel_token(static_cast<FeatureChannel>(c)) + " channel score");
        acc += weights[c] * *s;
    }
    // weights summing to 1 +/- a few ulps can push the sum a hair past 1.0
    // when every channel sits at probability 1
    return std::clamp(acc, 0.0, 1.0);
}

std::vector<WeightTuple> enumerate_weight_grid(double step) {
    if (!(step > 0.0 && step <= 1.0))
        throw std::invalid_argument("enumerate_weight_grid: step outside (0,1]");
    const double n_real = 1.0 / step;
    const long n = std::lround(n_real);
    if (std::abs(n_real - static_cast<double>(n)) > 1e-9)
        throw std::invalid_argument("enumerate_weight_grid: 1/step must be integral");

    std::vector<WeightTuple> grid;
    for (long i = 0; i <= n; ++i)
        for (long j = 0; j <= n - i; ++j)
            for (long k = 0; k <= n - i - j; ++k) {
                const long l = n - i - j - k;
                grid.push_back({static_cast<double>(i) * step, static_cast<double>(j) * step,
                                static_cast<double>(k) * step, static_cast<double>(l) * step});
            }
    return grid;
}

WeightSearchResult weight_search(const std::vector<ValidationEntry>& validation,
                                 double step, int workers) {
    if (validation.empty())
        throw std::invalid_argument("weight_search: empty validation set");
    for (const ValidationEntry& e : validation)
        if (!e.scores.complete())
            throw DataError("weight_search: incomplete channel scores in validation entry");
    const std::vector<WeightTuple> grid = enumerate_weight_grid(step);

    WeightSearchResult result;
    result.weights.step = step;
    result.report.resize(kNumViolenceClasses);

    auto search_class = [&](int ci) {
        WeightSearchClassReport& rep = result.report[ci];
        rep.violence_class = static_cast<ViolenceClass>(ci);

        std::vector<int> labels(validation.size());
        long positives = 0;
        for (std::size_t i = 0; i < validation.size(); ++i) {
            labels[i] = validation[i].truth[ci] ? 1 : 0;
            positives += labels[i];
        }
        if (positives == 0 || positives == static_cast<long>(validation.size())) {
            rep.skipped = true;
            result.weights.per_class[ci] = {0.25, 0.25, 0.25, 0.25};
            return;
        }

        std::vector<double> fused(validation.size());
        double best_eer = std::numeric_limits<double>::infinity();
        WeightTuple best{};
        for (const WeightTuple& tuple : grid) {
            for (std::size_t i = 0; i < validation.size(); ++i)
                fused[i] = fuse(validation[i].scores, tuple);
            const double eer = eval::roc(fused, labels).eer;
            if (eer < best_eer) {  // strict: first minimum is lexicographically smallest
                best_eer = eer;
                best = tuple;
            }
        }
        rep.eer = best_eer;
        rep.tuples_evaluated = grid.size();
        result.weights.per_class[ci] = best;
    };

    if (workers <= 1) {
        for (int ci = 0; ci < kNumViolenceClasses; ++ci) search_class(ci);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int thread_count = std::min(workers, kNumViolenceClasses);
        for (int w = 0; w < thread_count; ++w)
            pool.emplace_back([&] {
                for (int ci = next.fetch_add(1); ci < kNumViolenceClasses;
                     ci = next.fetch_add(1))
                    search_class(ci);
            });
        for (std::thread& th : pool) th.join();
    }

    for (const WeightSearchClassReport& rep : result.report)
        if (rep.skipped)
            warn("weight_search: class " + class_token(rep.violence_class) +
                 " has single-label ground truth, assigned uniform weights");
    return result;
}

std::pair<std::optional<ViolenceClass>, ClassScores> decide_multiclass(
    const ChannelScores& scores, const FusionWeights& weights) {
    ClassScores class_scores{};
    for (int ci = 0; ci < kNumViolenceClasses; ++ci)
        class_scores[ci] = fuse(scores, weights.per_class[ci]);
    int best = 0;
    for (int ci = 1; ci < kNumViolenceClasses; ++ci)
        if (class_scores[ci] > class_scores[best]) best = ci;
    std::optional<ViolenceClass> label;
    if (class_scores[best] >= 0.5) label = static_cast<ViolenceClass>(best);
    return {label, class_scores};
}

bool decide_binary(const ClassScores& class_scores) {
    double max_score = class_scores[0];
    for (double s : class_scores) max_score = std::max(max_score, s);
    return max_score > 0.5;
}

void save_weights(const std::string& path, const FusionWeights& weights,
                  const std::string& meta_json) {
    json j;
    j["step"] = weights.step;
    json w;
    for (int ci = 0; ci < kNumViolenceClasses; ++ci)
        w[class_token(static_cast<ViolenceClass>(ci))] = weights.per_class[ci];
    j["weights"] = w;
    if (!meta_json.empty()) j["provenance"] = json::parse(meta_json);
    std::ofstream out(path);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out)
        throw FormatError(path + ": write failed");
}

FusionWeights load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    FusionWeights weights;
    try {
        weights.step = j.at("step").get<double>();
        for (int ci = 0; ci < kNumViolenceClasses; ++ci) {
            const auto& arr = j.at("weights").at(class_token(static_cast<ViolenceClass>(ci)));
            const auto values = arr.get<std::vector<double>>();
            if (values.size() != kNumChannels)
                throw FormatError(path + ": weight tuple needs exactly 4 entries");
            double sum = 0.0;
            for (int c = 0; c < kNumChannels; ++c) {
                if (values[c] < 0.0 || values[c] > 1.0)
                    throw FormatError(path + ": weight outside [0,1]");
                weights.per_class[ci][c] = values[c];
                sum += values[c];
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw FormatError(path + ": weights must sum to 1");
        }
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return weights;
}

}  // namespace vsd::fusion
