#include "vsd/svm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "vsd/eval.hpp"

namespace vsd::svm {

using nlohmann::json;

std::string kernel_name(const KernelSpec& spec) {
    if (std::holds_alternative<LinearKernel>(spec)) return "linear";
    if (std::holds_alternative<RbfKernel>(spec)) return "rbf";
    return "chi2";
}

double kernel_eval(const KernelSpec& spec, const std::vector<double>& x,
                   const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("kernel_eval: dimension mismatch");
    if (const auto* rbf = std::get_if<RbfKernel>(&spec)) {
        if (!(rbf->gamma > 0.0))
            throw std::invalid_argument("kernel_eval: gamma must be positive");
        double d2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - y[i];
            d2 += d * d;
        }
        return std::exp(-rbf->gamma * d2);
    }
    if (const auto* chi = std::get_if<ChiSquareKernel>(&spec)) {
        if (!(chi->gamma > 0.0))
            throw std::invalid_argument("kernel_eval: gamma must be positive");
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < 0.0 || y[i] < 0.0)
                throw std::invalid_argument("kernel_eval: chi-square needs non-negative inputs");
            const double denom = x[i] + y[i];
            if (denom > 0.0) {
                const double d = x[i] - y[i];
                acc += d * d / denom;
            }
        }
        return std::exp(-chi->gamma * acc);
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    return dot;
}

double TrainedClassifier::decision_value(const std::vector<double>& x) const {
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i)
        f += alpha_y[i] * kernel_eval(kernel, support_vectors[i], x);
    return f;
}

namespace {

// Symmetric kernel matrix, precomputed when it fits; otherwise evaluated on
// the fly (training sets here are small, so the cache is the common path).
class KernelCache {
public:
    KernelCache(const KernelSpec& spec, const std::vector<const std::vector<double>*>& rows)
        : spec_(spec), rows_(rows) {
        const std::size_t n = rows.size();
        if (n <= 4096) {
            dense_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i; j < n; ++j) {
                    const double k = kernel_eval(spec_, *rows_[i], *rows_[j]);
                    dense_[i * n + j] = k;
                    dense_[j * n + i] = k;
                }
        }
    }

    double at(std::size_t i, std::size_t j) const {
        if (!dense_.empty()) return dense_[i * rows_.size() + j];
        return kernel_eval(spec_, *rows_[i], *rows_[j]);
    }

private:
    const KernelSpec& spec_;
    const std::vector<const std::vector<double>*>& rows_;
    std::vector<double> dense_;
};

}  // namespace

TrainedClassifier train(const std::vector<FeatureVector>& data,
                        const std::vector<int>& labels, const KernelSpec& kernel,
                        const TrainConfig& config) {
    const std::size_t n = data.size();
    if (n == 0 || labels.size() != n)
        throw std::invalid_argument("train: empty data or size mismatch");
    if (!(config.c > 0.0))
        throw std::invalid_argument("train: C must be positive");
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw std::invalid_argument("train: labels must be -1 or +1");
    }
    if (!has_pos || !has_neg)
        throw DegenerateTrainingError("train: single-class data");
    const FeatureChannel channel = data.front().channel();
    for (const FeatureVector& v : data) {
        if (v.channel() != channel)
            throw std::invalid_argument("train: mixed feature channels");
        if (v.dim() != data.front().dim())
            throw std::invalid_argument("train: inconsistent dimensions");
    }

    std::vector<const std::vector<double>*> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = &data[i].values();
    const KernelCache cache(kernel, rows);

    const double c = config.c;
    std::vector<double> alpha(n, 0.0);
    // g_k = 1 - y_k * sum_j alpha_j y_j K_jk, the dual gradient
    std::vector<double> g(n, 1.0);
    const std::vector<int>& y = labels;

    const long max_iter = config.max_passes * static_cast<long>(std::max<std::size_t>(n, 1));
    long iter = 0;
    double i_max = 0.0, j_min = 0.0;
    for (; iter < max_iter; ++iter) {
        // maximal violating pair
        long i = -1, j = -1;
        i_max = -std::numeric_limits<double>::infinity();
        j_min = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const double yg = y[k] * g[k];
            const bool in_up = y[k] == 1 ? alpha[k] < c : alpha[k] > 0.0;
            const bool in_low = y[k] == 1 ? alpha[k] > 0.0 : alpha[k] < c;
            if (in_up && yg > i_max) {
                i_max = yg;
                i = static_cast<long>(k);
            }
            if (in_low && yg < j_min) {
                j_min = yg;
                j = static_cast<long>(k);
            }
        }
        if (i < 0 || j < 0 || i_max - j_min < config.tolerance) break;

        const double kii = cache.at(i, i), kjj = cache.at(j, j), kij = cache.at(i, j);
        const double curvature = std::max(kii + kjj - 2.0 * kij, 1e-12);
        double lambda = (i_max - j_min) / curvature;
        // box clipping: alpha_i moves toward its upper bound, alpha_j toward 0
        const double room_i = y[i] == 1 ? c - alpha[i] : alpha[i];
        const double room_j = y[j] == 1 ? alpha[j] : c - alpha[j];
        lambda = std::min(lambda, std::min(room_i, room_j));
        if (!(lambda > 0.0)) break;

        alpha[i] = std::clamp(alpha[i] + y[i] * lambda, 0.0, c);
        alpha[j] = std::clamp(alpha[j] - y[j] * lambda, 0.0, c);
        for (std::size_t k = 0; k < n; ++k)
            g[k] += lambda * y[k] * (cache.at(j, k) - cache.at(i, k));
    }
    if (iter == max_iter)
        warn("train: SMO hit the iteration budget before reaching tolerance");

    TrainedClassifier clf;
    clf.kernel = kernel;
    clf.channel = channel;
    clf.c = c;
    // bias from the KKT interval; midpoint of the final violating pair values
    clf.bias = 0.5 * (i_max + j_min);
    if (!std::isfinite(clf.bias)) clf.bias = 0.0;

    double obj = 0.0;
    for (std::size_t k = 0; k < n; ++k) obj += alpha[k] * (1.0 + g[k]);
    clf.dual_objective = 0.5 * obj;

    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0.0) {
            clf.support_vectors.push_back(data[k].values());
            clf.alpha_y.push_back(alpha[k] * y[k]);
        }
    }
    if (clf.support_vectors.empty())
        throw DegenerateTrainingError("train: empty support set");
    return clf;
}

std::pair<double, double> platt_fit(const std::vector<double>& decision_values,
                                    const std::vector<int>& labels) {
    const std::size_t n = decision_values.size();
    if (n == 0 || labels.size() != n)
        throw std::invalid_argument("platt_fit: empty input or size mismatch");
    double prior1 = 0.0, prior0 = 0.0;
    for (int y : labels)
        (y > 0 ? prior1 : prior0) += 1.0;
    if (prior1 == 0.0 || prior0 == 0.0)
        throw std::invalid_argument("platt_fit: both labels must be present");
    const auto [lo_it, hi_it] =
        std::minmax_element(decision_values.begin(), decision_values.end());
    if (*hi_it - *lo_it < 1e-12)
        throw DegenerateTrainingError("platt_fit: all decision values identical");

    const int max_iter = 100;
    const double min_step = 1e-10;
    const double sigma = 1e-12;  // keeps the Hessian strictly positive definite
    const double eps = 1e-5;
    const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo_target = 1.0 / (prior0 + 2.0);

    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i)
        t[i] = labels[i] > 0 ? hi_target : lo_target;

    auto objective = [&](double a, double b) {
        double fval = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fApB = decision_values[i] * a + b;
            if (fApB >= 0.0)
                fval += t[i] * fApB + std::log1p(std::exp(-fApB));
            else
                fval += (t[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
        }
        return fval;
    };

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, b);

    for (int it = 0; it < max_iter; ++it) {
        double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fApB = decision_values[i] * a + b;
            double p, q;
            if (fApB >= 0.0) {
                p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
                q = 1.0 / (1.0 + std::exp(-fApB));
            } else {
                p = 1.0 / (1.0 + std::exp(fApB));
                q = std::exp(fApB) / (1.0 + std::exp(fApB));
            }
            const double d2 = p * q;
            h11 += decision_values[i] * decision_values[i] * d2;
            h22 += d2;
            h21 += decision_values[i] * d2;
            const double d1 = t[i] - p;
            g1 += decision_values[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < eps && std::abs(g2) < eps) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double stepsize = 1.0;
        while (stepsize >= min_step) {
            const double new_a = a + stepsize * da;
            const double new_b = b + stepsize * db;
            const double new_f = objective(new_a, new_b);
            if (new_f < fval + 1e-4 * stepsize * gd) {
                a = new_a;
                b = new_b;
                fval = new_f;
                break;
            }
            stepsize /= 2.0;
        }
        if (stepsize < min_step) break;
    }
    return {a, b};
}

namespace {

double platt_sigmoid(double f, double a, double b) {
    const double fApB = f * a + b;
    if (fApB >= 0.0)
        return std::exp(-fApB) / (1.0 + std::exp(-fApB));
    return 1.0 / (1.0 + std::exp(fApB));
}

}  // namespace

double predict_proba(const TrainedClassifier& clf, const std::vector<double>& x) {
    if (!clf.support_vectors.empty() && x.size() != clf.support_vectors.front().size())
        throw std::invalid_argument("predict_proba: dimension mismatch");
    return platt_sigmoid(clf.decision_value(x), clf.platt_a, clf.platt_b);
}

double predict_proba(const TrainedClassifier& clf, const FeatureVector& x) {
    return predict_proba(clf, x.values());
}

std::vector<GridCell> default_grid(int dim, bool allow_chi_square) {
    const std::vector<double> cs = {0.1, 1.0, 10.0, 100.0};
    std::vector<double> gammas = {1.0 / std::max(dim, 1), 0.1, 1.0};
    std::vector<GridCell> grid;
    for (double c : cs) grid.push_back({LinearKernel{}, c});
    for (double gamma : gammas)
        for (double c : cs) grid.push_back({RbfKernel{gamma}, c});
    if (allow_chi_square)
        for (double gamma : gammas)
            for (double c : cs) grid.push_back({ChiSquareKernel{gamma}, c});
    return grid;
}

std::pair<TrainedClassifier, GridSearchReport> kernel_grid_search(
    const std::vector<FeatureVector>& train_data, const std::vector<int>& train_labels,
    const std::vector<FeatureVector>& validation_data,
    const std::vector<int>& validation_labels, const std::vector<GridCell>& grid,
    const TrainConfig& base_config, int workers) {
    if (grid.empty())
        throw std::invalid_argument("kernel_grid_search: empty grid");
    if (validation_data.size() != validation_labels.size() || validation_data.empty())
        throw std::invalid_argument("kernel_grid_search: bad validation set");

    struct CellOutcome {
        GridCellResult result;
        std::optional<TrainedClassifier> clf;
    };
    std::vector<CellOutcome> outcomes(grid.size());

    auto run_cell = [&](std::size_t idx) {
        CellOutcome& out = outcomes[idx];
        out.result.cell = grid[idx];
        try {
            TrainConfig cfg = base_config;
            cfg.c = grid[idx].c;
            TrainedClassifier clf = train(train_data, train_labels, grid[idx].kernel, cfg);
            std::vector<double> decisions(validation_data.size());
            for (std::size_t i = 0; i < validation_data.size(); ++i)
                decisions[i] = clf.decision_value(validation_data[i].values());
            const auto [a, b] = platt_fit(decisions, validation_labels);
            clf.platt_a = a;
            clf.platt_b = b;
            std::vector<int> pos(validation_labels.size());
            for (std::size_t i = 0; i < validation_labels.size(); ++i)
                pos[i] = validation_labels[i] > 0 ? 1 : 0;
            out.result.validation_eer = eval::roc(decisions, pos).eer;
            out.clf = std::move(clf);
        } catch (const std::exception& e) {
            out.result.failed = true;
            out.result.error = e.what();
            out.result.validation_eer = 1.0;
        }
    };

    if (workers <= 1) {
        for (std::size_t idx = 0; idx < grid.size(); ++idx) run_cell(idx);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        const int thread_count = std::min<int>(workers, static_cast<int>(grid.size()));
        pool.reserve(thread_count);
        for (int w = 0; w < thread_count; ++w)
            pool.emplace_back([&] {
                for (std::size_t idx = next.fetch_add(1); idx < grid.size();
                     idx = next.fetch_add(1))
                    run_cell(idx);
            });
        for (std::thread& th : pool) th.join();
    }

    GridSearchReport report;
    std::optional<std::size_t> best;
    for (std::size_t idx = 0; idx < outcomes.size(); ++idx) {
        report.cells.push_back(outcomes[idx].result);
        if (outcomes[idx].result.failed) continue;
        if (!best || outcomes[idx].result.validation_eer <
                         outcomes[*best].result.validation_eer)
            best = idx;
    }
    if (!best)
        throw DegenerateTrainingError("kernel_grid_search: every grid cell failed");
    report.selected = *best;
    return {std::move(*outcomes[*best].clf), std::move(report)};
}

namespace {

json kernel_to_json(const KernelSpec& spec) {
    json j;
    j["kind"] = kernel_name(spec);
    if (const auto* rbf = std::get_if<RbfKernel>(&spec)) j["gamma"] = rbf->gamma;
    if (const auto* chi = std::get_if<ChiSquareKernel>(&spec)) j["gamma"] = chi->gamma;
    return j;
}

KernelSpec kernel_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "linear") return LinearKernel{};
    if (kind == "rbf") return RbfKernel{j.at("gamma").get<double>()};
    if (kind == "chi2") return ChiSquareKernel{j.at("gamma").get<double>()};
    throw FormatError("unknown kernel kind \"" + kind + "\"");
}

constexpr int kClassifierFormatVersion = 1;

}  // namespace

void save_classifier(const std::string& path, const TrainedClassifier& clf,
                     const std::string& meta_json) {
    json j;
    j["format_version"] = kClassifierFormatVersion;
    j["channel"] = channel_token(clf.channel);
    j["kernel"] = kernel_to_json(clf.kernel);
    j["c"] = clf.c;
    j["support_vectors"] = clf.support_vectors;
    j["coefficients"] = clf.alpha_y;
    j["bias"] = clf.bias;
    j["platt_a"] = clf.platt_a;
    j["platt_b"] = clf.platt_b;
    if (!meta_json.empty()) j["meta"] = json::parse(meta_json);
    std::ofstream out(path);
    if (!out)
        throw FormatError(path + ": cannot open for writing");
    out << j.dump(2) << '\n';
    if (!out)
        throw FormatError(path + ": write failed");
}

TrainedClassifier load_classifier(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path + ": cannot open");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != kClassifierFormatVersion)
            throw FormatError(path + ": unsupported classifier format version");
        TrainedClassifier clf;
        const auto channel = channel_from_token(j.at("channel").get<std::string>());
        if (!channel) throw FormatError(path + ": unknown channel tag");
        clf.channel = *channel;
        clf.kernel = kernel_from_json(j.at("kernel"));
        clf.c = j.value("c", 1.0);
        clf.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
        clf.alpha_y = j.at("coefficients").get<std::vector<double>>();
        clf.bias = j.at("bias").get<double>();
        clf.platt_a = j.at("platt_a").get<double>();
        clf.platt_b = j.at("platt_b").get<double>();
        if (clf.support_vectors.size() != clf.alpha_y.size())
            throw FormatError(path + ": support vector / coefficient count mismatch");
        return clf;
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace vsd::svm
