#pragma once

// Benchmark tasks: the XNOR gate and sigmoid regression on [-6, 6].

#include <hydrores/dataset.hpp>
#include <hydrores/errors.hpp>
#include <hydrores/stats.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hydrores {

enum class TaskKind { Xnor, Regression };

inline std::string_view to_string(TaskKind t) { return t == TaskKind::Xnor ? "xnor" : "regression"; }

inline TaskKind parse_task(std::string_view s) {
    if (s == "xnor") return TaskKind::Xnor;
    if (s == "regression") return TaskKind::Regression;
    throw ArgumentError("unknown task '" + std::string(s) + "'");
}

inline constexpr double kSigmoidLo = -6.0;
inline constexpr double kSigmoidHi = 6.0;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// (A, B) in {0,1}^2 with target 1 iff A == B.
inline Dataset xnor_dataset() {
    std::vector<std::vector<double>> x{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    std::vector<double> y;
    for (const auto& r : x) y.push_back(r[0] == r[1] ? 1.0 : 0.0);
    return Dataset(std::move(x), std::move(y), FeatureSpec{{Discrete{2}, Discrete{2}}});
}

inline FeatureSpec sigmoid_spec(int digits = 3) { return FeatureSpec{{Continuous{digits, kSigmoidLo, kSigmoidHi}}}; }

/// n equally spaced points covering [-6, 6] including both ends. The grid is
/// built so that x_{n-1-i} = -x_i exactly.
inline Dataset sigmoid_dataset(std::size_t n_train = 8, int digits = 3) {
    if (n_train < 2) throw ArgumentError("sigmoid regression needs at least two training points");
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    const auto m = static_cast<double>(n_train - 1);
    for (std::size_t i = 0; i < n_train; ++i) {
        const double xi = (2.0 * static_cast<double>(i) - m) / m * kSigmoidHi;
        x.push_back({xi});
        y.push_back(sigmoid(xi));
    }
    return Dataset(std::move(x), std::move(y), sigmoid_spec(digits));
}

/// n points uniform on [-6, 6].
inline std::vector<double> test_points(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ArgumentError("need at least one test point");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(kSigmoidLo, kSigmoidHi);
    std::vector<double> out(n);
    for (double& v : out) v = u(rng);
    return out;
}

inline double mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) throw ArgumentError("prediction and target lengths differ");
    if (predictions.empty()) throw ArgumentError("mse of empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        s += d * d;
    }
    return s / static_cast<double>(predictions.size());
}

struct FitnessMse {
    double fitness = 0.0;
    double mse = 0.0;
};

struct CorrelationReport {
    stats::LinearFit loglog;  // log10 mse against log10 fitness
    stats::SpearmanResult spearman;
    std::size_t pairs_used = 0;
};

/// Relationship between elite fitness and test error. Pairs with zero
/// fitness, zero error or non-finite entries are dropped before the log.
inline CorrelationReport fitness_mse_correlation(std::span<const FitnessMse> pairs) {
    std::vector<double> f, e, lf, le;
    for (const auto& p : pairs) {
        if (!(p.fitness > 0.0) || !(p.mse > 0.0) || !std::isfinite(p.fitness) || !std::isfinite(p.mse)) continue;
        f.push_back(p.fitness);
        e.push_back(p.mse);
        lf.push_back(std::log10(p.fitness));
        le.push_back(std::log10(p.mse));
    }
    if (f.size() < 10)
        throw InsufficientDataError("need at least 10 pairs with positive fitness, got " + std::to_string(f.size()));
    return {stats::linear_fit(lf, le), stats::spearman(f, e), f.size()};
}

} // namespace hydrores
