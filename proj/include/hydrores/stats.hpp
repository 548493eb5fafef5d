#pragma once

#include <hydrores/errors.hpp>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace hydrores::stats {

/// 1-based ranks, ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw InsufficientDataError("median of empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Pearson correlation; 0 when either input is constant.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("length mismatch");
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;  // two-sided, t approximation with n - 2 dof
    std::size_t n = 0;
};

inline SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("length mismatch");
    if (x.size() < 3) throw InsufficientDataError("Spearman correlation needs at least 3 pairs");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    SpearmanResult r{pearson(rx, ry), 1.0, x.size()};
    const double dof = static_cast<double>(x.size()) - 2.0;
    if (std::abs(r.rho) >= 1.0) {
        r.p_value = 0.0;
    } else if (r.rho != 0.0) {
        const double t = r.rho * std::sqrt(dof / (1.0 - r.rho * r.rho));
        boost::math::students_t dist(dof);
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return r;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double f_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = slope x + intercept. R^2 is 0 for constant y.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("length mismatch");
    if (x.size() < 3) throw InsufficientDataError("linear fit needs at least 3 points");
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InsufficientDataError("linear fit needs non-constant x");
    LinearFit f;
    f.n = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (syy > 0.0) {
        f.r_squared = std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
        const double dof = n - 2.0;
        if (f.r_squared < 1.0) {
            f.f_statistic = f.r_squared / (1.0 - f.r_squared) * dof;
            boost::math::fisher_f dist(1.0, dof);
            f.p_value = boost::math::cdf(boost::math::complement(dist, f.f_statistic));
        } else {
            f.f_statistic = std::numeric_limits<double>::infinity();
            f.p_value = 0.0;
        }
    }
    return f;
}

struct MannWhitneyResult {
    double u = 0.0;        // U statistic of the first sample
    double z = 0.0;
    double p_value = 0.5;  // one-sided, first sample stochastically greater
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double median1 = 0.0;
    double median2 = 0.0;
};

/// One-sided Mann-Whitney U test, normal approximation with tie and
/// continuity corrections.
inline MannWhitneyResult mann_whitney_greater(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InsufficientDataError("Mann-Whitney test needs two non-empty samples");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = average_ranks(pooled);

    MannWhitneyResult r;
    r.n1 = a.size();
    r.n2 = b.size();
    const auto n1 = static_cast<double>(r.n1);
    const auto n2 = static_cast<double>(r.n2);
    const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(r.n1), 0.0);
    r.u = rank_sum - n1 * (n1 + 1.0) / 2.0;
    r.median1 = median(std::vector<double>(a.begin(), a.end()));
    r.median2 = median(std::vector<double>(b.begin(), b.end()));

    // Tie correction: sum over tie groups of t^3 - t.
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i + 1);
        ties += t * t * t - t;
        i = j + 1;
    }
    const double n = n1 + n2;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    if (!(var > 0.0)) {
        r.p_value = 0.5;
        return r;
    }
    const double mu = n1 * n2 / 2.0;
    r.z = (r.u - mu - 0.5) / std::sqrt(var);
    r.p_value = 0.5 * std::erfc(r.z / std::sqrt(2.0));
    return r;
}

} // namespace hydrores::stats
