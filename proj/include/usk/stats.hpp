#pragma once

#include <usk/bounds.hpp>
#include <usk/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace usk {

inline double normal_cdf(double x, double mean = 0.0, double variance = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

/// CDF of chi-squared with an even number of degrees of freedom 2k:
/// 1 - exp(-x/2) sum_{i<k} (x/2)^i / i!.
inline double chi2_cdf_even(double x, int dof) {
    if (dof < 2 || dof % 2 != 0) throw Error(ErrorCode::DomainError, "chi2_cdf_even needs even dof >= 2");
    if (x <= 0.0) return 0.0;
    const double h = 0.5 * x;
    const int k = dof / 2;
    double term = std::exp(-h);
    double tail = term;
    for (int i = 1; i < k; ++i) {
        term *= h / i;
        tail += term;
    }
    return std::clamp(1.0 - tail, 0.0, 1.0);
}

/// Two-sided Kolmogorov-Smirnov statistic sup |F_n - F|.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw Error(ErrorCode::DomainError, "ks_statistic needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, (double(i) + 1.0) / n - f, f - double(i) / n});
    }
    return d;
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
inline double ks_critical_1pct(std::uint64_t n) {
    return 1.63 / std::sqrt(static_cast<double>(n));
}

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Exact (Clopper-Pearson) two-sided interval for k successes in n trials.
///
/// The bounds solve Pr{Bin(n, p) >= k} = alpha/2 and Pr{Bin(n, p) <= k} = alpha/2,
/// both expressed through the integer incomplete beta and found by bisection.
inline Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence = 0.95) {
    if (n == 0 || k > n) throw Error(ErrorCode::DomainError, "clopper_pearson needs 0 <= k <= n, n >= 1");
    const double alpha = 1.0 - confidence;
    auto solve = [](auto&& f, double target) {
        // f increasing in p
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(hi, 1e-300); ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const auto kk = static_cast<std::int64_t>(k);
    const auto nn = static_cast<std::int64_t>(n);
    Interval ci;
    if (k == 0) {
        ci.low = 0.0;
    } else {
        // Pr{Bin(n, p) >= k} = B_{k, n-k+1}(p)
        ci.low = solve([&](double p) { return reg_incomplete_beta(kk, nn - kk + 1, p); }, alpha / 2);
    }
    if (k == n) {
        ci.high = 1.0;
    } else {
        // Pr{Bin(n, p) >= k+1} = B_{k+1, n-k}(p) must reach 1 - alpha/2
        ci.high = solve([&](double p) { return reg_incomplete_beta(kk + 1, nn - kk, p); }, 1.0 - alpha / 2);
    }
    return ci;
}

}  // namespace usk
