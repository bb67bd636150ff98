#pragma once

// Integer-parameter incomplete beta / F-distribution, the lower bound on the
// distribution of Theta, and the jamming-power / constellation-size schedule
// that drives the outage below O(epsilon).

#include <usk/error.hpp>
#include <usk/lattice.hpp>
#include <usk/parallel.hpp>
#include <usk/uskenc.hpp>
#include <usk/wiretap.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace usk {

namespace detail {

inline double log_binomial(std::int64_t n, std::int64_t k) {
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) - std::lgamma(double(n - k) + 1.0);
}

/// sum_{j=first}^{last} C(n, j) x^j (1 - x)^(n - j), terms in log space.
inline double binomial_range(std::int64_t n, std::int64_t first, std::int64_t last, double x) {
    const double lx = std::log(x);
    const double l1x = std::log1p(-x);
    double sum = 0.0;
    for (std::int64_t j = first; j <= last; ++j) {
        sum += std::exp(log_binomial(n, j) + double(j) * lx + double(n - j) * l1x);
    }
    return sum;
}

}  // namespace detail

/// Regularized incomplete beta for positive integer a, b:
/// sum_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^(a+b-1-j), i.e. Pr{Bin(a+b-1, x) >= a}.
///
/// Sums the upper tail directly when it is the shorter side (or short enough
/// to be cheap); otherwise returns one minus the lower tail.
inline double reg_incomplete_beta(std::int64_t a, std::int64_t b, double x) {
    if (a < 1 || b < 1) throw Error(ErrorCode::DomainError, "incomplete beta needs integer a, b >= 1");
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::DomainError, "incomplete beta needs 0 <= x <= 1");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const std::int64_t n = a + b - 1;
    constexpr std::int64_t kDirectTerms = 4096;
    double value;
    if (b <= a || b <= kDirectTerms) {
        value = detail::binomial_range(n, a, n, x);
    } else {
        value = 1.0 - detail::binomial_range(n, 0, a - 1, x);
    }
    return std::clamp(value, 0.0, 1.0);
}

/// CDF of F(k1, k2) for even k1, k2.
inline double f_cdf(double f, int k1, int k2) {
    if (k1 < 2 || k2 < 2 || k1 % 2 != 0 || k2 % 2 != 0) {
        throw Error(ErrorCode::DomainError, "f_cdf supports even positive degrees of freedom only");
    }
    if (std::isnan(f) || f < 0.0) throw Error(ErrorCode::DomainError, "f_cdf needs f >= 0");
    if (f == 0.0) return 0.0;
    if (std::isinf(f)) return 1.0;
    const double arg = (double(k1) * f) / (double(k1) * f + double(k2));
    return reg_incomplete_beta(k1 / 2, k2 / 2, arg);
}

/// g(x, j) = x^2 M n_a (n_e - j + 1) / (4 pi e P_J n_e N_J (N_J - N n_b)).
inline double theta_bound_g(double x, const SystemConfig& cfg, double p_j, int j) {
    const double nj = cfg.total_jammer_antennas();
    const double num = x * x * cfg.m * cfg.n_a * (cfg.n_e - j + 1);
    const double den = 4.0 * std::numbers::pi * std::numbers::e * p_j * cfg.n_e * nj * cfg.otp_dim();
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    return num / den;
}

/// Lower bound on Pr{Theta(P_J) < x}:
/// prod_{j=1}^{n_a} B_{a, b_j}(a g / (a g + b_j)) with a = n_e N_J, b_j = n_e - j + 1.
inline double theta_cdf_lower_bound(double x, const SystemConfig& cfg, double p_j) {
    cfg.validate();
    if (std::isnan(x) || x < 0.0) throw Error(ErrorCode::DomainError, "theta bound needs x >= 0");
    if (cfg.n_e < cfg.n_a) throw Error(ErrorCode::DomainError, "theta bound needs n_e >= n_a");
    if (x == 0.0) return 0.0;
    const std::int64_t a = std::int64_t{cfg.n_e} * cfg.total_jammer_antennas();
    double prod = 1.0;
    for (int j = 1; j <= cfg.n_a; ++j) {
        const std::int64_t b = cfg.n_e - j + 1;
        const double g = theta_bound_g(x, cfg, p_j, j);
        const double arg = std::isinf(g) ? 1.0 : (double(a) * g) / (double(a) * g + double(b));
        prod *= reg_incomplete_beta(a, b, arg);
    }
    return prod;
}

enum class MRounding {
    PowerOfFour,    // square QAM with a power-of-two side
    PerfectSquare,  // any square QAM
};

/// Relative shortfall of the raw M requirement absorbed when rounding, so an
/// epsilon quoted to five significant figures still lands on its intended order.
inline constexpr double kMRoundingSlack = 1e-3;

struct BoundParams {
    double epsilon = 0.0;
    int d = 2;
    int n_a = 0;
    int n_e = 0;
    int n_min = 0;
    double kappa = 0.0;
    double phi = 0.0;
    double p_j_required = 0.0;
    double m_raw = 0.0;
    int m_required = 0;
};

/// Jamming power and constellation size that guarantee outage O(epsilon):
///   n_min = min(n_e - n_a + 1, n_a),  kappa = d^(1/(2 n_e)) / sqrt(pi),
///   phi = [(n_e - n_a)! / n_e!]^(1/(2 n_a)),
///   P_J = eps^(-2/n_min) kappa^2 / phi^(2 n_a / n_e),  M >= eps^(-3-2/n_min) kappa^2.
inline BoundParams solve_design_schedule(int n_a, int n_e, double epsilon, int d,
                                  MRounding rounding = MRounding::PowerOfFour) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::DomainError, "epsilon must lie in (0, 1)");
    if (d < 2) throw Error(ErrorCode::DomainError, "d must be >= 2");
    if (n_a < 1 || n_e < n_a) throw Error(ErrorCode::DomainError, "schedule requires n_e >= n_a >= 1");
    BoundParams p;
    p.epsilon = epsilon;
    p.d = d;
    p.n_a = n_a;
    p.n_e = n_e;
    p.n_min = std::min(n_e - n_a + 1, n_a);
    p.kappa = std::pow(double(d), 1.0 / (2.0 * n_e)) / std::sqrt(std::numbers::pi);
    const double log_ratio = std::lgamma(double(n_e - n_a) + 1.0) - std::lgamma(double(n_e) + 1.0);
    p.phi = std::exp(log_ratio / (2.0 * n_a));
    const double kappa2 = p.kappa * p.kappa;
    p.p_j_required = std::pow(epsilon, -2.0 / p.n_min) * kappa2 / std::pow(p.phi, 2.0 * n_a / double(n_e));
    p.m_raw = std::pow(epsilon, -3.0 - 2.0 / p.n_min) * kappa2;
    const double target = p.m_raw * (1.0 - kMRoundingSlack);
    if (rounding == MRounding::PowerOfFour) {
        long long m = 4;
        while (double(m) < target) m *= 4;
        if (m > std::numeric_limits<int>::max()) throw Error(ErrorCode::DomainError, "M requirement overflows");
        p.m_required = static_cast<int>(m);
    } else {
        long long s = std::max<long long>(2, static_cast<long long>(std::ceil(std::sqrt(target))));
        while (s > 2 && double((s - 1) * (s - 1)) >= target) --s;
        while (double(s * s) < target) ++s;
        if (s * s > std::numeric_limits<int>::max()) throw Error(ErrorCode::DomainError, "M requirement overflows");
        p.m_required = static_cast<int>(s * s);
    }
    return p;
}

/// Empirical Pr{Theta(P_J) < x} on x_grid from `samples` independent channel draws.
///
/// Draw i uses RngStream(seed, i), so the result does not depend on `threads`.
inline std::vector<double> theta_cdf_empirical(const SystemConfig& cfg, double p_j, int m, std::uint64_t samples,
                                               std::uint64_t seed, std::span<const double> x_grid,
                                               unsigned threads = 0) {
    if (samples < 1000) throw Error(ErrorCode::DomainError, "theta_cdf_empirical needs >= 1000 samples");
    SystemConfig geom = cfg;
    geom.p_j = p_j;
    geom.m = m;
    geom.validate();
    using Counts = std::vector<std::uint64_t>;
    const Counts zero(x_grid.size(), 0);
    const Counts below = parallel_trials(
        samples, threads, zero,
        [&](Counts& acc, std::uint64_t t) {
            RngStream rng(seed, t);
            const auto real = sample_realization(geom, rng);
            const double th = theta(real, p_j, m);
            for (std::size_t k = 0; k < x_grid.size(); ++k) {
                if (th < x_grid[k]) ++acc[k];
            }
        },
        [](Counts& into, const Counts& from) {
            for (std::size_t k = 0; k < into.size(); ++k) into[k] += from[k];
        });
    std::vector<double> cdf(x_grid.size());
    for (std::size_t k = 0; k < cdf.size(); ++k) cdf[k] = double(below[k]) / double(samples);
    return cdf;
}

}  // namespace usk
