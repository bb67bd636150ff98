#pragma once

// Monte-Carlo estimation of the ideal-secrecy outage probability, brute-force
// equivocation on tiny systems and distribution checks of the channel
// statistics used by the analytical bound.

#include <usk/bounds.hpp>
#include <usk/error.hpp>
#include <usk/lattice.hpp>
#include <usk/linalg.hpp>
#include <usk/parallel.hpp>
#include <usk/stats.hpp>
#include <usk/uskenc.hpp>
#include <usk/wiretap.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace usk {

struct SimulationOptions {
    OtpMode otp_mode = OtpMode::PerJammer;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct OutageEstimate {
    std::uint64_t trials = 0;
    std::uint64_t outages = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    int d = 2;
    int k = 1;
    std::uint64_t seed = 0;
};

/// One channel use as seen by the estimator.
struct UseSample {
    std::uint64_t l = 0;
    double r_max = 0.0;
};

namespace detail {

/// Draws channel, message and pad for one use and counts Eve's candidates.
inline UseSample draw_use(const SystemConfig& cfg, const Constellation& cons, RngStream& rng, OtpMode mode) {
    const auto real = sample_realization(cfg, rng);
    const CVector u = random_message(cons, cfg.n_a, rng);
    const OtpVector otp = sample_otp(cfg, rng, mode);
    const Cryptogram c = encrypt(real, cons, u, otp.v, cfg.p_j);
    UseSample s;
    s.r_max = r_max(real, cfg.p_j);
    s.l = count_finite(RealLattice(real.g), cons, c.y, s.r_max);
    return s;
}

inline void require_usk_regime(const SystemConfig& cfg) {
    cfg.validate();
    if (!cfg.usk_valid()) {
        throw Error(ErrorCode::InvalidRegime, "n_e >= N_J: Eve can zero-force the pad, secrecy estimators refuse");
    }
}

inline OutageEstimate finish_estimate(std::uint64_t trials, std::uint64_t hits, int d, int k, std::uint64_t seed) {
    OutageEstimate e;
    e.trials = trials;
    e.outages = hits;
    e.p_hat = double(hits) / double(trials);
    const Interval ci = clopper_pearson(hits, trials);
    e.ci_low = std::min(ci.low, e.p_hat);
    e.ci_high = std::max(ci.high, e.p_hat);
    e.d = d;
    e.k = k;
    e.seed = seed;
    return e;
}

}  // namespace detail

/// P_out(d, K): fraction of K-use blocks in which some use has L_i < d.
///
/// Trial t draws all of its K uses from RngStream(seed, t).
inline OutageEstimate estimate_outage(const SystemConfig& cfg, int d, int k_uses, std::uint64_t trials,
                                      std::uint64_t seed, const SimulationOptions& opts = {}) {
    detail::require_usk_regime(cfg);
    if (d < 1 || k_uses < 1 || trials < 1) throw Error(ErrorCode::DomainError, "need d >= 1, K >= 1, trials >= 1");
    const Constellation cons(cfg.m);
    const auto hits = parallel_trials(
        trials, opts.threads, std::uint64_t{0},
        [&](std::uint64_t& acc, std::uint64_t t) {
            RngStream rng(seed, t);
            bool outage = false;
            for (int i = 0; i < k_uses; ++i) {
                if (detail::draw_use(cfg, cons, rng, opts.otp_mode).l < static_cast<std::uint64_t>(d)) outage = true;
            }
            if (outage) ++acc;
        },
        [](std::uint64_t& into, std::uint64_t from) { into += from; });
    return detail::finish_estimate(trials, hits, d, k_uses, seed);
}

/// Pr{L_1 = 1, ..., L_K = 1}: every use of the block leaves Eve a unique candidate.
inline OutageEstimate estimate_all_one_probability(const SystemConfig& cfg, int k_uses, std::uint64_t trials,
                                                   std::uint64_t seed, const SimulationOptions& opts = {}) {
    detail::require_usk_regime(cfg);
    if (k_uses < 1 || trials < 1) throw Error(ErrorCode::DomainError, "need K >= 1, trials >= 1");
    const Constellation cons(cfg.m);
    const auto hits = parallel_trials(
        trials, opts.threads, std::uint64_t{0},
        [&](std::uint64_t& acc, std::uint64_t t) {
            RngStream rng(seed, t);
            bool all_one = true;
            for (int i = 0; i < k_uses; ++i) {
                if (detail::draw_use(cfg, cons, rng, opts.otp_mode).l != 1) all_one = false;
            }
            if (all_one) ++acc;
        },
        [](std::uint64_t& into, std::uint64_t from) { into += from; });
    return detail::finish_estimate(trials, hits, 2, k_uses, seed);
}

struct OutageRow {
    double epsilon = 0.0;
    double p_j = 0.0;
    int m = 0;
    OutageEstimate estimate;
    double theta_bound = 0.0;
};

/// Outage versus epsilon with (P_J, M) taken from the design schedule.
///
/// Every row reuses `seed` (common random numbers), which keeps the trend
/// between rows free of independent sampling noise.
inline std::vector<OutageRow> outage_curve(const SystemConfig& geometry, int d, std::span<const double> eps_grid,
                                           std::uint64_t trials, std::uint64_t seed,
                                           const SimulationOptions& opts = {}) {
    std::vector<OutageRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        const BoundParams bp = solve_design_schedule(geometry.n_a, geometry.n_e, eps, d);
        SystemConfig cfg = geometry;
        cfg.p_j = bp.p_j_required;
        cfg.m = bp.m_required;
        OutageRow row;
        row.epsilon = eps;
        row.p_j = cfg.p_j;
        row.m = cfg.m;
        row.estimate = estimate_outage(cfg, d, 1, trials, seed, opts);
        row.theta_bound = theta_cdf_lower_bound(eps, cfg, cfg.p_j);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Equivocation

inline constexpr std::uint64_t kEquivocationLimit = std::uint64_t{1} << 16;

/// Eve's view of one use: the candidate set, its posterior and entropy.
struct EquivocationReport {
    std::uint64_t l = 0;
    std::uint64_t l_enumeration = 0;  // count_finite on the same sphere
    double entropy_bits = 0.0;
    std::vector<CVector> candidates;
    std::vector<double> posterior;
    bool contains_truth = false;
};

/// Exhaustive Bayes over Q^{n_a}. Eve only learns that G u lies in the
/// counting sphere, so with a uniform prior each candidate gets weight 1 and
/// the posterior is weight / total.
inline EquivocationReport equivocation_bruteforce(const SystemConfig& cfg, RngStream& rng,
                                                  OtpMode mode = OtpMode::Ball) {
    cfg.validate();
    const Constellation cons(cfg.m);
    std::uint64_t total = 1;
    for (int i = 0; i < cfg.n_a; ++i) {
        total *= static_cast<std::uint64_t>(cfg.m);
        if (total > kEquivocationLimit) throw Error(ErrorCode::TooLarge, "m^n_a exceeds 2^16");
    }
    const auto real = sample_realization(cfg, rng);
    const CVector u = random_message(cons, cfg.n_a, rng);
    const OtpVector otp = sample_otp(cfg, rng, mode);
    const Cryptogram c = encrypt(real, cons, u, otp.v, cfg.p_j);
    const double radius = r_max(real, cfg.p_j);
    const double rb = boundary_radius(radius, c.y);

    EquivocationReport rep;
    const int side = cons.side();
    std::vector<std::uint64_t> weights;
    CVector cand(cfg.n_a);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rest = idx;
        for (int s = 0; s < cfg.n_a; ++s) {
            const auto re = static_cast<double>(rest % side);
            rest /= side;
            const auto im = static_cast<double>(rest % side);
            rest /= side;
            cand(s) = Complex(re, im);
        }
        if ((real.g * cand - c.y).norm() <= rb) {
            rep.candidates.push_back(cand);
            weights.push_back(1);
            if (cand == u) rep.contains_truth = true;
        }
    }
    std::uint64_t weight_sum = 0;
    for (auto w : weights) weight_sum += w;
    rep.l = rep.candidates.size();
    rep.posterior.reserve(weights.size());
    for (auto w : weights) rep.posterior.push_back(double(w) / double(weight_sum));
    for (double p : rep.posterior) rep.entropy_bits -= p * std::log2(p);
    rep.l_enumeration = count_finite(RealLattice(real.g), cons, c.y, radius);
    return rep;
}

struct BlockEquivocation {
    std::vector<EquivocationReport> uses;
    std::uint64_t joint_candidates = 0;
    double joint_entropy_bits = 0.0;
    double sum_log2_l = 0.0;
};

/// K independent uses and the joint posterior over the product candidate set.
inline BlockEquivocation equivocation_block(const SystemConfig& cfg, int k_uses, RngStream& rng,
                                            OtpMode mode = OtpMode::Ball) {
    if (k_uses < 1) throw Error(ErrorCode::DomainError, "need K >= 1");
    BlockEquivocation out;
    for (int i = 0; i < k_uses; ++i) out.uses.push_back(equivocation_bruteforce(cfg, rng, mode));

    std::uint64_t joint = 1;
    for (const auto& r : out.uses) {
        joint *= r.l;
        if (joint > kEquivocationLimit) throw Error(ErrorCode::TooLarge, "joint candidate set exceeds 2^16");
    }
    // Uniform prior on the product space: every tuple of per-use candidates
    // has weight prod_i 1 = 1, so walk the tuples and accumulate -p log p.
    std::vector<std::uint64_t> index(out.uses.size(), 0);
    std::uint64_t tuples = 0;
    for (;;) {
        ++tuples;
        std::size_t pos = 0;
        while (pos < index.size() && ++index[pos] == out.uses[pos].l) index[pos++] = 0;
        if (pos == index.size()) break;
    }
    out.joint_candidates = tuples;
    const double p = 1.0 / double(tuples);
    for (std::uint64_t t = 0; t < tuples; ++t) out.joint_entropy_bits -= p * std::log2(p);
    for (const auto& r : out.uses) out.sum_log2_l += std::log2(double(r.l));
    return out;
}

// ---------------------------------------------------------------------------
// Distribution validators

struct ChisqReport {
    std::uint64_t samples = 0;
    double critical = 0.0;
    /// 2 ||H_JE||_F^2 against chi2(2 n_e N_J).
    double ks_frobenius = 0.0;
    /// 2 |R_jj|^2 of G = QR against chi2(2 (n_e - j + 1)), j = 1..n_a.
    std::vector<double> ks_r_factor;
    /// j = 1 samples against a neighbouring, wrong dof; must reject.
    double ks_control = 0.0;
    int control_dof = 0;
    /// max over draws of | |det(G^H G)| / prod |R_jj|^2 - 1 |.
    double det_identity_error = 0.0;

    bool all_pass() const {
        if (ks_frobenius >= critical) return false;
        for (double ks : ks_r_factor) {
            if (ks >= critical) return false;
        }
        return true;
    }
    bool control_rejected() const { return ks_control >= critical; }
};

inline ChisqReport validate_chisq_representations(const SystemConfig& cfg, std::uint64_t samples, std::uint64_t seed,
                                                  unsigned threads = 0) {
    cfg.validate();
    if (samples < 10000) throw Error(ErrorCode::DomainError, "validate_chisq_representations needs >= 1e4 samples");
    if (cfg.n_e < cfg.n_a) throw Error(ErrorCode::DomainError, "QR representation needs n_e >= n_a");
    const auto n_a = static_cast<std::size_t>(cfg.n_a);
    std::vector<double> frob(samples);
    std::vector<std::vector<double>> rdiag(n_a, std::vector<double>(samples));
    std::vector<double> det_err(samples);

    struct Nothing {};
    parallel_trials(
        samples, threads, Nothing{},
        [&](Nothing&, std::uint64_t t) {
            RngStream rng(seed, t);
            const auto real = sample_realization(cfg, rng);
            frob[t] = 2.0 * real.hje_stacked.squaredNorm();
            Eigen::HouseholderQR<CMatrix> qr(real.g);
            const CMatrix& r = qr.matrixQR();
            double prod = 1.0;
            for (std::size_t j = 0; j < n_a; ++j) {
                const double rjj2 = std::norm(r(Eigen::Index(j), Eigen::Index(j)));
                rdiag[j][t] = 2.0 * rjj2;
                prod *= rjj2;
            }
            det_err[t] = std::abs(gram_det_modulus(real.g) / prod - 1.0);
        },
        [](Nothing&, const Nothing&) {});

    ChisqReport rep;
    rep.samples = samples;
    rep.critical = ks_critical_1pct(samples);
    const int frob_dof = 2 * cfg.n_e * cfg.total_jammer_antennas();
    rep.ks_frobenius = ks_statistic(frob, [frob_dof](double x) { return chi2_cdf_even(x, frob_dof); });
    for (std::size_t j = 0; j < n_a; ++j) {
        const int dof = 2 * (cfg.n_e - int(j));
        rep.ks_r_factor.push_back(ks_statistic(rdiag[j], [dof](double x) { return chi2_cdf_even(x, dof); }));
    }
    const int true_dof = 2 * cfg.n_e;
    rep.control_dof = true_dof > 2 ? true_dof - 2 : true_dof + 2;
    const int cdof = rep.control_dof;
    rep.ks_control = ks_statistic(rdiag[0], [cdof](double x) { return chi2_cdf_even(x, cdof); });
    for (double e : det_err) rep.det_identity_error = std::max(rep.det_identity_error, e);
    return rep;
}

}  // namespace usk
