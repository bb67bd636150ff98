#pragma once

// MIMO wiretap model with cooperative jammers: configuration, channel draws,
// null-space precoding and the received signals at Bob and Eve.

#include <usk/error.hpp>
#include <usk/linalg.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace usk {

struct SystemConfig {
    int n_a = 2;
    int n_b = 2;
    int n_e = 4;
    std::vector<int> jammers{3, 3};
    int m = 256;
    double p_j = 1.0;

    int num_jammers() const noexcept { return static_cast<int>(jammers.size()); }
    int total_jammer_antennas() const noexcept { return std::accumulate(jammers.begin(), jammers.end(), 0); }
    /// Complex dimension of the stacked one-time pad, N_J - N * n_b.
    int otp_dim() const noexcept { return total_jammer_antennas() - num_jammers() * n_b; }
    /// sqrt(m), the number of amplitude levels per real dimension.
    int side() const noexcept { return static_cast<int>(std::lround(std::sqrt(static_cast<double>(m)))); }
    /// Eve has fewer antennas than the jammers combined, so she cannot null the pad.
    bool usk_valid() const noexcept { return n_e < total_jammer_antennas(); }

    /// Throws ConfigError on the first violated invariant.
    void validate() const {
        auto fail = [](const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); };
        if (n_a < 1 || n_b < 1 || n_e < 1) fail("antenna counts must be >= 1");
        if (n_b < n_a) fail("n_b must be >= n_a");
        if (jammers.empty()) fail("at least one jammer is required");
        for (int nj : jammers) {
            if (nj <= n_b) fail("every jammer needs more antennas than Bob");
        }
        const int s = side();
        if (m < 4 || s * s != m) fail("m must be a perfect square >= 4");
        if (!std::isfinite(p_j) || p_j < 0.0) fail("p_j must be finite and non-negative");
    }

    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

inline void to_json(nlohmann::json& j, const SystemConfig& c) {
    j = nlohmann::json{{"n_a", c.n_a}, {"n_b", c.n_b}, {"n_e", c.n_e},
                       {"jammers", c.jammers}, {"m", c.m}, {"p_j", c.p_j}};
}

inline void from_json(const nlohmann::json& j, SystemConfig& c) {
    if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
    static const char* const kKeys[] = {"n_a", "n_b", "n_e", "jammers", "m", "p_j"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
            throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
        }
    }
    try {
        SystemConfig out;
        if (j.contains("n_a")) out.n_a = j.at("n_a").get<int>();
        if (j.contains("n_b")) out.n_b = j.at("n_b").get<int>();
        if (j.contains("n_e")) out.n_e = j.at("n_e").get<int>();
        if (j.contains("jammers")) out.jammers = j.at("jammers").get<std::vector<int>>();
        if (j.contains("m")) out.m = j.at("m").get<int>();
        if (j.contains("p_j")) out.p_j = j.at("p_j").get<double>();
        c = std::move(out);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
}

inline SystemConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, e.what());
    }
    auto cfg = j.get<SystemConfig>();
    cfg.validate();
    return cfg;
}

/// One fast-fading draw of every channel plus the derived precoders.
struct ChannelRealization {
    CMatrix h;                  // Alice -> Bob, n_b x n_a
    CMatrix g;                  // Alice -> Eve, n_e x n_a
    std::vector<CMatrix> h_jb;  // jammer i -> Bob, n_b x N_J,i
    std::vector<CMatrix> h_je;  // jammer i -> Eve, n_e x N_J,i
    std::vector<CMatrix> z;     // null-space precoders, N_J,i x (N_J,i - n_b)
    CMatrix hje_stacked;        // [H_JE,1 ... H_JE,N]
    CMatrix hjb_stacked;        // [H_JB,1 ... H_JB,N]
    CMatrix z_stacked;          // blockdiag(Z_1 ... Z_N)
    CMatrix effective;          // hje_stacked * z_stacked
    std::uint64_t id = 0;
};

inline constexpr int kMaxChannelAttempts = 8;

namespace detail {

inline CMatrix hstack(const std::vector<CMatrix>& blocks) {
    Eigen::Index cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    CMatrix out(blocks.front().rows(), cols);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
        out.middleCols(at, b.cols()) = b;
        at += b.cols();
    }
    return out;
}

inline CMatrix block_diagonal(const std::vector<CMatrix>& blocks) {
    Eigen::Index rows = 0, cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    CMatrix out = CMatrix::Zero(rows, cols);
    Eigen::Index r = 0, c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

}  // namespace detail

/// Draw H, G and every jammer channel i.i.d. N_C(0, 1) and build the precoders.
///
/// A rank-deficient jammer-to-Bob draw (probability zero) discards the whole
/// realization and redraws, up to kMaxChannelAttempts times.
inline ChannelRealization sample_realization(const SystemConfig& cfg, RngStream& rng) {
    cfg.validate();
    for (int attempt = 0;; ++attempt) {
        ChannelRealization real;
        real.id = rng.stream_id();
        real.h = sample_complex_gaussian(rng, cfg.n_b, cfg.n_a);
        real.g = sample_complex_gaussian(rng, cfg.n_e, cfg.n_a);
        try {
            for (int nj : cfg.jammers) {
                real.h_jb.push_back(sample_complex_gaussian(rng, cfg.n_b, nj));
                real.h_je.push_back(sample_complex_gaussian(rng, cfg.n_e, nj));
                real.z.push_back(null_space(real.h_jb.back()));
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::RankDeficient || attempt + 1 >= kMaxChannelAttempts) throw;
            continue;
        }
        real.hje_stacked = detail::hstack(real.h_je);
        real.hjb_stacked = detail::hstack(real.h_jb);
        real.z_stacked = detail::block_diagonal(real.z);
        real.effective = real.hje_stacked * real.z_stacked;
        return real;
    }
}

/// What Eve observes for one channel use, together with the ground truth.
struct Cryptogram {
    CVector y;
    CVector truth_u;
    CVector truth_v;
    std::uint64_t realization_id = 0;
};

inline void check_power(const CVector& v, double p_j) {
    // Slack only absorbs rounding for pads drawn exactly on the sphere.
    if (v.squaredNorm() > p_j * (1.0 + 1e-12)) {
        throw Error(ErrorCode::PowerExceeded, "||v||^2 exceeds the jamming power");
    }
}

/// Noiseless Eve: y = G u + H_JE Z v.
inline Cryptogram eve_receive(const ChannelRealization& real, const CVector& u, const CVector& v, double p_j) {
    check_power(v, p_j);
    if (u.size() != real.g.cols() || v.size() != real.effective.cols()) {
        throw Error(ErrorCode::LengthMismatch, "u or v has the wrong length for this realization");
    }
    Cryptogram c;
    c.y = real.g * u + real.effective * v;
    c.truth_u = u;
    c.truth_v = v;
    c.realization_id = real.id;
    return c;
}

/// Bob's observation H u + sum_i H_JB,i Z_i v_i + n_B.
///
/// The jamming term is formed explicitly so tests can see it cancel. Noise is
/// drawn from `rng` only when noise_sigma > 0.
inline CVector bob_receive(const ChannelRealization& real, const CVector& u, const CVector& v,
                           double noise_sigma, RngStream* rng = nullptr) {
    if (u.size() != real.h.cols() || v.size() != real.z_stacked.cols()) {
        throw Error(ErrorCode::LengthMismatch, "u or v has the wrong length for this realization");
    }
    CVector out = real.h * u;
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < real.z.size(); ++i) {
        const Eigen::Index len = real.z[i].cols();
        const CVector x_j = real.z[i] * v.segment(at, len);
        out += real.h_jb[i] * x_j;
        at += len;
    }
    if (noise_sigma > 0.0) {
        if (rng == nullptr) throw Error(ErrorCode::DomainError, "noise requested without an RNG");
        out += noise_sigma * sample_complex_gaussian(*rng, out.size(), 1);
    }
    return out;
}

/// Eve's zero-forcing filter W = H_JB (H_JE)^+.
///
/// Exists only when n_e >= N_J; otherwise throws NotInvertible, which is the
/// secure outcome.
inline CMatrix zf_filter(const ChannelRealization& real) {
    if (real.hje_stacked.rows() < real.hje_stacked.cols()) {
        throw Error(ErrorCode::NotInvertible, "n_e < N_J: jammer-to-Eve channel has no left inverse");
    }
    try {
        return real.hjb_stacked * pseudo_inverse_left(real.hje_stacked);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::RankDeficient) throw Error(ErrorCode::NotInvertible, e.what());
        throw;
    }
}

inline CVector zf_attack(const ChannelRealization& real, const Cryptogram& c) {
    return zf_filter(real) * c.y;
}

}  // namespace usk
