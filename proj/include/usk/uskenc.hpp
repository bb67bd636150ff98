#pragma once

// Unshared-secret-key encryption with a finite square-QAM alphabet: bit
// labelling, one-time-pad sampling, the counting-sphere radius and the
// GF(2) block scrambler.

#include <usk/error.hpp>
#include <usk/linalg.hpp>
#include <usk/wiretap.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace usk {

using Bits = std::vector<std::uint8_t>;

inline Bits bits_from_string(std::string_view s) {
    Bits out;
    out.reserve(s.size());
    for (char ch : s) {
        if (ch != '0' && ch != '1') throw Error(ErrorCode::DomainError, "bit strings use only '0' and '1'");
        out.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    return out;
}

inline std::string bits_to_string(const Bits& bits) {
    std::string out;
    out.reserve(bits.size());
    for (auto b : bits) out.push_back(b ? '1' : '0');
    return out;
}

/// Square QAM on the unshifted grid {0..side-1} + i{0..side-1}.
class Constellation {
public:
    explicit Constellation(int m) : m_(m), side_(static_cast<int>(std::lround(std::sqrt(double(m))))) {
        if (m < 4 || side_ * side_ != m) throw Error(ErrorCode::DomainError, "m must be a perfect square >= 4");
    }

    int m() const noexcept { return m_; }
    int side() const noexcept { return side_; }
    /// log2(m) when m is a power of four, else 0 (no binary labelling exists).
    int bits_per_symbol() const noexcept {
        const auto um = static_cast<unsigned>(m_);
        if (!std::has_single_bit(um)) return 0;
        const int b = std::countr_zero(um);
        return b % 2 == 0 ? b : 0;
    }

    bool contains(Complex s) const noexcept {
        auto on_grid = [this](double x) {
            return x == std::round(x) && x >= 0.0 && x <= static_cast<double>(side_ - 1);
        };
        return on_grid(s.real()) && on_grid(s.imag());
    }

    bool contains(const CVector& u) const noexcept {
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            if (!contains(u(i))) return false;
        }
        return true;
    }

private:
    int m_;
    int side_;
};

/// Plain binary labelling: per symbol, the first half of its bits (MSB first)
/// gives the real level and the second half the imaginary level.
inline CVector encode_bits(const Bits& bits, const Constellation& cons, int n_a) {
    const int bps = cons.bits_per_symbol();
    if (bps == 0) throw Error(ErrorCode::DomainError, "bit labelling needs m to be a power of four");
    if (bits.size() != static_cast<std::size_t>(n_a * bps)) {
        throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(n_a * bps) + " bits");
    }
    const int half = bps / 2;
    CVector u(n_a);
    std::size_t at = 0;
    for (int s = 0; s < n_a; ++s) {
        int re = 0, im = 0;
        for (int b = 0; b < half; ++b) re = (re << 1) | bits[at++];
        for (int b = 0; b < half; ++b) im = (im << 1) | bits[at++];
        u(s) = Complex(re, im);
    }
    return u;
}

inline Bits decode_bits(const CVector& u, const Constellation& cons) {
    const int bps = cons.bits_per_symbol();
    if (bps == 0) throw Error(ErrorCode::DomainError, "bit labelling needs m to be a power of four");
    if (!cons.contains(u)) throw Error(ErrorCode::DomainError, "vector is not in the constellation");
    const int half = bps / 2;
    Bits out;
    out.reserve(static_cast<std::size_t>(u.size() * bps));
    for (Eigen::Index s = 0; s < u.size(); ++s) {
        const auto re = static_cast<int>(u(s).real());
        const auto im = static_cast<int>(u(s).imag());
        for (int b = half - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((re >> b) & 1));
        for (int b = half - 1; b >= 0; --b) out.push_back(static_cast<std::uint8_t>((im >> b) & 1));
    }
    return out;
}

/// Uniform draw from Q^{n_a}.
inline CVector random_message(const Constellation& cons, int n_a, RngStream& rng) {
    CVector u(n_a);
    for (int s = 0; s < n_a; ++s) {
        const auto re = rng.uniform_int(0, cons.side() - 1);
        const auto im = rng.uniform_int(0, cons.side() - 1);
        u(s) = Complex(static_cast<double>(re), static_cast<double>(im));
    }
    return u;
}

enum class OtpMode {
    Ball,     // uniform on the solid ball ||v||^2 <= p_j
    Surface,  // uniform on the sphere ||v||^2 = p_j
    PerJammer,  // each jammer independently uniform on its own ball ||v_i||^2 <= p_j / N
};

struct OtpVector {
    CVector v;
    double power = 0.0;
};

namespace detail {

/// Uniform point on the sphere (or, with radial draw, the solid ball) of the given
/// radius in C^cdim, written into out[at, at + cdim).
inline void fill_ball(CVector& out, Eigen::Index at, int cdim, double radius, bool solid, RngStream& rng) {
    const int rdim = 2 * cdim;
    RVector dir(rdim);
    double norm = 0.0;
    do {
        for (int i = 0; i < rdim; ++i) dir(i) = rng.normal();
        norm = dir.norm();
    } while (norm == 0.0);
    dir /= norm;
    if (solid) radius *= std::pow(rng.uniform(), 1.0 / rdim);
    for (int i = 0; i < cdim; ++i) out(at + i) = radius * Complex(dir(i), dir(cdim + i));
}

}  // namespace detail

/// Jammers' stacked pad of complex length N_J - N * n_b.
inline OtpVector sample_otp(const SystemConfig& cfg, RngStream& rng, OtpMode mode = OtpMode::Ball) {
    OtpVector out;
    out.v.resize(cfg.otp_dim());
    if (mode == OtpMode::PerJammer) {
        const double share = std::sqrt(cfg.p_j / cfg.num_jammers());
        Eigen::Index at = 0;
        for (int nj : cfg.jammers) {
            detail::fill_ball(out.v, at, nj - cfg.n_b, share, true, rng);
            at += nj - cfg.n_b;
        }
    } else {
        detail::fill_ball(out.v, 0, cfg.otp_dim(), std::sqrt(cfg.p_j), mode == OtpMode::Ball, rng);
    }
    out.power = out.v.squaredNorm();
    return out;
}

/// Largest displacement the pad can cause at Eve: sqrt(lambda_max p_j).
inline double r_max(const ChannelRealization& real, double p_j) {
    const CMatrix gram = real.effective.adjoint() * real.effective;
    return std::sqrt(largest_eigenvalue_hermitian(gram) * p_j);
}

inline Cryptogram encrypt(const ChannelRealization& real, const Constellation& cons, const CVector& u,
                          const CVector& v, double p_j) {
    if (!cons.contains(u)) throw Error(ErrorCode::DomainError, "message is not in the constellation");
    return eve_receive(real, u, v, p_j);
}

// ---------------------------------------------------------------------------
// GF(2) scrambler

/// Dense bit matrix with 64-bit packed rows.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * words_, 0) {}

    static BitMatrix identity(std::size_t n) {
        BitMatrix out(n, n);
        for (std::size_t i = 0; i < n; ++i) out.set(i, i, true);
        return out;
    }

    static BitMatrix random(std::size_t rows, std::size_t cols, RngStream& rng) {
        BitMatrix out(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) out.set(r, c, rng.bit());
        }
        return out;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    bool get(std::size_t r, std::size_t c) const noexcept {
        return (data_[r * words_ + c / 64] >> (c % 64)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool value) noexcept {
        auto& w = data_[r * words_ + c / 64];
        const std::uint64_t mask = std::uint64_t{1} << (c % 64);
        w = value ? (w | mask) : (w & ~mask);
    }

    /// Row vector times matrix over GF(2): XOR of the rows selected by x.
    Bits left_multiply(const Bits& x) const {
        if (x.size() != rows_) throw Error(ErrorCode::LengthMismatch, "bit vector length != matrix rows");
        std::vector<std::uint64_t> acc(words_, 0);
        for (std::size_t r = 0; r < rows_; ++r) {
            if (!x[r]) continue;
            for (std::size_t w = 0; w < words_; ++w) acc[w] ^= data_[r * words_ + w];
        }
        Bits out(cols_);
        for (std::size_t c = 0; c < cols_; ++c) out[c] = static_cast<std::uint8_t>((acc[c / 64] >> (c % 64)) & 1u);
        return out;
    }

    BitMatrix operator*(const BitMatrix& rhs) const {
        if (cols_ != rhs.rows_) throw Error(ErrorCode::LengthMismatch, "bit matrix shapes do not chain");
        BitMatrix out(rows_, rhs.cols_);
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t k = 0; k < cols_; ++k) {
                if (!get(r, k)) continue;
                for (std::size_t w = 0; w < rhs.words_; ++w) out.data_[r * out.words_ + w] ^= rhs.data_[k * rhs.words_ + w];
            }
        }
        return out;
    }

    /// Gauss-Jordan inverse; empty optional when singular.
    std::optional<BitMatrix> inverse() const {
        if (rows_ != cols_) return std::nullopt;
        const std::size_t n = rows_;
        BitMatrix a = *this;
        BitMatrix inv = identity(n);
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t pivot = col;
            while (pivot < n && !a.get(pivot, col)) ++pivot;
            if (pivot == n) return std::nullopt;
            a.swap_rows(pivot, col);
            inv.swap_rows(pivot, col);
            for (std::size_t r = 0; r < n; ++r) {
                if (r != col && a.get(r, col)) {
                    a.xor_row_into(col, r);
                    inv.xor_row_into(col, r);
                }
            }
        }
        return inv;
    }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t w = 0; w < words_; ++w) std::swap(data_[a * words_ + w], data_[b * words_ + w]);
    }
    void xor_row_into(std::size_t src, std::size_t dst) {
        for (std::size_t w = 0; w < words_; ++w) data_[dst * words_ + w] ^= data_[src * words_ + w];
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> data_;
};

inline constexpr int kMaxScramblerAttempts = 64;

/// Invertible nK x nK bit matrix applied to a block of K messages.
class Scrambler {
public:
    explicit Scrambler(BitMatrix s) : s_(std::move(s)) {
        auto inv = s_.inverse();
        if (!inv) throw Error(ErrorCode::SingularScrambler, "scrambler matrix is singular over GF(2)");
        s_inv_ = std::move(*inv);
    }

    /// Rejection-samples a uniformly random invertible matrix.
    static Scrambler random(std::size_t n, RngStream& rng) {
        for (int attempt = 0; attempt < kMaxScramblerAttempts; ++attempt) {
            auto candidate = BitMatrix::random(n, n, rng);
            if (auto inv = candidate.inverse()) return Scrambler(std::move(candidate), std::move(*inv));
        }
        throw Error(ErrorCode::SingularScrambler, "no invertible matrix found in 64 draws");
    }

    std::size_t size() const noexcept { return s_.rows(); }
    const BitMatrix& matrix() const noexcept { return s_; }
    const BitMatrix& inverse_matrix() const noexcept { return s_inv_; }

    Bits scramble(const Bits& x) const { return s_.left_multiply(x); }
    Bits descramble(const Bits& x) const { return s_inv_.left_multiply(x); }

private:
    Scrambler(BitMatrix s, BitMatrix s_inv) : s_(std::move(s)), s_inv_(std::move(s_inv)) {}

    BitMatrix s_;
    BitMatrix s_inv_;
};

}  // namespace usk
