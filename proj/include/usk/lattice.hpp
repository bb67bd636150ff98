#pragma once

// Counting lattice points of G * Z[i]^n (optionally restricted to the QAM box)
// inside a sphere. This is Eve's candidate-set size, i.e. the effective key
// space of one channel use.

#include <usk/error.hpp>
#include <usk/linalg.hpp>
#include <usk/uskenc.hpp>
#include <usk/wiretap.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace usk {

/// Relative slack of the closed-ball test.
inline constexpr double kBoundaryRelative = 1e-9;
/// Absolute slack, scaled by max(1, ||y||), that makes exact hits robust to round-off.
inline constexpr double kBoundaryAbsolute = 1e-12;

/// Radius actually used for the membership test ||G u - y|| <= R.
inline double boundary_radius(double radius, const CVector& y) {
    const double r = std::max(0.0, radius);
    return r * (1.0 + kBoundaryRelative) + kBoundaryAbsolute * std::max(1.0, y.norm());
}

/// Real embedding of a complex vector: [Re z; Im z].
inline RVector embed(const CVector& z) {
    RVector out(2 * z.size());
    out.head(z.size()) = z.real();
    out.tail(z.size()) = z.imag();
    return out;
}

/// Real embedding of a complex matrix, [[Re G, -Im G], [Im G, Re G]], so that
/// embed(G z) == embed_matrix(G) * embed(z).
inline RMatrix embed_matrix(const CMatrix& g) {
    const Eigen::Index r = g.rows(), c = g.cols();
    RMatrix out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = g.real();
    out.topRightCorner(r, c) = -g.imag();
    out.bottomLeftCorner(r, c) = g.imag();
    out.bottomRightCorner(r, c) = g.real();
    return out;
}

/// Real lattice generated by the embedded basis together with its thin QR factors.
class RealLattice {
public:
    explicit RealLattice(const CMatrix& g) : basis_(embed_matrix(g)) {
        if (basis_.rows() < basis_.cols()) throw Error(ErrorCode::Singular, "lattice basis has more columns than rows");
        const Eigen::Index n = basis_.cols();
        Eigen::HouseholderQR<RMatrix> qr(basis_);
        q_ = qr.householderQ() * RMatrix::Identity(basis_.rows(), n);
        r_ = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (r_(k, k) < 0.0) {
                r_.row(k) *= -1.0;
                q_.col(k) *= -1.0;
            }
        }
        const double scale = r_.diagonal().cwiseAbs().maxCoeff();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!(r_(k, k) > scale * kRankEpsilon * static_cast<double>(basis_.rows()))) {
                throw Error(ErrorCode::Singular, "lattice basis is not of full column rank");
            }
        }
    }

    /// Real dimension 2 * n_a.
    Eigen::Index dimension() const noexcept { return basis_.cols(); }
    /// Number of complex symbols n_a.
    Eigen::Index complex_dimension() const noexcept { return basis_.cols() / 2; }
    const RMatrix& basis() const noexcept { return basis_; }
    const RMatrix& q_factor() const noexcept { return q_; }
    const RMatrix& r_factor() const noexcept { return r_; }

private:
    RMatrix basis_;
    RMatrix q_;
    RMatrix r_;
};

namespace detail {

/// Depth-first sphere enumeration on R x ~ target with squared budget `budget`.
///
/// Levels run from the last coordinate down to the first. In every level the
/// admissible interval is intersected with [lo, hi] (infinite for Z[i]); the
/// innermost level is counted in closed form.
class SphereCounter {
public:
    SphereCounter(const RMatrix& r, const RVector& target, double lo, double hi)
        : r_(r), target_(target), lo_(lo), hi_(hi), x_(r.cols()) {}

    std::uint64_t count(double budget) {
        if (budget < 0.0) return 0;
        return visit(r_.cols() - 1, budget);
    }

private:
    std::uint64_t visit(Eigen::Index k, double budget) {
        double shifted = target_(k);
        for (Eigen::Index j = k + 1; j < r_.cols(); ++j) shifted -= r_(k, j) * x_(j);
        const double rkk = r_(k, k);
        const double centre = shifted / rkk;
        const double half_width = std::sqrt(std::max(0.0, budget)) / rkk;
        const double first = std::max(std::ceil(centre - half_width), lo_);
        const double last = std::min(std::floor(centre + half_width), hi_);
        if (first > last) return 0;
        if (k == 0) return static_cast<std::uint64_t>(last - first) + 1;

        // Schnorr-Euchner order: nearest integer first, then alternate sides.
        std::uint64_t total = 0;
        const double start = std::clamp(std::round(centre), first, last);
        auto descend = [&](double xk) {
            const double dev = rkk * (xk - centre);
            const double rest = budget - dev * dev;
            if (rest < 0.0) return false;
            x_(k) = xk;
            total += visit(k - 1, rest);
            return true;
        };
        descend(start);
        double up = start + 1.0, down = start - 1.0;
        bool up_open = up <= last, down_open = down >= first;
        while (up_open || down_open) {
            const bool take_up = up_open && (!down_open || std::abs(up - centre) <= std::abs(down - centre));
            if (take_up) {
                up_open = descend(up) && (up += 1.0) <= last;
            } else {
                down_open = descend(down) && (down -= 1.0) >= first;
            }
        }
        return total;
    }

    const RMatrix& r_;
    const RVector& target_;
    double lo_;
    double hi_;
    RVector x_;
};

inline std::uint64_t count_in_sphere(const RealLattice& lattice, const CVector& y, double radius, double lo,
                                     double hi) {
    const RVector ye = embed(y);
    if (ye.size() != lattice.basis().rows()) throw Error(ErrorCode::LengthMismatch, "centre has wrong length");
    const RVector projected = lattice.q_factor().transpose() * ye;
    const double off_plane = (ye - lattice.q_factor() * projected).squaredNorm();
    const double rb = boundary_radius(radius, y);
    SphereCounter counter(lattice.r_factor(), projected, lo, hi);
    return counter.count(rb * rb - off_plane);
}

}  // namespace detail

/// Number of u in Q^{n_a} with ||G u - y|| <= R (the finite key-space size L).
inline std::uint64_t count_finite(const RealLattice& lattice, const Constellation& cons, const CVector& y,
                                  double radius) {
    return detail::count_in_sphere(lattice, y, radius, 0.0, static_cast<double>(cons.side() - 1));
}

/// Number of u in Z[i]^{n_a} with ||G u - y|| <= R (the infinite-lattice count D).
inline std::uint64_t count_infinite(const RealLattice& lattice, const CVector& y, double radius) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return detail::count_in_sphere(lattice, y, radius, -inf, inf);
}

inline constexpr std::uint64_t kBruteForceLimit = std::uint64_t{1} << 20;

/// Exhaustive scan of Q^{n_a}; reference for count_finite.
inline std::uint64_t count_finite_bruteforce(const CMatrix& g, const Constellation& cons, const CVector& y,
                                             double radius) {
    const auto n_a = static_cast<int>(g.cols());
    std::uint64_t total = 1;
    for (int i = 0; i < n_a; ++i) {
        total *= static_cast<std::uint64_t>(cons.m());
        if (total > kBruteForceLimit) throw Error(ErrorCode::TooLarge, "m^n_a exceeds 2^20");
    }
    const double rb = boundary_radius(radius, y);
    const int side = cons.side();
    CVector u(n_a);
    std::uint64_t hits = 0;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rest = idx;
        for (int s = 0; s < n_a; ++s) {
            const auto re = static_cast<double>(rest % side);
            rest /= side;
            const auto im = static_cast<double>(rest % side);
            rest /= side;
            u(s) = Complex(re, im);
        }
        if ((g * u - y).norm() <= rb) ++hits;
    }
    return hits;
}

/// sqrt(n_a / (pi e)) * |det(G^H G)|^(1 / (2 n_a)).
inline double effective_radius(const CMatrix& g, int n_a) {
    const double vol = gram_det_modulus(g);
    return std::sqrt(n_a / (std::numbers::pi * std::numbers::e)) * std::pow(vol, 1.0 / (2.0 * n_a));
}

/// Image of the constellation centre, G * ((side - 1) / 2)(1 + i) * 1.
inline CVector constellation_centroid(const CMatrix& g, const Constellation& cons) {
    const double c = 0.5 * (cons.side() - 1);
    return g * CVector::Constant(g.cols(), Complex(c, c));
}

/// 2 R_max / (sqrt(m) r_eff).
inline double theta(const ChannelRealization& real, double p_j, int m) {
    const double rm = r_max(real, p_j);
    const auto n_a = static_cast<int>(real.g.cols());
    return 2.0 * rm / (std::sqrt(static_cast<double>(m)) * effective_radius(real.g, n_a));
}

struct KeySpaceCount {
    std::uint64_t l = 0;
    std::optional<std::uint64_t> d;
    double r_max = 0.0;
    double r_eff = 0.0;
    double theta = 0.0;
};

/// All per-use key-space quantities for one cryptogram.
inline KeySpaceCount key_space_count(const ChannelRealization& real, const Constellation& cons, const Cryptogram& c,
                                     double p_j, bool with_infinite = false) {
    KeySpaceCount out;
    const RealLattice lattice(real.g);
    out.r_max = r_max(real, p_j);
    out.r_eff = effective_radius(real.g, static_cast<int>(real.g.cols()));
    out.theta = 2.0 * out.r_max / (std::sqrt(static_cast<double>(cons.m())) * out.r_eff);
    out.l = count_finite(lattice, cons, c.y, out.r_max);
    if (with_infinite) out.d = count_infinite(lattice, c.y, out.r_max);
    return out;
}

}  // namespace usk
