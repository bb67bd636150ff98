#pragma once

// Complex linear algebra and random sampling used by the channel model.
// Dense kernels are delegated to Eigen; this header pins the tolerances and
// the error contract the rest of the library relies on.

#include <usk/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace usk {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Relative rank threshold: sigma_max * max(rows, cols) * 2^-50.
inline constexpr double kRankEpsilon = 0x1p-50;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kSingularDeterminant = 1e-300;

/// Deterministic random stream keyed by (seed, stream id).
///
/// Every Monte-Carlo trial owns one stream whose id is the trial index, so any
/// partition of trials over workers draws the same numbers.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32), 0x55534bu};
        engine_.seed(seq);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Standard normal N(0, 1).
    double normal() { return normal_(engine_); }
    /// Uniform on [0, 1).
    double uniform() { return uniform_(engine_); }
    /// Uniform integer on [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    /// Single fair bit.
    bool bit() { return (engine_() >> 63) != 0; }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

inline bool all_finite(const CMatrix& a) {
    return a.allFinite();
}

/// i.i.d. N_C(0, 1) entries: real and imaginary parts each N(0, 1/2).
inline CMatrix sample_complex_gaussian(RngStream& rng, Eigen::Index rows, Eigen::Index cols) {
    if (rows < 1 || cols < 1) {
        throw Error(ErrorCode::DomainError, "sample_complex_gaussian needs rows, cols >= 1");
    }
    static const double scale = std::sqrt(0.5);
    CMatrix out(rows, cols);
    // Row-major fill order so the draw sequence matches the documented layout.
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double re = rng.normal() * scale;
            const double im = rng.normal() * scale;
            out(r, c) = Complex(re, im);
        }
    }
    return out;
}

inline Eigen::Index numerical_rank(const RVector& singular_values, Eigen::Index rows, Eigen::Index cols) {
    if (singular_values.size() == 0) return 0;
    const double tol = singular_values(0) * static_cast<double>(std::max(rows, cols)) * kRankEpsilon;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
        if (singular_values(i) > tol) ++rank;
    }
    return rank;
}

/// Orthonormal basis of ker(A) for a wide matrix A (rows < cols).
///
/// Throws RankDeficient when A is not of full row rank, so the caller can
/// resample the channel.
inline CMatrix null_space(const CMatrix& a) {
    if (a.rows() >= a.cols()) {
        throw Error(ErrorCode::DomainError, "null_space expects rows < cols");
    }
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const Eigen::Index rank = numerical_rank(svd.singularValues(), a.rows(), a.cols());
    if (rank < a.rows()) {
        throw Error(ErrorCode::RankDeficient,
                    "numerical rank " + std::to_string(rank) + " < " + std::to_string(a.rows()));
    }
    return svd.matrixV().rightCols(a.cols() - rank);
}

inline bool is_hermitian(const CMatrix& a, double tol = kHermitianTolerance) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.norm());
    return (a - a.adjoint()).norm() <= tol * scale;
}

/// Largest eigenvalue of a Hermitian positive semidefinite matrix.
inline double largest_eigenvalue_hermitian(const CMatrix& a) {
    if (!is_hermitian(a)) {
        throw Error(ErrorCode::NotHermitian, "matrix is not Hermitian within tolerance");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(a, Eigen::EigenvaluesOnly);
    // PSD by construction; clamp round-off below zero.
    return std::max(0.0, eig.eigenvalues().maxCoeff());
}

/// |det(B^H B)|, the volume of the lattice generated by B's columns.
inline double gram_det_modulus(const CMatrix& b) {
    const CMatrix gram = b.adjoint() * b;
    const double det = std::abs(gram.determinant());
    if (!(det >= kSingularDeterminant)) {
        throw Error(ErrorCode::Singular, "Gram determinant below 1e-300");
    }
    return det;
}

/// Left inverse (A^H A)^-1 A^H of a tall, full-column-rank matrix.
inline CMatrix pseudo_inverse_left(const CMatrix& a) {
    if (a.rows() < a.cols()) {
        throw Error(ErrorCode::RankDeficient, "wide matrix has no left inverse");
    }
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    if (numerical_rank(s, a.rows(), a.cols()) < a.cols()) {
        throw Error(ErrorCode::RankDeficient, "matrix is not of full column rank");
    }
    const RVector inv = s.cwiseInverse();
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

}  // namespace usk
