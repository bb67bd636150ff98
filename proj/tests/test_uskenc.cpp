#include <usk/uskenc.hpp>

#include <gtest/gtest.h>

#include <cmath>

namespace {

using namespace usk;

TEST(Bits, StringRoundTrip) {
    EXPECT_EQ(bits_to_string(bits_from_string("101100")), "101100");
    EXPECT_THROW(bits_from_string("10a"), Error);
}

TEST(Constellation, Basics) {
    const Constellation c(16);
    EXPECT_EQ(c.side(), 4);
    EXPECT_EQ(c.bits_per_symbol(), 4);
    EXPECT_TRUE(c.contains(Complex(3, 0)));
    EXPECT_FALSE(c.contains(Complex(4, 0)));
    EXPECT_FALSE(c.contains(Complex(0.5, 0)));
    EXPECT_EQ(Constellation(9).bits_per_symbol(), 0);
    EXPECT_THROW(Constellation(8), Error);
}

TEST(Encode, SmallExamples) {
    const Constellation c(4);
    EXPECT_EQ(encode_bits(bits_from_string("00"), c, 1)(0), Complex(0, 0));
    EXPECT_EQ(encode_bits(bits_from_string("11"), c, 1)(0), Complex(1, 1));
    EXPECT_EQ(encode_bits(bits_from_string("10"), c, 1)(0), Complex(1, 0));
    EXPECT_EQ(encode_bits(bits_from_string("01"), c, 1)(0), Complex(0, 1));
    // m = 16: first two bits give Re, last two Im, most significant first
    EXPECT_EQ(encode_bits(bits_from_string("1001"), Constellation(16), 1)(0), Complex(2, 1));
}

TEST(Encode, ExhaustiveRoundTrip16) {
    const Constellation c(16);
    for (int word = 0; word < 256; ++word) {
        Bits bits(8);
        for (int b = 0; b < 8; ++b) bits[b] = static_cast<std::uint8_t>((word >> (7 - b)) & 1);
        const CVector u = encode_bits(bits, c, 2);
        ASSERT_TRUE(c.contains(u));
        ASSERT_EQ(decode_bits(u, c), bits);
    }
}

TEST(Encode, WrongLength) {
    EXPECT_THROW(encode_bits(bits_from_string("101"), Constellation(4), 1), Error);
}

TEST(Otp, BallPowerAndRadiusLaw) {
    SystemConfig cfg;
    cfg.p_j = 2.0;
    RngStream rng(1, 0);
    const int cdim = cfg.otp_dim();
    double max_power = 0.0, mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const OtpVector o = sample_otp(cfg, rng, OtpMode::Ball);
        ASSERT_EQ(o.v.size(), 2);
        max_power = std::max(max_power, o.power);
        // Pr{||v|| <= r} = (r / sqrt(p))^(2 cdim), so (||v||^2 / p)^cdim is U(0, 1).
        mean += std::pow(o.power / cfg.p_j, cdim);
    }
    EXPECT_LE(max_power, cfg.p_j);
    EXPECT_NEAR(mean / n, 0.5, 0.01);
}

TEST(Otp, SurfaceHasExactPower) {
    SystemConfig cfg;
    cfg.p_j = 3.0;
    RngStream rng(2, 0);
    for (int i = 0; i < 1000; ++i) {
        const OtpVector o = sample_otp(cfg, rng, OtpMode::Surface);
        EXPECT_LE(std::abs(o.v.squaredNorm() - cfg.p_j), 1e-12 * cfg.p_j);
    }
}

TEST(Otp, PerJammerSegmentsStayInTheirBalls) {
    SystemConfig cfg;
    cfg.jammers = {3, 4};
    cfg.p_j = 2.0;
    RngStream rng(3, 0);
    for (int i = 0; i < 1000; ++i) {
        const OtpVector o = sample_otp(cfg, rng, OtpMode::PerJammer);
        ASSERT_EQ(o.v.size(), 3);
        EXPECT_LE(o.v.segment(0, 1).squaredNorm(), cfg.p_j / 2 * (1 + 1e-12));
        EXPECT_LE(o.v.segment(1, 2).squaredNorm(), cfg.p_j / 2 * (1 + 1e-12));
        EXPECT_LE(o.power, cfg.p_j);
    }
}

TEST(Otp, ZeroPower) {
    SystemConfig cfg;
    cfg.p_j = 0.0;
    RngStream rng(4, 0);
    EXPECT_EQ(sample_otp(cfg, rng).v.norm(), 0.0);
}

TEST(RMax, OrthonormalEffective) {
    ChannelRealization real;
    real.effective = CMatrix::Identity(4, 2);
    EXPECT_NEAR(r_max(real, 4.0), 2.0, 1e-14);
    EXPECT_EQ(r_max(real, 0.0), 0.0);
}

TEST(RMax, MonteCarloMaximization) {
    SystemConfig cfg;
    RngStream rng(5, 0);
    const auto real = sample_realization(cfg, rng);
    const double p_j = 2.5;
    double best = 0.0;
    for (int i = 0; i < 100000; ++i) {
        best = std::max(best, (real.effective * sample_otp(cfg, rng, OtpMode::Surface).v).norm() *
                                  std::sqrt(p_j / cfg.p_j));
    }
    const double rm = r_max(real, p_j);
    EXPECT_LE(best, rm * (1 + 1e-12));
    EXPECT_NEAR(best / rm, 1.0, 5e-3);
}

TEST(Encrypt, DistanceWithinRMax) {
    SystemConfig cfg;
    cfg.p_j = 3.5926;
    const Constellation cons(cfg.m);
    for (std::uint64_t t = 0; t < 10000; ++t) {
        RngStream rng(6, t);
        const auto real = sample_realization(cfg, rng);
        const CVector u = random_message(cons, cfg.n_a, rng);
        const CVector v = sample_otp(cfg, rng, t % 2 ? OtpMode::Surface : OtpMode::PerJammer).v;
        const Cryptogram c = encrypt(real, cons, u, v, cfg.p_j);
        ASSERT_LE((c.y - real.g * u).norm(), r_max(real, cfg.p_j) * (1 + 1e-12));
    }
}

TEST(Encrypt, ZeroPadIsExact) {
    SystemConfig cfg;
    const Constellation cons(cfg.m);
    RngStream rng(7, 0);
    const auto real = sample_realization(cfg, rng);
    const CVector u = random_message(cons, cfg.n_a, rng);
    EXPECT_EQ((encrypt(real, cons, u, CVector::Zero(2), cfg.p_j).y - real.g * u).norm(), 0.0);
}

TEST(Encrypt, RejectsOffGridMessage) {
    SystemConfig cfg;
    const Constellation cons(cfg.m);
    RngStream rng(7, 1);
    const auto real = sample_realization(cfg, rng);
    CVector u = CVector::Zero(2);
    u(0) = Complex(0.5, 0);
    EXPECT_THROW(encrypt(real, cons, u, CVector::Zero(2), cfg.p_j), Error);
}

TEST(BitMatrix, IdentityAndProduct) {
    const BitMatrix id = BitMatrix::identity(70);
    RngStream rng(8, 0);
    const BitMatrix a = BitMatrix::random(70, 70, rng);
    EXPECT_EQ(a * id, a);
    EXPECT_EQ(id * a, a);
}

TEST(BitMatrix, InverseOfSingularIsEmpty) {
    BitMatrix a = BitMatrix::identity(4);
    a.set(3, 3, false);
    EXPECT_FALSE(a.inverse().has_value());
}

TEST(Scrambler, IdentityIsTransparent) {
    const Scrambler s(BitMatrix::identity(6));
    const Bits x = bits_from_string("101101");
    EXPECT_EQ(s.scramble(x), x);
}

TEST(Scrambler, RandomRoundTrip) {
    RngStream rng(9, 0);
    const Scrambler s = Scrambler::random(4, rng);
    const Bits x = bits_from_string("1010");
    EXPECT_EQ(s.descramble(s.scramble(x)), x);
    EXPECT_EQ(s.matrix() * s.inverse_matrix(), BitMatrix::identity(4));
}

TEST(Scrambler, RoundTripOverManySizes) {
    for (std::size_t n : {1u, 7u, 64u, 65u, 130u}) {
        RngStream rng(10, n);
        const Scrambler s = Scrambler::random(n, rng);
        for (int i = 0; i < 20; ++i) {
            Bits x(n);
            for (auto& b : x) b = rng.bit();
            ASSERT_EQ(s.descramble(s.scramble(x)), x);
        }
    }
}

TEST(Scrambler, SingularRejected) {
    try {
        Scrambler s(BitMatrix(3, 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularScrambler);
    }
}

}  // namespace
