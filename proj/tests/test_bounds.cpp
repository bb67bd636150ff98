#include <usk/bounds.hpp>
#include <usk/stats.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace {

using namespace usk;

SystemConfig reference_config() {
    SystemConfig cfg;
    cfg.p_j = 3.5926;
    return cfg;
}

TEST(IncompleteBeta, Examples) {
    for (double x : {0.0, 0.25, 1.0}) EXPECT_NEAR(reg_incomplete_beta(1, 1, x), x, 1e-15);
    EXPECT_NEAR(reg_incomplete_beta(2, 1, 0.5), 0.25, 1e-15);
    for (int a = 1; a <= 24; ++a) {
        for (int b = 1; b <= 4; ++b) {
            EXPECT_EQ(reg_incomplete_beta(a, b, 0.0), 0.0);
            EXPECT_EQ(reg_incomplete_beta(a, b, 1.0), 1.0);
        }
    }
}

TEST(IncompleteBeta, DomainErrors) {
    EXPECT_THROW(reg_incomplete_beta(0, 1, 0.5), Error);
    EXPECT_THROW(reg_incomplete_beta(1, 1, 1.5), Error);
    EXPECT_THROW(reg_incomplete_beta(1, 1, std::nan("")), Error);
}

TEST(IncompleteBeta, LargeParametersStayFinite) {
    EXPECT_NEAR(reg_incomplete_beta(10000, 10000, 0.5), 0.5, 1e-6);
    const double v = reg_incomplete_beta(24, 5000, 0.01);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
}

TEST(FCdf, Examples) {
    for (int k : {2, 4, 8}) EXPECT_NEAR(f_cdf(1.0, k, k), 0.5, 1e-14);
    EXPECT_EQ(f_cdf(0.0, 4, 6), 0.0);
    EXPECT_THROW(f_cdf(1.0, 3, 4), Error);
}

TEST(FCdf, MonteCarloOracle) {
    RngStream rng(1, 0);
    auto chi2 = [&rng](int dof) {
        double s = 0.0;
        for (int i = 0; i < dof; ++i) {
            const double z = rng.normal();
            s += z * z;
        }
        return s;
    };
    const int n = 1000000;
    int below = 0;
    for (int i = 0; i < n; ++i) {
        if ((chi2(4) / 4.0) / (chi2(6) / 6.0) <= 2.5) ++below;
    }
    EXPECT_NEAR(double(below) / n, f_cdf(2.5, 4, 6), 0.003);
}

TEST(ThetaBound, GValue) {
    EXPECT_NEAR(theta_bound_g(0.1961, reference_config(), 3.5926, 1), 0.01337, 5e-5);
}

TEST(ThetaBound, Limits) {
    const SystemConfig cfg = reference_config();
    EXPECT_EQ(theta_cdf_lower_bound(0.0, cfg, cfg.p_j), 0.0);
    EXPECT_LT(theta_cdf_lower_bound(1e-3, cfg, cfg.p_j), 1e-100);
    EXPECT_NEAR(theta_cdf_lower_bound(1e4, cfg, cfg.p_j), 1.0, 1e-9);
    EXPECT_THROW(theta_cdf_lower_bound(-1.0, cfg, cfg.p_j), Error);
}

TEST(ThetaBound, ZeroPowerGivesOne) {
    const SystemConfig cfg = reference_config();
    EXPECT_EQ(theta_cdf_lower_bound(0.5, cfg, 0.0), 1.0);
}

TEST(DesignSchedule, SchedulePieces) {
    const BoundParams p = solve_design_schedule(2, 4, 0.3, 2);
    EXPECT_EQ(p.n_min, 2);
    EXPECT_NEAR(p.kappa, std::pow(2.0, 1.0 / 8) / std::sqrt(std::numbers::pi), 1e-14);
    EXPECT_NEAR(p.kappa, 0.61524, 2e-5);
    EXPECT_NEAR(p.phi, std::pow(2.0 / 24.0, 0.25), 1e-14);
    EXPECT_NEAR(p.phi, 0.53728, 1e-5);
}

TEST(DesignSchedule, ReferencePoint) {
    const BoundParams p = solve_design_schedule(2, 4, 0.19609, 2);
    EXPECT_NEAR(p.p_j_required / 3.5926, 1.0, 1e-3);
    EXPECT_NEAR(p.m_raw, 256.0, 0.1);
    EXPECT_EQ(p.m_required, 256);
}

TEST(DesignSchedule, HalvingEpsilonDoublesPower) {
    const double a = solve_design_schedule(2, 4, 0.3, 2).p_j_required;
    const double b = solve_design_schedule(2, 4, 0.15, 2).p_j_required;
    EXPECT_NEAR(b / a, 2.0, 1e-12);
}

TEST(DesignSchedule, Rounding) {
    const BoundParams p4 = solve_design_schedule(2, 4, 0.3, 2);
    const BoundParams sq = solve_design_schedule(2, 4, 0.3, 2, MRounding::PerfectSquare);
    EXPECT_EQ(p4.m_required, 64);
    const int s = static_cast<int>(std::lround(std::sqrt(sq.m_required)));
    EXPECT_EQ(s * s, sq.m_required);
    EXPECT_GE(sq.m_required, sq.m_raw * (1 - kMRoundingSlack));
    EXPECT_LT((s - 1) * (s - 1), sq.m_raw * (1 - kMRoundingSlack));
    EXPECT_LE(sq.m_required, p4.m_required);
}

TEST(DesignSchedule, DomainErrors) {
    EXPECT_THROW(solve_design_schedule(3, 2, 0.3, 2), Error);
    EXPECT_THROW(solve_design_schedule(2, 4, 1.0, 2), Error);
    EXPECT_THROW(solve_design_schedule(2, 4, 0.3, 1), Error);
}

TEST(ThetaCdf, NondecreasingTowardsOne) {
    const SystemConfig cfg = reference_config();
    const std::vector<double> grid{0.25, 0.5, 1.0, 2.0, 8.0};
    const auto cdf = theta_cdf_empirical(cfg, cfg.p_j, cfg.m, 5000, 3, grid, 1);
    for (std::size_t i = 1; i < cdf.size(); ++i) EXPECT_LE(cdf[i - 1], cdf[i]);
    EXPECT_EQ(cdf.back(), 1.0);
}

TEST(ThetaCdf, ZeroPower) {
    const SystemConfig cfg = reference_config();
    const std::vector<double> grid{1e-6, 0.5};
    for (double v : theta_cdf_empirical(cfg, 0.0, cfg.m, 1000, 4, grid, 1)) EXPECT_EQ(v, 1.0);
}

TEST(ThetaCdf, ThreadCountInvariant) {
    const SystemConfig cfg = reference_config();
    const std::vector<double> grid{0.5, 1.0};
    EXPECT_EQ(theta_cdf_empirical(cfg, cfg.p_j, cfg.m, 2000, 5, grid, 1),
              theta_cdf_empirical(cfg, cfg.p_j, cfg.m, 2000, 5, grid, 3));
}

}  // namespace
