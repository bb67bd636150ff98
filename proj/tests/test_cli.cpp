#include <usk/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;
using usk::cli::run;

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("usk_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                           "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
        config = (dir / "ref.json").string();
        std::ofstream(config) << R"({"n_a":2,"n_b":2,"n_e":4,"jammers":[3,3],"m":16,"p_j":2.0})";
        insecure = (dir / "ne6.json").string();
        std::ofstream(insecure) << R"({"n_a":2,"n_b":2,"n_e":6,"jammers":[3,3],"m":16,"p_j":2.0})";
    }
    void TearDown() override { fs::remove_all(dir); }

    int call(std::vector<std::string> args) {
        out.str("");
        err.str("");
        return run(std::move(args), out, err);
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }

    fs::path dir;
    std::string config, insecure;
    std::ostringstream out, err;
};

TEST_F(Cli, OutageCsv) {
    const auto csv = (dir / "o.csv").string();
    ASSERT_EQ(call({"outage", config, "--trials", "500", "--seed", "3", "--out", csv}), 0) << err.str();
    const std::string text = slurp(csv);
    EXPECT_EQ(text.rfind("d,k,trials,outages,p_hat,ci_low,ci_high,seed\n2,1,500,", 0), 0u) << text;
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_TRUE(fs::exists(csv + ".manifest.json"));
}

TEST_F(Cli, SameSeedIsByteIdentical) {
    const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    ASSERT_EQ(call({"outage", config, "--trials", "300", "--seed", "5", "--out", a, "--threads", "1"}), 0);
    ASSERT_EQ(call({"outage", config, "--trials", "300", "--seed", "5", "--out", b, "--threads", "3"}), 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(Cli, TrialsZeroIsUsageError) {
    EXPECT_EQ(call({"outage", config, "--trials", "0"}), 2);
    EXPECT_EQ(call({"outage"}), 2);
    EXPECT_EQ(call({"nonsense"}), 2);
}

TEST_F(Cli, BadConfigIsUsageError) {
    const auto bad = (dir / "bad.json").string();
    std::ofstream(bad) << R"({"n_a":2,"m":15})";
    EXPECT_EQ(call({"outage", bad, "--trials", "10"}), 2);
    EXPECT_EQ(call({"outage", (dir / "missing.json").string(), "--trials", "10"}), 2);
}

TEST_F(Cli, InsecureRegimeExitCode) {
    EXPECT_EQ(call({"outage", insecure, "--trials", "10"}), 3);
}

TEST_F(Cli, OverridesBeatFile) {
    ASSERT_EQ(call({"outage", insecure, "--trials", "10", "--n-e", "4"}), 0) << err.str();
}

TEST_F(Cli, SeedFromEnvironment) {
    const auto a = (dir / "a.csv").string();
    ::setenv("USK_SEED", "77", 1);
    const int rc = call({"outage", config, "--trials", "50", "--out", a});
    ::unsetenv("USK_SEED");
    ASSERT_EQ(rc, 0);
    EXPECT_NE(slurp(a).find(",77\n"), std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(a + ".manifest.json"));
    EXPECT_EQ(manifest.at("seed").get<std::uint64_t>(), 77u);
}

TEST_F(Cli, ManifestReplayReproduces) {
    const auto a = (dir / "a.csv").string();
    ASSERT_EQ(call({"outage", config, "--trials", "200", "--seed", "9", "--out", a}), 0);
    const std::string first = slurp(a);
    const auto manifest = nlohmann::json::parse(slurp(a + ".manifest.json"));
    EXPECT_EQ(manifest.at("command"), "outage");
    EXPECT_EQ(manifest.at("trials"), 200);
    EXPECT_EQ(manifest.at("outputs")[0].at("sha256"), usk::cli::sha256_hex(first));
    fs::remove(a);
    ASSERT_EQ(call({"replay", a + ".manifest.json"}), 0) << err.str();
    EXPECT_EQ(slurp(a), first);
}

TEST_F(Cli, ReplayDetectsTampering) {
    const auto a = (dir / "a.csv").string();
    ASSERT_EQ(call({"outage", config, "--trials", "50", "--seed", "9", "--out", a}), 0);
    auto manifest = nlohmann::json::parse(slurp(a + ".manifest.json"));
    manifest["outputs"][0]["sha256"] = std::string(64, '0');
    std::ofstream(a + ".manifest.json") << manifest.dump();
    EXPECT_EQ(call({"replay", a + ".manifest.json"}), 4);
}

TEST_F(Cli, Solve) {
    ASSERT_EQ(call({"solve", "--epsilon", "0.19609", "--d", "2", "--n-a", "2", "--n-e", "4"}), 0);
    const std::string text = out.str();
    EXPECT_NE(text.find("n_min=2\n"), std::string::npos);
    EXPECT_NE(text.find("P_J=3.59"), std::string::npos);
    EXPECT_NE(text.find("M=256\n"), std::string::npos);
    EXPECT_EQ(call({"solve", "--epsilon", "1.5"}), 2);
}

TEST_F(Cli, AttackBothRegimes) {
    ASSERT_EQ(call({"attack", insecure, "--draws", "5"}), 0);
    EXPECT_NE(out.str().find("ZF attack succeeds (insecure regime)"), std::string::npos);
    EXPECT_NE(out.str().find("regime check: PASS"), std::string::npos);
    ASSERT_EQ(call({"attack", config, "--draws", "5"}), 0);
    EXPECT_NE(out.str().find("no left inverse — attack impossible"), std::string::npos);
}

TEST_F(Cli, BoundsCsv) {
    ASSERT_EQ(call({"bounds", config, "--x-grid", "0.5,1,2", "--samples", "1000"}), 0) << err.str();
    const std::string text = out.str();
    EXPECT_EQ(text.rfind("x,theta_bound,empirical_cdf\n", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    EXPECT_EQ(call({"bounds", config, "--x-grid", "0.5,abc"}), 2);
}

TEST_F(Cli, CurveSmallGrid) {
    ASSERT_EQ(call({"curve", "--eps-grid", "0.6,0.4", "--trials", "200", "--seed", "1"}), 0) << err.str();
    const std::string text = out.str();
    EXPECT_EQ(text.rfind("epsilon,p_j,m,p_hat,ci_low,ci_high,theta_bound_at_eps\n0.6,", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST_F(Cli, ValidateDist) {
    ASSERT_EQ(call({"validate-dist", config, "--samples", "10000", "--seed", "2"}), 0) << out.str();
    EXPECT_NE(out.str().find("REJECTED"), std::string::npos);
    EXPECT_EQ(call({"validate-dist", config, "--samples", "10"}), 2);
}

TEST_F(Cli, OtpModeFlag) {
    EXPECT_EQ(call({"outage", config, "--trials", "20", "--otp-mode", "ball"}), 0);
    EXPECT_EQ(call({"outage", config, "--trials", "20", "--otp-mode", "sideways"}), 2);
}

}  // namespace
