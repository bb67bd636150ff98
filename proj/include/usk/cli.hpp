#pragma once

// Command-line front end. Every subcommand produces data (CSV or plain text)
// plus a JSON run manifest from which the data can be regenerated exactly.

#include <usk/bounds.hpp>
#include <usk/error.hpp>
#include <usk/lattice.hpp>
#include <usk/montecarlo.hpp>
#include <usk/stats.hpp>
#include <usk/uskenc.hpp>
#include <usk/wiretap.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#ifndef USK_VERSION
#define USK_VERSION "0.0.0"
#endif

namespace usk::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kRegime = 3,
    kNumerical = 4,
};

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    EVP_DigestUpdate(ctx, data.data(), data.size());
    EVP_DigestFinal_ex(ctx, md.data(), &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

/// Shortest round-trip decimal form; independent of the C++ locale.
inline std::string fmt(double x) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

template <class... Fields>
std::string csv_row(const Fields&... fields) {
    std::string line;
    bool first = true;
    auto add = [&](const auto& f) {
        if (!first) line += ',';
        first = false;
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, double>) {
            line += fmt(f);
        } else if constexpr (std::is_arithmetic_v<T>) {
            line += std::to_string(f);
        } else {
            line += std::string(f);
        }
    };
    (add(fields), ...);
    line += '\n';
    return line;
}

inline std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::string_view rest(text);
    while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size()) {
            throw Error(ErrorCode::ConfigError, "bad number '" + std::string(item) + "' in grid");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    if (out.empty()) throw Error(ErrorCode::ConfigError, "empty grid");
    return out;
}

inline OtpMode parse_otp_mode(const std::string& s) {
    if (s == "ball") return OtpMode::Ball;
    if (s == "surface") return OtpMode::Surface;
    if (s == "per-jammer") return OtpMode::PerJammer;
    throw Error(ErrorCode::ConfigError, "unknown --otp-mode '" + s + "'");
}

inline SystemConfig default_curve_geometry() {
    SystemConfig cfg;
    cfg.n_a = 2;
    cfg.n_b = 2;
    cfg.n_e = 4;
    cfg.jammers = {3, 3};
    return cfg;
}

inline SystemConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

/// Optional per-field overrides shared by every command that takes a config.
struct ConfigOverrides {
    std::optional<int> n_a, n_b, n_e, m;
    std::optional<double> p_j;
    std::vector<int> jammers;

    void attach(CLI::App* app) {
        app->add_option("--n-a", n_a, "Alice antennas");
        app->add_option("--n-b", n_b, "Bob antennas");
        app->add_option("--n-e", n_e, "Eve antennas");
        app->add_option("--m", m, "constellation order");
        app->add_option("--p-j", p_j, "peak jamming power");
        app->add_option("--jammers", jammers, "antennas per jammer")->delimiter(',');
    }

    SystemConfig apply(SystemConfig cfg) const {
        if (n_a) cfg.n_a = *n_a;
        if (n_b) cfg.n_b = *n_b;
        if (n_e) cfg.n_e = *n_e;
        if (m) cfg.m = *m;
        if (p_j) cfg.p_j = *p_j;
        if (!jammers.empty()) cfg.jammers = jammers;
        cfg.validate();
        return cfg;
    }
};

struct CommandResult {
    std::string data;
    nlohmann::json config = nullptr;
    std::uint64_t trials = 0;
    int exit_code = kOk;
};

inline std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("USK_SEED")) {
        std::uint64_t v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) throw Error(ErrorCode::ConfigError, "USK_SEED is not an integer");
        return v;
    }
    return 1;
}

inline int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::DomainError:
    case ErrorCode::LengthMismatch:
    case ErrorCode::TooLarge: return kUsage;
    case ErrorCode::InvalidRegime: return kRegime;
    default: return kNumerical;
    }
}

namespace commands {

inline CommandResult outage(const SystemConfig& cfg, int d, int k, std::uint64_t trials, std::uint64_t seed,
                            const SimulationOptions& opts) {
    const OutageEstimate e = estimate_outage(cfg, d, k, trials, seed, opts);
    CommandResult r;
    r.data = "d,k,trials,outages,p_hat,ci_low,ci_high,seed\n";
    r.data += csv_row(e.d, e.k, e.trials, e.outages, e.p_hat, e.ci_low, e.ci_high, e.seed);
    r.config = cfg;
    r.trials = trials;
    return r;
}

inline CommandResult curve(const SystemConfig& geometry, int d, const std::vector<double>& grid,
                            std::uint64_t trials, std::uint64_t seed, const SimulationOptions& opts) {
    const auto rows = outage_curve(geometry, d, grid, trials, seed, opts);
    CommandResult r;
    r.data = "epsilon,p_j,m,p_hat,ci_low,ci_high,theta_bound_at_eps\n";
    for (const auto& row : rows) {
        r.data += csv_row(row.epsilon, row.p_j, row.m, row.estimate.p_hat, row.estimate.ci_low, row.estimate.ci_high,
                          row.theta_bound);
    }
    r.config = geometry;
    r.trials = trials;
    return r;
}

inline CommandResult bounds(const SystemConfig& cfg, const std::vector<double>& grid, std::uint64_t samples,
                            std::uint64_t seed, unsigned threads) {
    CommandResult r;
    std::vector<double> empirical;
    if (samples > 0) empirical = theta_cdf_empirical(cfg, cfg.p_j, cfg.m, samples, seed, grid, threads);
    r.data = samples > 0 ? "x,theta_bound,empirical_cdf\n" : "x,theta_bound\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lb = theta_cdf_lower_bound(grid[i], cfg, cfg.p_j);
        r.data += samples > 0 ? csv_row(grid[i], lb, empirical[i]) : csv_row(grid[i], lb);
    }
    r.config = cfg;
    r.trials = samples;
    return r;
}

inline CommandResult solve(int n_a, int n_e, double epsilon, int d, MRounding rounding) {
    const BoundParams p = solve_design_schedule(n_a, n_e, epsilon, d, rounding);
    CommandResult r;
    std::ostringstream os;
    os << "epsilon=" << fmt(p.epsilon) << '\n'
       << "d=" << p.d << '\n'
       << "n_min=" << p.n_min << '\n'
       << "kappa=" << fmt(p.kappa) << '\n'
       << "phi=" << fmt(p.phi) << '\n'
       << "P_J=" << fmt(p.p_j_required) << '\n'
       << "M_raw=" << fmt(p.m_raw) << '\n'
       << "M=" << p.m_required << '\n';
    r.data = os.str();
    r.config = nlohmann::json{{"n_a", n_a}, {"n_e", n_e}, {"epsilon", epsilon}, {"d", d}};
    return r;
}

inline constexpr double kAttackResidualTolerance = 1e-8;

inline CommandResult attack(const SystemConfig& cfg, std::uint64_t draws, std::uint64_t seed, OtpMode mode) {
    const Constellation cons(cfg.m);
    std::uint64_t blocked = 0;
    double worst_residual = 0.0;
    for (std::uint64_t t = 0; t < draws; ++t) {
        RngStream rng(seed, t);
        const auto real = sample_realization(cfg, rng);
        const CVector u = random_message(cons, cfg.n_a, rng);
        const OtpVector otp = sample_otp(cfg, rng, mode);
        const Cryptogram c = encrypt(real, cons, u, otp.v, cfg.p_j);
        try {
            const CMatrix w = zf_filter(real);
            const CVector clean = w * real.g * u;
            const double rel = (w * c.y - clean).norm() / std::max(clean.norm(), 1e-300);
            worst_residual = std::max(worst_residual, rel);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NotInvertible) throw;
            ++blocked;
        }
    }
    CommandResult r;
    std::ostringstream os;
    os << "n_e=" << cfg.n_e << " N_J=" << cfg.total_jammer_antennas() << " draws=" << draws << '\n';
    bool consistent;
    if (blocked == draws) {
        os << "result: no left inverse — attack impossible\n";
        consistent = cfg.usk_valid();
    } else {
        os << "otp_residual_relative_max=" << fmt(worst_residual) << '\n';
        os << "result: ZF attack succeeds (insecure regime)\n";
        consistent = blocked == 0 && !cfg.usk_valid() && worst_residual <= kAttackResidualTolerance;
    }
    os << "regime check: " << (consistent ? "PASS" : "FAIL") << '\n';
    r.data = os.str();
    r.config = cfg;
    r.trials = draws;
    r.exit_code = consistent ? kOk : kNumerical;
    return r;
}

inline CommandResult validate_dist(const SystemConfig& cfg, std::uint64_t samples, std::uint64_t seed,
                                   unsigned threads) {
    const ChisqReport rep = validate_chisq_representations(cfg, samples, seed, threads);
    CommandResult r;
    auto verdict = [&](double ks) { return ks < rep.critical ? "PASS" : "FAIL"; };
    r.data = "statistic,ks,critical,verdict\n";
    r.data += csv_row("frobenius_hje_dof" + std::to_string(2 * cfg.n_e * cfg.total_jammer_antennas()),
                      rep.ks_frobenius, rep.critical, std::string(verdict(rep.ks_frobenius)));
    for (std::size_t j = 0; j < rep.ks_r_factor.size(); ++j) {
        r.data += csv_row("r_factor_j" + std::to_string(j + 1) + "_dof" + std::to_string(2 * (cfg.n_e - int(j))),
                          rep.ks_r_factor[j], rep.critical, std::string(verdict(rep.ks_r_factor[j])));
    }
    r.data += csv_row("control_j1_dof" + std::to_string(rep.control_dof), rep.ks_control, rep.critical,
                      std::string(rep.control_rejected() ? "REJECTED" : "NOT_REJECTED"));
    r.data += csv_row(std::string("det_identity_max_rel_error"), rep.det_identity_error, 1e-8,
                      std::string(rep.det_identity_error <= 1e-8 ? "PASS" : "FAIL"));
    r.config = cfg;
    r.trials = samples;
    const bool ok = rep.all_pass() && rep.control_rejected() && rep.det_identity_error <= 1e-8;
    r.exit_code = ok ? kOk : kNumerical;
    return r;
}

}  // namespace commands

inline void write_file(const std::string& path, std::string_view data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

/// Runs one invocation. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unshared-secret-key MIMO wiretap simulator", "usk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", USK_VERSION);

    std::optional<std::uint64_t> seed_flag;
    unsigned threads = 0;
    std::string out_path, manifest_path;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed_flag, "RNG seed (falls back to USK_SEED, then 1)");
        sub->add_option("--threads", threads, "worker cap (0 = all cores); results do not depend on it");
        sub->add_option("--out", out_path, "data output file (stdout when omitted)");
        sub->add_option("--manifest", manifest_path, "manifest path (default <out>.manifest.json)");
    };

    std::string config_path;
    ConfigOverrides overrides;
    int d = 2, k = 1;
    std::uint64_t trials = 0;
    std::string otp_mode = "per-jammer";

    auto* outage = app.add_subcommand("outage", "estimate P_out(d, K) for one configuration");
    outage->add_option("config", config_path, "JSON config file")->required();
    outage->add_option("--d", d, "key-space floor")->check(CLI::PositiveNumber);
    outage->add_option("--k", k, "channel uses per block")->check(CLI::PositiveNumber);
    outage->add_option("--trials", trials, "Monte-Carlo trials")->required()->check(CLI::PositiveNumber);
    outage->add_option("--otp-mode", otp_mode, "per-jammer | ball | surface");
    overrides.attach(outage);
    common(outage);

    std::string eps_grid = "0.6,0.5,0.4,0.3,0.25,0.19609";
    std::uint64_t curve_trials = 1000000;
    auto* curve = app.add_subcommand("curve", "outage versus epsilon under the design schedule");
    curve->add_option("--config", config_path, "JSON config overriding the default geometry");
    curve->add_option("--d", d, "key-space floor")->check(CLI::PositiveNumber);
    curve->add_option("--eps-grid", eps_grid, "comma-separated epsilon values");
    curve->add_option("--trials", curve_trials, "trials per grid point")->check(CLI::PositiveNumber);
    curve->add_option("--otp-mode", otp_mode, "per-jammer | ball | surface");
    overrides.attach(curve);
    common(curve);

    std::string x_grid;
    std::uint64_t samples = 0;
    auto* bounds = app.add_subcommand("bounds", "lower bound on Pr{Theta < x}, optionally with the empirical CDF");
    bounds->add_option("config", config_path, "JSON config file")->required();
    bounds->add_option("--x-grid", x_grid, "comma-separated x values")->required();
    bounds->add_option("--samples", samples, "channel draws for the empirical CDF (0 = bound only)");
    overrides.attach(bounds);
    common(bounds);

    double epsilon = 0.0;
    int solve_n_a = 2, solve_n_e = 4;
    bool any_square = false;
    auto* solve = app.add_subcommand("solve", "jamming power and constellation size for a target (epsilon, d)");
    solve->add_option("--epsilon", epsilon, "target outage scale in (0, 1)")->required();
    solve->add_option("--d", d, "key-space floor");
    solve->add_option("--n-a", solve_n_a, "Alice antennas");
    solve->add_option("--n-e", solve_n_e, "Eve antennas");
    solve->add_flag("--any-square", any_square, "round M up to any perfect square instead of a power of four");
    common(solve);

    std::uint64_t draws = 1;
    auto* attack = app.add_subcommand("attack", "zero-forcing attack on the one-time pad");
    attack->add_option("config", config_path, "JSON config file")->required();
    attack->add_option("--draws", draws, "channel draws")->check(CLI::PositiveNumber);
    attack->add_option("--otp-mode", otp_mode, "per-jammer | ball | surface");
    overrides.attach(attack);
    common(attack);

    std::uint64_t ks_samples = 100000;
    auto* validate = app.add_subcommand("validate-dist", "KS checks of the chi-squared channel statistics");
    validate->add_option("config", config_path, "JSON config file")->required();
    validate->add_option("--samples", ks_samples, "channel draws")->check(CLI::Range(std::uint64_t{10000}, UINT64_MAX));
    overrides.attach(validate);
    common(validate);

    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
    replay->add_option("manifest", replay_path, "manifest JSON")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << USK_VERSION << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*replay) {
            std::ifstream in(replay_path, std::ios::binary);
            if (!in) throw Error(ErrorCode::ConfigError, "cannot read manifest '" + replay_path + "'");
            nlohmann::json m;
            try {
                m = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::ConfigError, e.what());
            }
            std::ostringstream captured;
            const int rc = run(m.at("argv").get<std::vector<std::string>>(), captured, err);
            out << captured.str();
            if (rc != kOk) return rc;
            bool match = true;
            for (const auto& o : m.at("outputs")) {
                const auto path = o.at("path").get<std::string>();
                std::string data = captured.str();
                if (path != "-") {
                    std::ifstream f(path, std::ios::binary);
                    std::ostringstream buf;
                    buf << f.rdbuf();
                    data = buf.str();
                }
                if (sha256_hex(data) != o.at("sha256").get<std::string>()) {
                    err << "replay: digest mismatch for " << path << '\n';
                    match = false;
                }
            }
            return match ? kOk : kNumerical;
        }

        const std::uint64_t seed = resolve_seed(seed_flag);
        const auto started = std::chrono::steady_clock::now();
        CommandResult result;
        std::string name;
        SimulationOptions opts{parse_otp_mode(otp_mode), threads};
        if (*outage) {
            name = "outage";
            result = commands::outage(overrides.apply(load_config_file(config_path)), d, k, trials, seed, opts);
        } else if (*curve) {
            name = "curve";
            SystemConfig geom = config_path.empty() ? default_curve_geometry() : load_config_file(config_path);
            geom = overrides.apply(geom);
            result = commands::curve(geom, d, parse_grid(eps_grid), curve_trials, seed, opts);
        } else if (*bounds) {
            name = "bounds";
            result = commands::bounds(overrides.apply(load_config_file(config_path)), parse_grid(x_grid), samples, seed,
                                      threads);
        } else if (*solve) {
            name = "solve";
            result = commands::solve(solve_n_a, solve_n_e, epsilon, d,
                                     any_square ? MRounding::PerfectSquare : MRounding::PowerOfFour);
        } else if (*attack) {
            name = "attack";
            result = commands::attack(overrides.apply(load_config_file(config_path)), draws, seed, opts.otp_mode);
        } else if (*validate) {
            name = "validate-dist";
            result = commands::validate_dist(overrides.apply(load_config_file(config_path)), ks_samples, seed,
                                             threads);
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        nlohmann::json outputs = nlohmann::json::array();
        if (out_path.empty()) {
            out << result.data;
            outputs.push_back({{"path", "-"}, {"sha256", sha256_hex(result.data)}});
        } else {
            write_file(out_path, result.data);
            outputs.push_back({{"path", out_path}, {"sha256", sha256_hex(result.data)}});
        }
        if (manifest_path.empty() && !out_path.empty()) manifest_path = out_path + ".manifest.json";
        if (!manifest_path.empty()) {
            std::vector<std::string> argv = args;
            if (!seed_flag) {
                argv.push_back("--seed");
                argv.push_back(std::to_string(seed));
            }
            nlohmann::json manifest = {
                {"command", name},          {"argv", argv},      {"config", result.config},
                {"seed", seed},             {"trials", result.trials}, {"wall_time_s", wall},
                {"version", USK_VERSION},   {"outputs", outputs},
            };
            write_file(manifest_path, manifest.dump(2) + "\n");
        }
        return result.exit_code;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
}

}  // namespace usk::cli
