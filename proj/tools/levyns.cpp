// levyns: command-line driver (simulate, verify, tightness, noise-test).

#include "levyns/config.hpp"
#include "levyns/errors.hpp"
#include "levyns/harness.hpp"
#include "levyns/report_io.hpp"
#include "levyns/stats.hpp"
#include "levyns/verification.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitAcceptance = 3;

struct Common {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int paths = 0;
    std::string out;
    bool quiet = false;
};

levyns::RunConfig load(const Common& c) {
    levyns::RunConfig cfg = c.config.empty() ? levyns::RunConfig{} : levyns::parse_config(c.config);
    if (c.seed_set) cfg.ensemble.seed = c.seed;
    if (c.paths > 0) cfg.ensemble.n_paths = c.paths;
    if (!c.out.empty()) cfg.output.directory = c.out;
    levyns::validate(cfg);
    return cfg;
}

bool wants(const levyns::RunConfig& cfg, const std::string& fmt) {
    return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), fmt) != cfg.output.formats.end();
}

std::string sha256_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Collects written artifacts; the manifest is the only file with timestamps.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    void write(const std::string& rel, const std::string& text) {
        levyns::write_text(dir_ / rel, text);
        files_.push_back(rel);
    }

    void manifest(const std::string& command, const levyns::RunConfig& cfg, double seconds) {
        ordered_json j;
        j["schema"] = "levyns.manifest";
        j["schema_version"] = levyns::kReportSchemaVersion;
        j["command"] = command;
        j["seed"] = cfg.ensemble.seed;
        j["created_utc"] = utc_now();
        j["wall_seconds"] = seconds;
        j["workers"] = levyns::worker_count();
        ordered_json files = ordered_json::array();
        for (const auto& f : files_) files.push_back({{"path", f}, {"sha256", sha256_file(dir_ / f)}});
        j["files"] = files;
        levyns::write_text(dir_ / "manifest.json", j.dump(2) + "\n");
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

void write_ensemble(Artifacts& art, const levyns::RunConfig& cfg, const levyns::EnsembleReport& rep,
                    const std::string& command, int trajectories) {
    if (wants(cfg, "json")) art.write("report.json", levyns::report_json(rep, cfg, command));
    if (wants(cfg, "csv")) {
        art.write("increments.csv", levyns::increments_csv(rep));
        art.write("moments.csv", levyns::moments_csv(rep));
    }
    if (wants(cfg, "gnuplot")) art.write("plot.gp", levyns::plot_script(rep, trajectories));
}

int cmd_simulate(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(c);
    const auto problem = levyns::build_problem(cfg);
    const auto paths = levyns::run_paths(problem);
    const auto rep = levyns::summarize(problem, paths);

    Artifacts art(cfg.output.directory);
    art.write("config.json", levyns::config_echo(cfg));
    int traj = 0;
    if (cfg.output.trajectories) {
        traj = std::min<int>(cfg.output.trajectory_paths, static_cast<int>(paths.size()));
        for (int i = 0; i < traj; ++i) {
            const std::string stem = "trajectories/path_" + std::to_string(i);
            art.write(stem + ".jsonl", levyns::trajectory_jsonl(paths[i].ledger));
            art.write(stem + ".csv", levyns::trajectory_csv(paths[i].ledger));
        }
    }
    write_ensemble(art, cfg, rep, "simulate", traj);
    art.manifest("simulate", cfg, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    if (!c.quiet) {
        std::cout << "simulated " << rep.n_paths << " paths (" << rep.aborted << " aborted) -> "
                  << art.dir().string() << "\n";
        for (const auto& m : rep.moments)
            std::cout << "  E sup ||sqrt(rho)u||^" << m.p << " = " << m.energy_sup.mean << " +/- " << m.energy_sup.se
                      << "\n";
        if (rep.increment_exponent) std::cout << "  increment exponent " << rep.increment_exponent->slope << "\n";
    }
    return rep.aborted > 0 ? kExitNumerical : kExitOk;
}

int cmd_verify(const Common& c, const std::vector<int>& only) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(c);
    levyns::VerifyOptions opt;
    opt.seed = cfg.ensemble.seed;
    opt.only = only;
    if (!c.quiet) opt.progress = [](const levyns::CriterionResult& r) {
        std::cout << levyns::format_result_line(r) << std::endl;
    };
    const auto results = levyns::run_acceptance(opt);
    Artifacts art(cfg.output.directory);
    art.write("config.json", levyns::config_echo(cfg));
    art.write("acceptance.json", levyns::acceptance_report_json(results, opt.seed));
    art.manifest("verify", cfg, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    if (!c.quiet) std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed\n";
    return failed ? kExitAcceptance : kExitOk;
}

int cmd_tightness(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(c);
    const auto problem = levyns::build_problem(cfg);
    const auto rep = levyns::run_ensemble(problem);
    Artifacts art(cfg.output.directory);
    art.write("config.json", levyns::config_echo(cfg));
    art.write("increments.csv", levyns::increments_csv(rep));
    ordered_json j;
    j["schema"] = "levyns.increment_exponent";
    j["schema_version"] = levyns::kReportSchemaVersion;
    j["n_lags"] = rep.increments.size();
    if (rep.increment_exponent) {
        const auto& f = *rep.increment_exponent;
        j["rho_u"] = {{"slope", f.slope}, {"slope_stderr", f.slope_se}, {"ci95", {f.ci_low, f.ci_high}}};
    } else {
        j["rho_u"] = nullptr;
    }
    if (rep.u_increment_exponent) {
        const auto& f = *rep.u_increment_exponent;
        j["u_proxy"] = {{"slope", f.slope}, {"slope_stderr", f.slope_se}, {"ci95", {f.ci_low, f.ci_high}}};
    } else {
        j["u_proxy"] = nullptr;
    }
    j["dual_truncation_change"] = rep.dual_truncation_change;
    art.write("exponent.json", j.dump(2) + "\n");
    if (wants(cfg, "json")) art.write("report.json", levyns::report_json(rep, cfg, "tightness"));
    if (wants(cfg, "gnuplot")) art.write("plot.gp", levyns::plot_script(rep, 0));
    art.manifest("tightness", cfg, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (!c.quiet) {
        std::cout << rep.increments.size() << " lags -> " << art.dir().string() << "\n";
        if (rep.increment_exponent) std::cout << "  fitted exponent " << rep.increment_exponent->slope << "\n";
    }
    return rep.aborted > 0 ? kExitNumerical : kExitOk;
}

ordered_json est_json(const levyns::Estimate& e) { return {{"estimate", e.mean}, {"stderr", e.se}, {"n", e.n}}; }

int cmd_noise_test(const Common& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(c);
    levyns::NoiseSpec spec;
    spec.mu = levyns::make_intensity(cfg);
    spec.epsilon = cfg.noise.epsilon;
    spec.brownian_dim = cfg.noise.brownian_dim;
    spec.brownian = cfg.noise.enabled && cfg.noise.brownian;
    spec.jumps = cfg.noise.enabled && cfg.noise.jumps;
    const int n = cfg.ensemble.n_paths, steps = cfg.n_steps();
    const double T = cfg.time.T, dt = T / steps;
    const double lam = spec.jumps ? spec.mu.large_total() * T : 0.0;
    const double comp_r =
        spec.jumps && spec.mu.kind() != levyns::IntensityKind::None
            ? spec.mu.radial_integral([](double r) { return r; }, spec.epsilon, 1.0)
            : 0.0;

    std::vector<double> counts(n), small(n), bvar(n), first_times;
    std::vector<double> first(n, -1.0);
    levyns::parallel_for(n, [&](std::size_t i) {
        const auto path = levyns::NoisePath::generate(spec, T, steps, cfg.ensemble.seed, i);
        std::vector<double> radii;
        for (const auto& j : path.jumps()) {
            if (j.size_class == levyns::SizeClass::Large) {
                if (counts[i] == 0) first[i] = j.time;
                counts[i] += 1;
            } else {
                radii.push_back(j.radius);
            }
        }
        small[i] = levyns::compensated_increment(radii, T, comp_r);
        std::vector<double> sq;
        for (int k = 0; k < steps; ++k)
            for (double w : path.base_increment(k)) sq.push_back(w * w);
        bvar[i] = sq.empty() ? 0.0 : levyns::pairwise_sum(sq) / sq.size();
    });
    for (double f : first)
        if (f >= 0.0) first_times.push_back(f);

    ordered_json j;
    j["schema"] = "levyns.noise_report";
    j["schema_version"] = levyns::kReportSchemaVersion;
    j["seed"] = cfg.ensemble.seed;
    j["n_paths"] = n;
    j["intensity"] = spec.mu.name();
    j["large_jump_count"] = {{"expected", lam}, {"mean", est_json(levyns::estimate(counts))}};
    std::vector<double> dev2;
    const double cm = levyns::estimate(counts).mean;
    for (double k : counts) dev2.push_back((k - cm) * (k - cm));
    j["large_jump_count"]["variance"] = est_json(levyns::estimate(dev2));
    j["compensated_small_radius_sum"] = {{"expected", 0.0}, {"mean", est_json(levyns::estimate(small))}};
    j["brownian_increment_variance"] = {{"expected", spec.brownian ? dt : 0.0}, {"mean", est_json(levyns::estimate(bvar))}};
    if (!first_times.empty() && lam > 0.0) {
        // first arrival given at least one arrival: truncated exponential
        const double rate = lam / T;
        const auto ks = levyns::ks_test(first_times, [&](double t) {
            return (1.0 - std::exp(-rate * t)) / (1.0 - std::exp(-rate * T));
        });
        j["first_arrival_ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"n", first_times.size()}};
    }
    if (spec.jumps && spec.mu.kind() != levyns::IntensityKind::None) {
        j["compensator_mass"] = spec.mu.small_total(spec.epsilon);
        j["neglected_variance"] = spec.mu.neglected_variance(spec.epsilon);
    }
    Artifacts art(cfg.output.directory);
    art.write("config.json", levyns::config_echo(cfg));
    art.write("noise_report.json", j.dump(2) + "\n");
    art.manifest("noise-test", cfg, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (!c.quiet) std::cout << j.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"levyns: Galerkin simulator for stochastic variable-density Navier-Stokes with Levy noise"};
    app.require_subcommand(1);
    Common c;
    std::vector<int> only;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", c.config, "JSON configuration file (defaults when omitted)");
        sub->add_option_function<std::uint64_t>(
            "--seed",
            [&](const std::uint64_t& s) {
                c.seed = s;
                c.seed_set = true;
            },
            "override ensemble.seed");
        sub->add_option("--paths", c.paths, "override ensemble.n_paths")->check(CLI::PositiveNumber);
        sub->add_option("--out", c.out, "output directory (overrides output.directory)");
        sub->add_flag("--quiet", c.quiet, "suppress console output");
    };
    auto* sim = app.add_subcommand("simulate", "run an ensemble and write trajectories and the report");
    auto* ver = app.add_subcommand("verify", "run the acceptance suite");
    auto* tig = app.add_subcommand("tightness", "increment table and fitted exponent");
    auto* noi = app.add_subcommand("noise-test", "statistical checks of the noise generator");
    for (auto* s : {sim, ver, tig, noi}) add_common(s);
    ver->add_option("--criteria", only, "run only these criterion ids")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(c);
        if (*ver) return cmd_verify(c, only);
        if (*tig) return cmd_tightness(c);
        return cmd_noise_test(c);
    } catch (const levyns::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const levyns::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const levyns::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
