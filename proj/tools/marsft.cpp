// marsft: residual phase noise and stability of relay-station fiber frequency transfer.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include "marsft/config.hpp"
#include "marsft/csv.hpp"
#include "marsft/fixtures.hpp"
#include "marsft/freqdomain.hpp"
#include "marsft/oracle.hpp"
#include "marsft/outputs.hpp"
#include "marsft/phase_algebra.hpp"

namespace fs = std::filesystem;
using namespace marsft;

namespace {

enum Exit { kOk = 0, kFailed = 1, kUsage = 2 };

struct Common {
    std::string config_path;
    std::string preset;
    std::string preset_dir = MARSFT_PRESET_DIR;
    std::string out;
    std::string grid;
    std::string taus;
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "configuration file");
        app->add_option("--preset", preset, "named preset (" + names() + ")");
        app->add_option("--preset-dir", preset_dir, "directory holding the presets");
        app->add_option("--out", out, "output directory (default $MARSFT_OUT_DIR, then output.dir, then .)");
        app->add_option("--grid", grid, "frequency grid FMIN:FMAX:PPD");
        app->add_option("--taus", taus, "comma-separated averaging times, s");
        app->add_option("--seed", seed, "oracle seed");
    }

    static std::string names() {
        std::string s;
        for (const auto& n : config::preset_names()) s += (s.empty() ? "" : ", ") + n;
        return s;
    }

    config::RunConfig resolve() const {
        if (!config_path.empty() && !preset.empty()) throw config::ConfigError("give --config or --preset, not both");
        config::RunConfig c;
        if (!config_path.empty()) {
            if (!fs::exists(config_path)) throw config::ConfigError("config file not found: " + config_path);
            c = config::load(config_path);
        } else if (!preset.empty()) {
            c = config::load_preset(preset_dir, preset);
        }
        if (!grid.empty()) c.grid = config::parse_grid(grid);
        if (!taus.empty()) c.taus = config::parse_taus(taus);
        if (seed) c.seed = *seed;
        if (!out.empty()) c.out_dir = out;
        else if (const char* env = std::getenv("MARSFT_OUT_DIR"); env && *env) c.out_dir = env;
        return c;
    }
};

void emit_error(const std::string& kind, const std::string& message) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

void write(const config::RunConfig& c, const std::string& name, const csv::Table& t) {
    const auto path = fs::path(c.out_dir) / name;
    csv::write_atomic(path, t.str());
    std::cout << "wrote " << path.string() << " (" << t.rows.size() << " rows)\n";
}

int cmd_psd(const Common& opt, const std::string& variant) {
    const auto c = opt.resolve();
    const bool all = variant == "all";
    if (all || variant == "chain") write(c, "psd_chain.csv", outputs::psd_table(c, outputs::chain_psd(c), "chain"));
    if (all || variant == "free_running")
        write(c, "psd_free_running.csv", outputs::psd_table(c, outputs::free_running_psd(c), "free_running"));
    if (all || variant == "cascaded") write(c, "psd_cascaded.csv", outputs::psd_table(c, outputs::cascaded_psd(c), "cascaded"));
    return kOk;
}

int cmd_adev(const Common& opt, const std::string& psd_file) {
    const auto c = opt.resolve();
    if (!psd_file.empty()) {
        if (!fs::exists(psd_file)) throw config::ConfigError("PSD file not found: " + psd_file);
        const auto psd = csv::read_psd(psd_file);
        write(c, "adev.csv", outputs::adev_table(c, outputs::adev_from_psd(c, psd), "file:" + fs::path(psd_file).filename().string()));
    } else {
        write(c, "adev.csv", outputs::adev_table(c, outputs::adev_from_psd(c, outputs::chain_psd(c)), "chain"));
    }
    return kOk;
}

int cmd_oracle(const Common& opt, std::size_t max_rows) {
    const auto c = opt.resolve();
    auto sim_cfg = c.sim_config();
    const std::vector<double>& taus = c.oracle_taus;
    const double nu = sweep::rs_adev_carrier(c.chain);
    if (c.seeds <= 1) {
        const auto sim = oracle::simulate(sim_cfg);
        const std::size_t step = std::max<std::size_t>(1, (sim.rs_residual.size() + max_rows - 1) / max_rows);
        write(c, "oracle_series.csv", outputs::series_table(c, sim, step));
        if (!c.inject_noise) {
            double worst = 0.0;
            for (double x : sim.rs_residual) worst = std::max(worst, std::abs(x));
            std::cout << "max |residual| after settling: " << worst << " rad\n";
            return kOk;
        }
        write(c, "oracle_adev.csv", outputs::adev_table(c, stability::adev_from_series(sim.rs_residual, sim.sample_rate, nu, taus), "oracle"));
        return kOk;
    }
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < c.seeds; ++i) seeds.push_back(c.seed + i);
    const auto stats = oracle::monte_carlo_rs_adev(sim_cfg, seeds, taus, nu);
    csv::Table t;
    t.header = {"tau_s", "adev_mean", "adev_stddev", "std_error", "predicted", "z"};
    for (const auto& s : stats)
        t.rows.push_back({csv::num(s.tau), csv::num(s.mean), csv::num(s.stddev), csv::num(s.std_error), csv::num(s.predicted),
                          csv::num(s.z_score())});
    t.comments.push_back({"seeds", std::to_string(c.seed) + ".." + std::to_string(c.seed + c.seeds - 1)});
    outputs::stamp(t, c, "oracle/monte_carlo");
    write(c, "oracle_adev.csv", t);
    return kOk;
}

int cmd_sweep(const Common& opt) {
    const auto c = opt.resolve();
    const auto t = outputs::sweep_table(c);
    const bool grid = c.sweep_kind == config::SweepKind::RatioLength;
    write(c, grid ? "sweep_ratio_length.csv" : "sweep_chain_vs_cascade.csv", t);
    if (!grid) std::cout << "chain not worse than cascade at 1 s: " << t.comments.back().second << "\n";
    if (grid)
        for (const auto& r : t.rows)
            if (!r.back().empty()) std::cout << "cell " << r[0] << " km, ratio " << r[1] << " failed: " << r.back() << "\n";
    return kOk;
}

bool report(const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << (detail.empty() ? "" : "  " + detail) << "\n";
    return pass;
}

int cmd_verify(const Common& opt, const std::string& fixture_dir) {
    const auto c = opt.resolve();
    bool ok = true;
    char buf[160];

    {   // recovered phase equals the reference at every output
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> u(-kPi, kPi);
        std::uniform_int_distribution<int> nd(1, 32);
        double worst = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const int n = nd(rng);
            std::vector<double> p(static_cast<std::size_t>(n) + 1);
            for (double& x : p) x = u(rng);
            const double r = u(rng);
            const auto s = phase_algebra::solve_static_locks(r, p);
            worst = std::max(worst, std::abs(phase_algebra::recovered_output_phase(s, phase_algebra::RemoteSite{}) - r));
            for (std::size_t k = 1; k <= s.stations(); ++k)
                worst = std::max(worst, std::abs(phase_algebra::recovered_output_phase(s, phase_algebra::Station{k}) - r));
        }
        std::snprintf(buf, sizeof buf, "max error %.2e rad over 2000 random chains", worst);
        ok &= report("phase-recovery-identity", worst <= 1e-12, buf);
    }
    {   // closed form against the tridiagonal solver for one station
        auto one = c.chain;
        if (one.station_count() != 1) one.sublink_lengths = {100.0, 100.0};
        if (one.pll.size() != 1) one.pll = {c.chain.pll.front()};
        const auto f = c.grid.build();
        const auto a = freqdomain::residual_psd_single_mars(one, f), b = freqdomain::residual_psd_chain(one, f);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(a.values[i] - b.values[i]) / a.values[i]);
        std::snprintf(buf, sizeof buf, "max relative difference %.2e over %zu points", worst, f.size());
        ok &= report("single-station-consistency", worst <= 1e-10, buf);
    }
    {   // M identical stages: ADEV scales by sqrt(M)
        const auto f = c.grid.build();
        const double span = 100.0, nu = sweep::rs_adev_carrier(c.chain);
        const auto one = stability::psd_to_adev(freqdomain::cascaded_psd(c.chain, span, 1, f), nu, c.taus, c.f_high);
        double worst = 0.0;
        for (std::size_t m : {2u, 5u, 30u}) {
            const auto many = stability::psd_to_adev(freqdomain::cascaded_psd(c.chain, span * static_cast<double>(m), m, f), nu, c.taus, c.f_high);
            for (std::size_t i = 0; i < one.size(); ++i)
                worst = std::max(worst, std::abs(many.sigmas[i] / (std::sqrt(static_cast<double>(m)) * one.sigmas[i]) - 1.0));
        }
        std::snprintf(buf, sizeof buf, "max relative deviation %.2e for M = 2, 5, 30", worst);
        ok &= report("cascade-sqrt-law", worst <= 1e-9, buf);
    }
    if (!fixture_dir.empty()) {
        const auto rep = fixtures::regenerate_fixtures(fixture_dir, opt.preset_dir);
        for (const auto& e : rep.entries)
            ok &= report("fixture " + e.name, e.status == fixtures::Status::Match || e.status == fixtures::Status::Created,
                         fixtures::to_string(e.status) + (e.detail.empty() ? "" : ": " + e.detail));
    }
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relay-station fiber frequency transfer: residual PSD, Allan deviation, time-domain check"};
    app.require_subcommand(1);
    Common opt;
    std::string variant = "all", psd_file, fixture_dir;
    std::size_t max_rows = 100000;

    auto* psd = app.add_subcommand("psd", "residual, free-running and cascaded PSDs");
    opt.attach(psd);
    psd->add_option("--variant", variant, "chain | free_running | cascaded | all")
        ->check(CLI::IsMember({"chain", "free_running", "cascaded", "all"}));
    auto* adev = app.add_subcommand("adev", "Allan deviation from a chain config or a PSD file");
    opt.attach(adev);
    adev->add_option("--psd", psd_file, "PSD CSV written by `psd`");
    auto* orc = app.add_subcommand("oracle", "time-domain simulation");
    opt.attach(orc);
    orc->add_option("--max-rows", max_rows, "series rows kept (decimated)")->check(CLI::PositiveNumber);
    auto* swp = app.add_subcommand("sweep", "ratio x length grid or chain vs cascade");
    opt.attach(swp);
    auto* ver = app.add_subcommand("verify", "identity checks and fixture regeneration");
    opt.attach(ver);
    ver->add_option("--fixtures", fixture_dir, "fixture directory to check (populated if empty)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        emit_error("usage", e.what());
        return kUsage;
    }

    try {
        if (*psd) return cmd_psd(opt, variant);
        if (*adev) return cmd_adev(opt, psd_file);
        if (*orc) return cmd_oracle(opt, max_rows);
        if (*swp) return cmd_sweep(opt);
        if (*ver) return cmd_verify(opt, fixture_dir);
    } catch (const config::ConfigError& e) {
        emit_error("config", e.what());
        return kUsage;
    } catch (const ModelError& e) {
        emit_error("config", e.what());
        return kUsage;
    } catch (const oracle::OracleError& e) {
        emit_error("solve", e.what());
        return kFailed;
    } catch (const std::exception& e) {
        emit_error("solve", e.what());
        return kFailed;
    }
    return kUsage;
}
