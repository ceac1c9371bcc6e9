#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "marsft/config.hpp"
#include "marsft/csv.hpp"
#include "marsft/outputs.hpp"

namespace marsft::fixtures {

namespace fs = std::filesystem;

enum class Tolerance { Exact, Rel1e10, Band50 };

inline std::string to_string(Tolerance t) {
    switch (t) {
        case Tolerance::Exact: return "exact";
        case Tolerance::Rel1e10: return "rel1e-10";
        case Tolerance::Band50: return "band50";
    }
    return "?";
}

inline std::optional<Tolerance> tolerance_from(const std::string& s) {
    if (s == "exact") return Tolerance::Exact;
    if (s == "rel1e-10") return Tolerance::Rel1e10;
    if (s == "band50") return Tolerance::Band50;
    return std::nullopt;
}

/// One manifest line: name, generating preset, checksum of the stored file, tolerance class.
struct GoldenFixture {
    std::string name;
    std::string preset;
    std::string checksum;
    Tolerance tolerance = Tolerance::Rel1e10;

    std::string file() const { return name + (tolerance == Tolerance::Exact ? ".cfg" : ".csv"); }
};

inline constexpr const char* kManifest = "manifest.txt";

inline std::vector<GoldenFixture> read_manifest(const fs::path& dir) {
    std::vector<GoldenFixture> out;
    const auto path = dir / kManifest;
    if (!fs::exists(path)) return out;
    std::stringstream in(csv::read_file(path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ls(line);
        GoldenFixture g;
        std::string tol;
        if (!(ls >> g.name >> g.preset >> g.checksum >> tol) || !tolerance_from(tol))
            throw csv::IoError(path.string() + ":" + std::to_string(lineno) + ": expected 'name preset checksum tolerance'");
        g.tolerance = *tolerance_from(tol);
        out.push_back(g);
    }
    return out;
}

inline void write_manifest(const fs::path& dir, const std::vector<GoldenFixture>& list) {
    std::string s = "# name preset fnv1a64 tolerance\n";
    for (const auto& g : list) s += g.name + " " + g.preset + " " + g.checksum + " " + to_string(g.tolerance) + "\n";
    csv::write_atomic(dir / kManifest, s);
}

/// Targets for the band50 fixtures: ADEV at the listed taus, each to within +-50%.
struct BandTarget {
    double tau;
    double adev;
};

struct FixtureKind {
    std::string name;
    std::string preset;
    Tolerance tolerance;
    // regenerated content from the preset's configuration
    std::function<std::string(const config::RunConfig&)> generate;
    std::vector<BandTarget> targets;  // band50 only
};

inline std::string band_file(const std::vector<BandTarget>& targets) {
    csv::Table t;
    t.header = {"tau_s", "adev_target"};
    for (const auto& b : targets) t.rows.push_back({csv::num(b.tau), csv::num(b.adev)});
    return t.str();
}

inline const std::vector<FixtureKind>& catalogue() {
    using config::RunConfig;
    static const std::vector<FixtureKind> kinds = [] {
        auto adev = [](const RunConfig& c) { return outputs::adev_table(c, outputs::adev_from_psd(c, outputs::chain_psd(c)), "chain").str(); };
        auto psd = [](const RunConfig& c) { return outputs::psd_table(c, outputs::chain_psd(c), "chain").str(); };
        auto canon = [](const RunConfig& c) { return config::canonical(c); };
        auto sweep = [](const RunConfig& c) { return outputs::sweep_table(c).str(); };
        std::vector<FixtureKind> k;
        for (const auto* p : {"fig6b_100_100", "fig6b_120_80", "fig6cd", "fig7_3000km", "exp_260_280"})
            k.push_back({std::string(p) + "_config", p, Tolerance::Exact, canon, {}});
        k.push_back({"fig6b_100_100_adev", "fig6b_100_100", Tolerance::Rel1e10, adev, {}});
        k.push_back({"fig6b_120_80_adev", "fig6b_120_80", Tolerance::Rel1e10, adev, {}});
        k.push_back({"fig6b_100_100_psd", "fig6b_100_100", Tolerance::Rel1e10, psd, {}});
        k.push_back({"exp_260_280_adev", "exp_260_280", Tolerance::Rel1e10, adev, {}});
        k.push_back({"fig6cd_grid", "fig6cd", Tolerance::Rel1e10, sweep, {}});
        k.push_back({"fig7_3000km_chain_vs_cascade", "fig7_3000km", Tolerance::Rel1e10, sweep, {}});
        k.push_back({"fig6b_100_100_target", "fig6b_100_100", Tolerance::Band50, nullptr, {{1.0, 2.7e-14}}});
        k.push_back({"fig6b_120_80_target", "fig6b_120_80", Tolerance::Band50, nullptr, {{1.0, 2.9e-14}}});
        k.push_back({"fig7_3000km_target", "fig7_3000km", Tolerance::Band50, nullptr, {{1.0, 1.5e-13}, {1e4, 1.9e-17}}});
        return k;
    }();
    return kinds;
}

enum class Status { Match, Drift, Created, MissingPreset, Error };

inline std::string to_string(Status s) {
    switch (s) {
        case Status::Match: return "match";
        case Status::Drift: return "drift";
        case Status::Created: return "created";
        case Status::MissingPreset: return "missing-preset";
        case Status::Error: return "error";
    }
    return "?";
}

struct Entry {
    std::string name;
    Status status;
    std::string detail;
};

struct Report {
    std::vector<Entry> entries;

    bool ok() const {
        for (const auto& e : entries)
            if (e.status != Status::Match && e.status != Status::Created) return false;
        return true;
    }

    std::vector<std::string> drifted() const {
        std::vector<std::string> out;
        for (const auto& e : entries)
            if (e.status == Status::Drift) out.push_back(e.name);
        return out;
    }
};

namespace detail {

/// Largest relative difference over numeric cells; text cells must match exactly.
inline std::optional<std::string> compare_numeric(const std::string& stored, const std::string& fresh, double rel) {
    const auto a = csv::parse_table(stored), b = csv::parse_table(fresh);
    if (a.header != b.header) return "header changed";
    if (a.rows.size() != b.rows.size())
        return "row count " + std::to_string(b.rows.size()) + " vs stored " + std::to_string(a.rows.size());
    double worst = 0.0;
    std::size_t where = 0;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        for (std::size_t j = 0; j < a.rows[i].size(); ++j) {
            const double x = a.rows[i][j], y = b.rows[i][j];
            if (std::isnan(x) || std::isnan(y)) {
                if (a.cells[i][j] != b.cells[i][j]) return "row " + std::to_string(i + 1) + " cell text changed";
                continue;
            }
            if (x == y) continue;
            const double d = std::abs(x - y) / std::max(std::abs(x), std::abs(y));
            if (d > worst) worst = d, where = i;
        }
    if (worst > rel) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "relative change %.3e at row %zu", worst, where + 1);
        return std::string(buf);
    }
    return std::nullopt;
}

inline std::optional<std::string> compare_band(const std::string& stored, const config::RunConfig& cfg) {
    const auto t = csv::parse_table(stored);
    const auto ti = t.column("tau_s"), ai = t.column("adev_target");
    std::vector<double> taus;
    for (const auto& r : t.rows) taus.push_back(r[ti]);
    const auto curve = stability::psd_to_adev(outputs::chain_psd(cfg), sweep::rs_adev_carrier(cfg.chain), taus, cfg.f_high);
    std::string bad;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double ratio = curve.sigmas[i] / t.rows[i][ai];
        if (!(ratio >= 0.5 && ratio <= 1.5)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%stau %g s: %.4e vs target %.4e", bad.empty() ? "" : "; ", taus[i], curve.sigmas[i],
                          t.rows[i][ai]);
            bad += buf;
        }
    }
    if (bad.empty()) return std::nullopt;
    return bad;
}

}  // namespace detail

/// Regenerates every catalogued fixture from the presets and compares it with the stored
/// copy under its tolerance class. Missing fixture files are written and reported as created;
/// stored files are never overwritten, so a second run reports the same thing.
inline Report regenerate_fixtures(const fs::path& fixture_dir, const fs::path& preset_dir) {
    Report rep;
    fs::create_directories(fixture_dir);
    auto manifest = read_manifest(fixture_dir);
    auto find = [&](const std::string& name) -> GoldenFixture* {
        for (auto& g : manifest)
            if (g.name == name) return &g;
        return nullptr;
    };
    bool manifest_changed = false;
    std::map<std::string, config::RunConfig> loaded;

    for (const auto& kind : catalogue()) {
        Entry e{kind.name, Status::Match, {}};
        try {
            if (!fs::exists(config::preset_path(preset_dir, kind.preset))) {
                e.status = Status::MissingPreset;
                e.detail = "preset '" + kind.preset + "' not found in " + preset_dir.string();
                rep.entries.push_back(e);
                continue;
            }
            if (!loaded.count(kind.preset)) loaded.emplace(kind.preset, config::load_preset(preset_dir, kind.preset));
            const auto& cfg = loaded.at(kind.preset);
            const auto path = fixture_dir / GoldenFixture{kind.name, kind.preset, {}, kind.tolerance}.file();
            GoldenFixture* g = find(kind.name);

            if (!fs::exists(path)) {
                const std::string content = kind.tolerance == Tolerance::Band50 ? band_file(kind.targets) : kind.generate(cfg);
                csv::write_atomic(path, content);
                const std::string sum = config::hex64(config::fnv1a(content));
                if (g) g->checksum = sum;
                else manifest.push_back({kind.name, kind.preset, sum, kind.tolerance});
                manifest_changed = true;
                e.status = Status::Created;
                rep.entries.push_back(e);
                if (kind.tolerance != Tolerance::Band50) continue;
            }

            const std::string stored = csv::read_file(path);
            const std::string stored_sum = config::hex64(config::fnv1a(stored));
            if (!g) g = find(kind.name);
            if (!g) {
                manifest.push_back({kind.name, kind.preset, stored_sum, kind.tolerance});
                g = &manifest.back();
                manifest_changed = true;
            }
            std::optional<std::string> problem;
            if (g->checksum != stored_sum) problem = "stored file does not match its manifest checksum";
            else if (kind.tolerance == Tolerance::Exact) {
                if (config::hex64(config::fnv1a(kind.generate(cfg))) != g->checksum) problem = "regenerated checksum differs";
            } else if (kind.tolerance == Tolerance::Rel1e10) {
                problem = detail::compare_numeric(stored, kind.generate(cfg), 1e-10);
            } else {
                problem = detail::compare_band(stored, cfg);
            }
            if (problem) {
                if (e.status == Status::Created) rep.entries.pop_back();
                e.status = Status::Drift;
                e.detail = *problem;
                rep.entries.push_back(e);
            } else if (e.status != Status::Created) {
                rep.entries.push_back(e);
            }
        } catch (const std::exception& ex) {
            e.status = Status::Error;
            e.detail = ex.what();
            rep.entries.push_back(e);
        }
    }
    if (manifest_changed) write_manifest(fixture_dir, manifest);
    return rep;
}

inline std::string format(const Report& rep) {
    std::string s;
    for (const auto& e : rep.entries)
        s += e.name + ": " + to_string(e.status) + (e.detail.empty() ? "" : " (" + e.detail + ")") + "\n";
    return s;
}

}  // namespace marsft::fixtures
