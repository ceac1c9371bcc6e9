#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "marsft/core.hpp"
#include "marsft/oracle.hpp"
#include "marsft/sweep.hpp"
#include "marsft/topology.hpp"

namespace marsft::config {

/// Bad config text, unknown key, unreadable file. The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SweepKind { RatioLength, ChainVsCascade };

struct RunConfig {
    topology::ChainTopology chain = topology::ChainTopology::single_mars(200.0, 0.5);
    GridSpec grid{};
    std::vector<double> taus{1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
    double f_high = stability::kDefaultFHigh;
    std::size_t cascade_stages = 0;  // 0: one stage per sub-link

    // oracle
    double sample_rate = 1e4;
    double duration = 1000.0;
    double settle_time = 20.0;
    std::uint64_t seed = 1;
    std::size_t seeds = 1;
    bool inject_noise = true;
    std::vector<double> oracle_taus{0.1, 1.0, 10.0};

    // sweep
    SweepKind sweep_kind = SweepKind::RatioLength;
    std::vector<double> sweep_totals_km{50.0, 100.0, 150.0, 200.0, 250.0, 300.0};
    std::vector<double> sweep_ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    double cvc_total_km = 3000.0;
    std::size_t cvc_n_mars = 29;
    std::size_t cvc_stages = 30;

    std::string out_dir = ".";

    oracle::SimConfig sim_config() const {
        oracle::SimConfig s;
        s.chain = chain;
        s.sample_rate = sample_rate;
        s.duration = duration;
        s.settle_time = settle_time;
        s.seed = seed;
        s.inject_noise = inject_noise;
        return s;
    }

    sweep::SweepSpec sweep_spec() const {
        sweep::SweepSpec s;
        s.base = chain;
        if (s.base.station_count() != 1) s.base.sublink_lengths = {1.0, 1.0};
        if (s.base.pll.size() != 1) s.base.pll = {chain.pll.front()};
        s.totals_km = sweep_totals_km;
        s.ratios = sweep_ratios;
        s.taus = taus;
        s.grid = grid;
        s.f_high = f_high;
        return s;
    }

    std::size_t effective_cascade_stages() const {
        return cascade_stages ? cascade_stages : chain.sublink_lengths.size();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(x))
        throw ConfigError(key + ": expected a number, got '" + t + "'");
    return x;
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline std::size_t to_count(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x < 0 || x != std::floor(x) || x > 1e15) throw ConfigError(key + ": expected a non-negative integer");
    return static_cast<std::size_t>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "true" || t == "1") return true;
    if (t == "false" || t == "0") return false;
    throw ConfigError(key + ": expected true or false, got '" + t + "'");
}

inline std::string fmt(double x) {
    if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

inline void set_coeffs(noise::PowerLawCoeffs& c, const std::string& which, double x) {
    if (which == "h_m3") c.h_m3 = x;
    else if (which == "h_m2") c.h_m2 = x;
    else if (which == "h_m1") c.h_m1 = x;
    else c.h_0 = x;
}

inline const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> m;
        m["chain.sublinks_km"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.sublink_lengths = to_list(k, v); };
        m["chain.carrier_hz"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.carrier_freq = to_double(k, v); };
        m["pll.kp"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.pll.front().k_p = to_double(k, v); };
        m["pll.ki"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.pll.front().k_i = to_double(k, v); };
        m["pll.kpfd"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.pll.front().k_pfd = to_double(k, v); };
        m["pll.kvco"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.pll.front().k_vco = to_double(k, v); };
        for (const char* h : {"h_m3", "h_m2", "h_m1", "h_0"}) {
            const std::string name = h;
            m["noise." + name] = [name](RunConfig& c, const std::string& k, const std::string& v) {
                set_coeffs(c.chain.fiber_noise, name, to_double(k, v));
            };
            m["floor." + name] = [name](RunConfig& c, const std::string& k, const std::string& v) {
                set_coeffs(c.chain.floor.extra, name, to_double(k, v));
            };
            m["rf." + name] = [name](RunConfig& c, const std::string& k, const std::string& v) {
                if (!c.chain.rf.psd) c.chain.rf.psd = noise::PowerLawCoeffs{};
                set_coeffs(*c.chain.rf.psd, name, to_double(k, v));
            };
        }
        m["floor.white_dbc"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.floor.white_ssb_dbc = to_double(k, v); };
        m["floor.ase_dbc"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.floor.ase_ssb_dbc = to_double(k, v); };
        m["floor.ase_coupling_db"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.floor.ase_coupling_db = to_double(k, v); };
        m["floor.per_station"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.chain.floor.scale_with_stations = to_bool(k, v); };
        m["grid.fmin"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.fmin = to_double(k, v); };
        m["grid.fmax"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.fmax = to_double(k, v); };
        m["grid.ppd"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.grid.per_decade = to_double(k, v); };
        m["adev.taus"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.taus = to_list(k, v); };
        m["adev.f_high"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.f_high = to_double(k, v); };
        m["psd.cascade_stages"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.cascade_stages = to_count(k, v); };
        m["oracle.sample_rate"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.sample_rate = to_double(k, v); };
        m["oracle.duration"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.duration = to_double(k, v); };
        m["oracle.settle"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.settle_time = to_double(k, v); };
        m["oracle.seed"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = to_count(k, v); };
        m["oracle.seeds"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.seeds = to_count(k, v); };
        m["oracle.noise"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.inject_noise = to_bool(k, v); };
        m["oracle.taus"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.oracle_taus = to_list(k, v); };
        m["sweep.kind"] = [](RunConfig& c, const std::string& k, const std::string& v) {
            const std::string t = trim(v);
            if (t == "ratio_length") c.sweep_kind = SweepKind::RatioLength;
            else if (t == "chain_vs_cascade") c.sweep_kind = SweepKind::ChainVsCascade;
            else throw ConfigError(k + ": expected ratio_length or chain_vs_cascade, got '" + t + "'");
        };
        m["sweep.totals_km"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep_totals_km = to_list(k, v); };
        m["sweep.ratios"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.sweep_ratios = to_list(k, v); };
        m["sweep.total_km"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.cvc_total_km = to_double(k, v); };
        m["sweep.n_mars"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.cvc_n_mars = to_count(k, v); };
        m["sweep.stages"] = [](RunConfig& c, const std::string& k, const std::string& v) { c.cvc_stages = to_count(k, v); };
        m["output.dir"] = [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = trim(v); };
        return m;
    }();
    return table;
}

// station.K.kp etc: per-station loop overrides, K in 1..N
inline bool set_station(RunConfig& c, const std::string& key, const std::string& value,
                        std::map<std::size_t, std::map<std::string, double>>& pending) {
    if (key.rfind("station.", 0) != 0) return false;
    const auto dot = key.find('.', 8);
    if (dot == std::string::npos) return false;
    const std::string idx = key.substr(8, dot - 8), field = key.substr(dot + 1);
    if (field != "kp" && field != "ki" && field != "kpfd" && field != "kvco") return false;
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos) return false;
    pending[std::stoul(idx)][field] = to_double(key, value);
    (void)c;
    return true;
}

}  // namespace detail

/// Parses `key = value` lines. `#` starts a comment line. Later files or lines may not
/// repeat a key. Unknown keys are rejected with their line number.
inline RunConfig parse(const std::string& text, const std::string& origin = "<config>", RunConfig base = {}) {
    RunConfig c = std::move(base);
    std::map<std::string, int> seen;
    std::map<std::size_t, std::map<std::string, double>> stations;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        const std::string key = detail::trim(t.substr(0, eq)), value = t.substr(eq + 1);
        if (seen.count(key)) throw ConfigError(where + "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
        seen[key] = lineno;
        try {
            if (detail::set_station(c, key, value, stations)) continue;
            const auto& table = detail::setters();
            const auto it = table.find(key);
            if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
            it->second(c, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    if (!stations.empty()) {
        const std::size_t n = c.chain.station_count();
        for (const auto& [k, fields] : stations)
            if (k < 1 || k > n)
                throw ConfigError(origin + ": station." + std::to_string(k) + " does not exist (chain has " + std::to_string(n) +
                                  " stations)");
        const pll::PllParams shared = c.chain.pll.front();
        c.chain.pll.assign(n, shared);
        for (const auto& [k, fields] : stations) {
            auto& p = c.chain.pll[k - 1];
            for (const auto& [f, x] : fields) {
                if (f == "kp") p.k_p = x;
                else if (f == "ki") p.k_i = x;
                else if (f == "kpfd") p.k_pfd = x;
                else p.k_vco = x;
            }
        }
    }
    if (auto err = topology::validate(c.chain)) throw ConfigError(origin + ": " + err->field + ": " + err->message);
    return c;
}

inline RunConfig load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path.string());
}

/// Every effective setting, one `key = value` per line, in a fixed order.
/// Parsing the dump gives back the same configuration.
inline std::string canonical(const RunConfig& c) {
    using detail::fmt;
    std::ostringstream o;
    const auto& ch = c.chain;
    o << "chain.sublinks_km = " << fmt(ch.sublink_lengths) << "\n";
    o << "chain.carrier_hz = " << fmt(ch.carrier_freq) << "\n";
    const auto& p = ch.pll.front();
    o << "pll.kp = " << fmt(p.k_p) << "\npll.ki = " << fmt(p.k_i) << "\npll.kpfd = " << fmt(p.k_pfd)
      << "\npll.kvco = " << fmt(p.k_vco) << "\n";
    if (ch.pll.size() > 1)
        for (std::size_t k = 0; k < ch.pll.size(); ++k) {
            const auto& q = ch.pll[k];
            const std::string s = "station." + std::to_string(k + 1) + ".";
            o << s << "kp = " << fmt(q.k_p) << "\n" << s << "ki = " << fmt(q.k_i) << "\n" << s << "kpfd = " << fmt(q.k_pfd)
              << "\n" << s << "kvco = " << fmt(q.k_vco) << "\n";
        }
    auto coeffs = [&](const std::string& pre, const noise::PowerLawCoeffs& h) {
        o << pre << "h_m3 = " << fmt(h.h_m3) << "\n" << pre << "h_m2 = " << fmt(h.h_m2) << "\n" << pre << "h_m1 = " << fmt(h.h_m1)
          << "\n" << pre << "h_0 = " << fmt(h.h_0) << "\n";
    };
    coeffs("noise.", ch.fiber_noise);
    o << "floor.white_dbc = " << fmt(ch.floor.white_ssb_dbc) << "\n";
    coeffs("floor.", ch.floor.extra);
    o << "floor.ase_dbc = " << fmt(ch.floor.ase_ssb_dbc) << "\nfloor.ase_coupling_db = " << fmt(ch.floor.ase_coupling_db)
      << "\nfloor.per_station = " << (ch.floor.scale_with_stations ? "true" : "false") << "\n";
    if (ch.rf.psd) coeffs("rf.", *ch.rf.psd);
    o << "grid.fmin = " << fmt(c.grid.fmin) << "\ngrid.fmax = " << fmt(c.grid.fmax) << "\ngrid.ppd = " << fmt(c.grid.per_decade)
      << "\n";
    o << "adev.taus = " << fmt(c.taus) << "\nadev.f_high = " << fmt(c.f_high) << "\n";
    o << "psd.cascade_stages = " << c.cascade_stages << "\n";
    o << "oracle.sample_rate = " << fmt(c.sample_rate) << "\noracle.duration = " << fmt(c.duration)
      << "\noracle.settle = " << fmt(c.settle_time) << "\noracle.seed = " << c.seed << "\noracle.seeds = " << c.seeds
      << "\noracle.noise = " << (c.inject_noise ? "true" : "false") << "\noracle.taus = " << fmt(c.oracle_taus) << "\n";
    o << "sweep.kind = " << (c.sweep_kind == SweepKind::RatioLength ? "ratio_length" : "chain_vs_cascade") << "\n";
    o << "sweep.totals_km = " << fmt(c.sweep_totals_km) << "\nsweep.ratios = " << fmt(c.sweep_ratios)
      << "\nsweep.total_km = " << fmt(c.cvc_total_km) << "\nsweep.n_mars = " << c.cvc_n_mars << "\nsweep.stages = " << c.cvc_stages
      << "\n";
    // output.dir is where results go, not what they are; it stays out of the fingerprint
    return o.str();
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

inline std::string fingerprint(const RunConfig& c) { return hex64(fnv1a(canonical(c))); }

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig6b_100_100", "fig6b_120_80", "fig6cd", "fig7_3000km", "exp_260_280"};
    return names;
}

inline std::filesystem::path preset_path(const std::filesystem::path& dir, const std::string& name) {
    return dir / (name + ".cfg");
}

inline RunConfig load_preset(const std::filesystem::path& dir, const std::string& name) {
    const auto p = preset_path(dir, name);
    if (!std::filesystem::exists(p)) throw ConfigError("unknown preset '" + name + "' (no " + p.string() + ")");
    return load(p);
}

/// FMIN:FMAX:PPD
inline GridSpec parse_grid(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("--grid: expected FMIN:FMAX:PPD, got '" + s + "'");
    GridSpec g{detail::to_double("--grid", parts[0]), detail::to_double("--grid", parts[1]), detail::to_double("--grid", parts[2])};
    if (!(g.fmin > 0 && g.fmax > g.fmin && g.per_decade >= 1)) throw ConfigError("--grid: need 0 < FMIN < FMAX and PPD >= 1");
    return g;
}

inline std::vector<double> parse_taus(const std::string& s) {
    auto t = detail::to_list("--taus", s);
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!(t[i] > 0) || (i && t[i] <= t[i - 1])) throw ConfigError("--taus: need positive, strictly increasing values");
    return t;
}

}  // namespace marsft::config
