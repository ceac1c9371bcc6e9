#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "marsft/core.hpp"
#include "marsft/freqdomain.hpp"
#include "marsft/noise.hpp"
#include "marsft/stability.hpp"
#include "marsft/topology.hpp"

namespace marsft::oracle {

using topology::ChainTopology;

class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Minimum samples per nonzero link delay.
inline constexpr double kMinDelaySamples = 20.0;
/// Largest tolerated delay rounding error, fraction of the delay.
inline constexpr double kMaxDelayRounding = 0.05;
inline constexpr double kMaxSampleRate = 1e8;
/// A VCO phase beyond this is treated as loop divergence, rad.
inline constexpr double kDivergenceBound = 1e6;

struct SimConfig {
    ChainTopology chain;
    double sample_rate = 1e4;  // requested; raised automatically until every delay resolves
    double duration = 1000.0;  // s, including the settle time
    std::uint64_t seed = 1;
    double settle_time = 20.0;  // s, discarded transient

    bool inject_noise = true;
    /// Static phases: per sub-link offsets (empty = zeros) and the standard's phase.
    std::vector<double> static_link_phase;
    double reference_phase = 0.0;

    bool record_mars = true;
    bool record_errors = false;
};

struct SimResult {
    double sample_rate = 0.0;
    std::size_t settle_samples = 0;
    std::vector<double> rs_residual;               // rad at the delivered carrier, after settling
    std::vector<std::vector<double>> mars_outputs;  // [k-1]: station k output minus the standard
    std::vector<std::vector<double>> errors;        // [k-1]: detector error, whole run (record_errors)
    std::vector<std::size_t> delay_samples;
    std::vector<double> final_vco;  // [k-1]: station k's VCO phase at the last sample
};

/// Smallest fs = requested * 2^j that resolves every nonzero delay to >= 20 samples,
/// with delay and half-delay rounding below 5%.
inline double resolve_sample_rate(const ChainTopology& chain, double requested) {
    require(requested > 0.0 && std::isfinite(requested), "oracle: sample rate must be positive");
    double fs = requested;
    for (;;) {
        bool ok = true;
        for (double l : chain.sublink_lengths) {
            const double d = topology::delay(l);
            if (d == 0.0) continue;
            for (double want : {d * fs, 0.5 * d * fs}) {
                const double got = std::round(want);
                if (std::abs(got - want) > kMaxDelayRounding * want || got < 1.0) ok = false;
            }
            if (d * fs < kMinDelaySamples) ok = false;
        }
        if (ok) return fs;
        fs *= 2.0;
        if (fs > kMaxSampleRate)
            throw OracleError("oracle: no sample rate up to " + std::to_string(kMaxSampleRate) +
                              " Hz resolves the link delays");
    }
}

inline void check_config(const SimConfig& cfg) {
    topology::require_valid(cfg.chain);
    require(cfg.chain.station_count() >= 1, "oracle: chain needs at least one station");
    require(cfg.duration > 0.0 && std::isfinite(cfg.duration), "oracle: duration must be positive");
    require(cfg.settle_time >= 0.0 && cfg.duration > cfg.settle_time, "oracle: duration must exceed settle_time");
    require(cfg.static_link_phase.empty() || cfg.static_link_phase.size() == cfg.chain.sublink_lengths.size(),
            "oracle: static_link_phase needs one entry per sub-link");
    // The loop below closes the standard's path only statically.
    require(cfg.chain.rf.is_zero() || !cfg.inject_noise, "oracle: frequency-standard noise is not simulated");
}

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) { return splitmix(seed ^ splitmix(stream + 1)); }

/// Power-of-two history of one station's VCO phase.
class History {
public:
    explicit History(std::size_t depth) {
        std::size_t n = 1;
        while (n < depth + 1) n <<= 1;
        buf_.assign(n, 0.0);
        mask_ = n - 1;
    }
    void push(std::size_t i, double v) { buf_[i & mask_] = v; }
    /// Value at sample i - lag; zero before the start.
    double at(std::size_t i, std::size_t lag) const { return lag > i ? 0.0 : buf_[(i - lag) & mask_]; }

private:
    std::vector<double> buf_;
    std::size_t mask_ = 0;
};

}  // namespace detail

/// Baseband phase-domain simulation of the chain.
///
/// Each sub-link carries one noise process tapped at its midpoint: a traversal that
/// passes the tap at time t picks up p_j(t), in either direction. Station k's detector
/// compares the rear probe (next station's probe, or its own returned from the RS) with
/// the front signal (previous station's probe, or the LS return), plus detector ASE.
/// The PI loop and VCO are integrated with the trapezoidal rule.
inline SimResult simulate(const SimConfig& cfg) {
    check_config(cfg);
    const ChainTopology& chain = cfg.chain;
    const std::size_t n_st = chain.station_count();
    const std::size_t n_links = n_st + 1;

    SimResult res;
    const double fs = resolve_sample_rate(chain, cfg.sample_rate);
    const double dt = 1.0 / fs;
    res.sample_rate = fs;
    const auto total = static_cast<std::size_t>(std::llround(cfg.duration * fs));
    res.settle_samples = static_cast<std::size_t>(std::llround(cfg.settle_time * fs));

    std::vector<std::size_t> dl(n_links), hl(n_links);
    std::size_t max_d = 0;
    for (std::size_t j = 0; j < n_links; ++j) {
        const double d = topology::delay(chain.sublink_lengths[j]) * fs;
        dl[j] = static_cast<std::size_t>(std::llround(d));
        hl[j] = static_cast<std::size_t>(std::llround(0.5 * d));  // upstream end to tap
        max_d = std::max(max_d, dl[j]);
    }
    res.delay_samples = dl;

    // Link noise, offset so that lookups up to 2 max_d in the past stay in range.
    const std::size_t offset = 2 * max_d + 1;
    std::vector<std::vector<double>> link(n_links);
    std::vector<double> link_static(n_links, 0.0);
    if (!cfg.static_link_phase.empty()) link_static = cfg.static_link_phase;
    if (cfg.inject_noise) {
        std::size_t n_fft = noise::kMinSynthesisLength;
        while (n_fft < total + offset) n_fft <<= 1;
        for (std::size_t j = 0; j < n_links; ++j) {
            const double len = chain.sublink_lengths[j];
            if (len == 0.0 || chain.fiber_noise.is_zero()) continue;
            const double wr = chain.carrier_angular();
            link[j] = noise::synthesize_series(
                [&](double f) { return noise::fiber_psd(chain.fiber_noise, len, wr, f); },
                {fs, n_fft, detail::stream_seed(cfg.seed, j), 0.0});
        }
    }
    auto p = [&](std::size_t j, std::size_t i, std::size_t lag) {
        const double s = link_static[j];
        if (link[j].empty()) return s;
        return s + link[j][i + offset - lag];
    };

    const double ase_sigma = cfg.inject_noise ? std::sqrt(noise::ase_detector_psd(chain.floor) * fs / 2.0) : 0.0;
    std::vector<std::mt19937_64> ase_rng;
    for (std::size_t k = 1; k <= n_st; ++k) ase_rng.emplace_back(detail::stream_seed(cfg.seed, 1000 + k));
    std::vector<std::normal_distribution<double>> gauss(n_st);

    // Output floor: one independent white-plus-power-law series per station when enabled.
    std::vector<std::vector<double>> floor_series;
    const bool has_floor = cfg.inject_noise && (noise::floor_psd(chain.floor, 1.0) > 0.0);
    if (has_floor) {
        std::size_t n_fft = noise::kMinSynthesisLength;
        while (n_fft < total) n_fft <<= 1;
        for (std::size_t k = 1; k <= n_st; ++k)
            floor_series.push_back(noise::synthesize_series([&](double f) { return noise::floor_psd(chain.floor, f); },
                                                            {fs, n_fft, detail::stream_seed(cfg.seed, 2000 + k), 0.0}));
    }

    std::vector<double> gain(n_st), ki(n_st), kp(n_st);
    for (std::size_t k = 1; k <= n_st; ++k) {
        const auto& pp = chain.station_pll(k);
        gain[k - 1] = pp.k_pfd * pp.k_vco;
        kp[k - 1] = pp.k_p;
        ki[k - 1] = pp.k_i;
    }

    std::vector<detail::History> hist;
    for (std::size_t k = 0; k < n_st; ++k) hist.emplace_back(2 * max_d + 2);
    std::vector<double> c(n_st, 0.0), integ(n_st, 0.0), err(n_st, 0.0), drive(n_st, 0.0);

    const std::size_t kept = total - res.settle_samples;
    res.rs_residual.reserve(kept);
    if (cfg.record_mars) res.mars_outputs.assign(n_st, {});
    if (cfg.record_mars)
        for (auto& m : res.mars_outputs) m.reserve(kept);
    if (cfg.record_errors) res.errors.assign(n_st, std::vector<double>(total));

    std::vector<double> floor_upto(n_st, 0.0);
    const double r = cfg.reference_phase;
    const std::size_t last = n_st - 1;
    // Detector errors see VCO phases at least one sample old, so a zero-length link
    // takes one sample of delay instead of an algebraic loop.
    auto past = [&](std::size_t k, std::size_t i, std::size_t lag) { return hist[k].at(i, std::max<std::size_t>(lag, 1)); };
    for (std::size_t i = 0; i < total; ++i) {
        for (std::size_t k = 0; k < n_st; ++k) {
            double front;
            if (k == 0) {
                // LS return: standard minus the probe it received, sent back over link 0.
                front = r - past(0, i, 2 * dl[0]) - p(0, i, dl[0] + hl[0]) + p(0, i, dl[0] - hl[0]);
            } else {
                front = past(k - 1, i, dl[k]) + p(k, i, dl[k] - hl[k]);
            }
            double rear;
            if (k == last) {
                rear = past(k, i, 2 * dl[k + 1]) + p(k + 1, i, 2 * dl[k + 1] - hl[k + 1]) + p(k + 1, i, hl[k + 1]);
            } else {
                rear = past(k + 1, i, dl[k + 1]) + p(k + 1, i, hl[k + 1]);
            }
            double e = rear - front;
            if (ase_sigma > 0.0) e += ase_sigma * gauss[k](ase_rng[k]);
            if (cfg.record_errors) res.errors[k][i] = e;

            // PI filter and VCO, trapezoidal rule
            integ[k] += 0.5 * dt * (e + err[k]);
            err[k] = e;
            const double v = kp[k] * e + ki[k] * integ[k];
            c[k] -= 0.5 * dt * gain[k] * (v + drive[k]);
            drive[k] = v;
            if (!(std::abs(c[k]) < kDivergenceBound))
                throw OracleError("oracle: loop divergence at station " + std::to_string(k + 1) + ", t=" +
                                  std::to_string(static_cast<double>(i) * dt) + " s");
        }
        for (std::size_t k = 0; k < n_st; ++k) hist[k].push(i, c[k]);

        if (i < res.settle_samples) continue;
        if (has_floor) {
            double floor_acc = 0.0;
            for (std::size_t k = 0; k < n_st; ++k) {
                floor_acc += floor_series[k][i];
                floor_upto[k] = chain.floor.scale_with_stations ? floor_acc : floor_series[k][i];
            }
        }
        // Delivered probe at half the standard's frequency.
        double rs = hist[last].at(i, dl[n_st]) + p(n_st, i, dl[n_st] - hl[n_st]) - r / 2.0;
        if (has_floor) rs += floor_upto[last];
        res.rs_residual.push_back(rs);
        if (cfg.record_mars) {
            for (std::size_t k = 0; k < n_st; ++k) {
                double out;
                if (k == last)
                    out = c[k] + hist[k].at(i, 2 * dl[k + 1]) + p(k + 1, i, 2 * dl[k + 1] - hl[k + 1]) +
                          p(k + 1, i, hl[k + 1]) - r;
                else
                    out = c[k] + hist[k + 1].at(i, dl[k + 1]) + p(k + 1, i, hl[k + 1]) - r;
                if (has_floor) out += floor_upto[k];
                res.mars_outputs[k].push_back(out);
            }
        }
    }
    res.final_vco = c;
    return res;
}

struct StationLock {
    std::optional<double> lock_time;  // s; empty when the station never locks
    double final_abs_error = 0.0;
    double peak_abs_error = 0.0;
    double rms_error_after_lock = 0.0;
};

struct LockReport {
    std::vector<StationLock> stations;
    double threshold = 0.0;
    std::optional<std::string> divergence;  // set when the run blew up; no station counts as locked

    bool all_locked() const {
        return std::all_of(stations.begin(), stations.end(), [](const StationLock& s) { return s.lock_time.has_value(); });
    }
};

/// Lock time per station: first instant after which |detector error| stays below the threshold.
/// A station that is still above the threshold at the end of the run never locked.
inline LockReport lock_report(SimConfig cfg, double threshold = 1e-9) {
    require(threshold > 0.0, "lock_report: threshold must be positive");
    cfg.record_errors = true;
    cfg.record_mars = false;
    cfg.settle_time = 0.0;
    LockReport rep;
    rep.threshold = threshold;
    SimResult sim;
    try {
        sim = simulate(cfg);
    } catch (const OracleError& e) {
        rep.divergence = e.what();
        rep.stations.assign(cfg.chain.station_count(), StationLock{});
        return rep;
    }
    for (const auto& e : sim.errors) {
        StationLock s;
        std::size_t first_ok = e.size();
        for (std::size_t i = e.size(); i-- > 0;) {
            if (std::abs(e[i]) >= threshold) break;
            first_ok = i;
        }
        for (double v : e) s.peak_abs_error = std::max(s.peak_abs_error, std::abs(v));
        s.final_abs_error = std::abs(e.back());
        if (first_ok < e.size()) {
            s.lock_time = static_cast<double>(first_ok) / sim.sample_rate;
            double acc = 0.0;
            for (std::size_t i = first_ok; i < e.size(); ++i) acc += e[i] * e[i];
            s.rms_error_after_lock = std::sqrt(acc / static_cast<double>(e.size() - first_ok));
        }
        rep.stations.push_back(s);
    }
    return rep;
}

/// True when a noiseless run from the configured static offsets neither diverges
/// nor ends (last tenth) with a larger detector error than its first tenth. Without offsets the
/// standard's phase is kicked to 1 rad so there is a transient to watch.
inline bool loop_is_stable(SimConfig cfg) {
    const bool quiet = cfg.reference_phase == 0.0 &&
                       std::all_of(cfg.static_link_phase.begin(), cfg.static_link_phase.end(), [](double v) { return v == 0.0; });
    if (quiet) cfg.reference_phase = 1.0;
    cfg.inject_noise = false;
    cfg.record_errors = true;
    cfg.record_mars = false;
    cfg.settle_time = 0.0;
    try {
        const auto sim = simulate(cfg);
        for (const auto& e : sim.errors) {
            double head = 0.0;
            for (std::size_t i = 0; i < e.size() / 10; ++i) head = std::max(head, std::abs(e[i]));
            double tail = 0.0;
            for (std::size_t i = e.size() - e.size() / 10; i < e.size(); ++i) tail = std::max(tail, std::abs(e[i]));
            if (!(tail < head)) return false;
        }
        return true;
    } catch (const OracleError&) {
        return false;
    }
}

/// Largest common scale of (k_p, k_i) that keeps the loop stable, by bisection in log space.
/// Expects a stable loop at `lo` and an unstable one at `hi`.
inline double max_stable_gain_scale(const SimConfig& base, double lo = 1e-2, double hi = 1e3, int iterations = 24) {
    require(lo > 0.0 && hi > lo, "max_stable_gain_scale: need 0 < lo < hi");
    auto stable_at = [&](double s) {
        SimConfig cfg = base;
        for (auto& pp : cfg.chain.pll) pp = pp.with_gain_scale(s);
        return loop_is_stable(cfg);
    };
    require(stable_at(lo), "max_stable_gain_scale: loop unstable at the lower bound");
    if (stable_at(hi)) return hi;
    for (int it = 0; it < iterations; ++it) {
        const double mid = std::sqrt(lo * hi);
        (stable_at(mid) ? lo : hi) = mid;
    }
    return lo;
}

struct SeedStats {
    double tau = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    double std_error = 0.0;
    double predicted = 0.0;

    double z_score() const { return std_error > 0.0 ? (mean - predicted) / std_error : 0.0; }
};

/// ADEV of the RS residual over several seeds against the frequency-domain prediction
/// integrated up to the simulation's Nyquist frequency.
inline std::vector<SeedStats> monte_carlo_rs_adev(const SimConfig& base, std::span<const std::uint64_t> seeds,
                                                  std::span<const double> taus, double adev_carrier) {
    require(seeds.size() >= 2, "monte_carlo_rs_adev: need at least two seeds");
    std::vector<std::vector<double>> per_tau(taus.size());
    double fs = 0.0;
    for (std::uint64_t seed : seeds) {
        SimConfig cfg = base;
        cfg.seed = seed;
        cfg.record_mars = false;
        const auto sim = simulate(cfg);
        fs = sim.sample_rate;
        const auto curve = stability::adev_from_series(sim.rs_residual, sim.sample_rate, adev_carrier, taus);
        for (std::size_t t = 0; t < taus.size(); ++t) per_tau[t].push_back(curve.sigmas[t]);
    }

    const double f_high = fs / 2.0;
    const auto grid = log_grid(std::min(stability::required_low_frequency(taus), 1e-4), f_high, 200.0);
    const auto psd = freqdomain::residual_psd(base.chain, grid);
    const auto pred = stability::psd_to_adev(psd, adev_carrier, taus, f_high);

    std::vector<SeedStats> out;
    for (std::size_t t = 0; t < taus.size(); ++t) {
        SeedStats s;
        s.tau = taus[t];
        const auto& v = per_tau[t];
        for (double x : v) s.mean += x;
        s.mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(var / static_cast<double>(v.size() - 1));
        s.std_error = s.stddev / std::sqrt(static_cast<double>(v.size()));
        s.predicted = pred.sigmas[t];
        out.push_back(s);
    }
    return out;
}

}  // namespace marsft::oracle
