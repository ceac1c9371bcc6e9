#pragma once

#include <string>
#include <vector>

#include "marsft/config.hpp"
#include "marsft/csv.hpp"
#include "marsft/freqdomain.hpp"
#include "marsft/oracle.hpp"
#include "marsft/stability.hpp"
#include "marsft/sweep.hpp"

// Result tables for each product of a run configuration. Shared by the CLI and the
// fixture regenerator so both write byte-identical files.
namespace marsft::outputs {

using config::RunConfig;

inline void stamp(csv::Table& t, const RunConfig& cfg, const std::string& product) {
    t.comments.insert(t.comments.begin(), {{"product", product}, {"config", config::fingerprint(cfg)}});
}

inline std::string tau_label(double tau) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "adev_%gs", tau);
    return buf;
}

inline SpectralDensity chain_psd(const RunConfig& cfg) { return freqdomain::residual_psd(cfg.chain, cfg.grid.build()); }

inline SpectralDensity free_running_psd(const RunConfig& cfg) {
    return freqdomain::free_running_psd(cfg.chain, cfg.grid.build());
}

inline SpectralDensity cascaded_psd(const RunConfig& cfg) {
    return freqdomain::cascaded_psd(cfg.chain, cfg.chain.total_length(), cfg.effective_cascade_stages(), cfg.grid.build());
}

inline csv::Table psd_table(const RunConfig& cfg, const SpectralDensity& psd, const std::string& variant) {
    auto t = csv::psd_table(psd, true);
    stamp(t, cfg, "psd/" + variant);
    return t;
}

/// Residual ADEV at the remote site, from a PSD on the configured grid.
inline AdevCurve adev_from_psd(const RunConfig& cfg, const SpectralDensity& psd) {
    return stability::psd_to_adev(psd, sweep::rs_adev_carrier(cfg.chain), cfg.taus, cfg.f_high);
}

inline csv::Table adev_table(const RunConfig& cfg, const AdevCurve& curve, const std::string& source) {
    auto t = csv::adev_table(curve);
    stamp(t, cfg, "adev/" + source);
    return t;
}

inline csv::Table ratio_grid_table(const RunConfig& cfg) {
    const auto spec = cfg.sweep_spec();
    const auto rows = sweep::ratio_length_grid(spec);
    csv::Table t;
    t.header = {"total_km", "ratio"};
    for (double tau : spec.taus) t.header.push_back(tau_label(tau));
    t.header.push_back("error");
    for (const auto& r : rows) {
        std::vector<std::string> cells{csv::num(r.total_km), csv::num(r.ratio)};
        for (double a : r.adev) cells.push_back(r.error ? std::string{} : csv::num(a));
        std::string err = r.error.value_or("");
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        cells.push_back(err);
        t.rows.push_back(std::move(cells));
    }
    stamp(t, cfg, "sweep/ratio_length");
    return t;
}

inline csv::Table chain_vs_cascade_table(const RunConfig& cfg) {
    const auto cmp = sweep::chain_vs_cascade(cfg.chain, cfg.cvc_total_km, cfg.cvc_n_mars, cfg.cvc_stages, cfg.taus, cfg.grid,
                                             cfg.f_high);
    csv::Table t;
    t.header = {"tau_s", "adev_chain", "adev_cascade"};
    for (std::size_t i = 0; i < cmp.chain.size(); ++i)
        t.rows.push_back({csv::num(cmp.chain.taus[i]), csv::num(cmp.chain.sigmas[i]), csv::num(cmp.cascade.sigmas[i])});
    t.comments.push_back({"chain_not_worse_at_1s", cmp.chain_not_worse_at_1s ? "yes" : "no"});
    stamp(t, cfg, "sweep/chain_vs_cascade");
    return t;
}

inline csv::Table sweep_table(const RunConfig& cfg) {
    return cfg.sweep_kind == config::SweepKind::RatioLength ? ratio_grid_table(cfg) : chain_vs_cascade_table(cfg);
}

/// Every `decimate`-th sample of the remote-site residual and station outputs after settling.
inline csv::Table series_table(const RunConfig& cfg, const oracle::SimResult& sim, std::size_t decimate) {
    csv::Table t;
    t.header = {"t_s", "rs_residual_rad"};
    for (std::size_t k = 0; k < sim.mars_outputs.size(); ++k) t.header.push_back("mars" + std::to_string(k + 1) + "_rad");
    for (std::size_t i = 0; i < sim.rs_residual.size(); i += decimate) {
        std::vector<std::string> r{csv::num(static_cast<double>(i) / sim.sample_rate), csv::num(sim.rs_residual[i])};
        for (const auto& m : sim.mars_outputs) r.push_back(csv::num(m[i]));
        t.rows.push_back(std::move(r));
    }
    t.comments.push_back({"sample_rate_hz", csv::num(sim.sample_rate)});
    t.comments.push_back({"decimation", std::to_string(decimate)});
    stamp(t, cfg, "oracle/series");
    return t;
}

}  // namespace marsft::outputs
