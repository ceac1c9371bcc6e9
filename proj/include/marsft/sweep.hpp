#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "marsft/core.hpp"
#include "marsft/freqdomain.hpp"
#include "marsft/stability.hpp"
#include "marsft/topology.hpp"

namespace marsft::sweep {

using topology::ChainTopology;

/// The RS residual is the half-frequency probe, so its ADEV is referred to carrier/2.
inline double rs_adev_carrier(const ChainTopology& chain) { return chain.carrier_freq / 2.0; }

struct SweepSpec {
    ChainTopology base;  // loop, noise and floor settings; lengths are overwritten per cell
    std::vector<double> totals_km{50.0, 100.0, 150.0, 200.0, 250.0, 300.0};
    std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};  // front fraction
    std::vector<double> taus{1.0, 1e4};
    GridSpec grid{};
    double f_high = stability::kDefaultFHigh;

    void check() const {
        require(!totals_km.empty(), "sweep: no total lengths");
        require(!ratios.empty(), "sweep: no ratios");
        for (double t : totals_km) require(t > 0.0 && std::isfinite(t), "sweep: total length must be positive");
        for (double r : ratios) require(r > 0.0 && r < 1.0, "sweep: ratio " + std::to_string(r) + " outside (0, 1)");
        require(!taus.empty(), "sweep: no averaging times");
        require(base.station_count() <= 1, "sweep: ratio grid needs a single-station template");
    }
};

struct GridRow {
    double total_km = 0.0;
    double ratio = 0.0;
    std::vector<double> adev;  // one per spec tau
    std::optional<std::string> error;
};

/// Residual ADEV of one configuration.
inline AdevCurve rs_adev(const ChainTopology& chain, std::span<const double> taus, const GridSpec& grid = {},
                         double f_high = stability::kDefaultFHigh) {
    const auto f = grid.build();
    return stability::psd_to_adev(freqdomain::residual_psd(chain, f), rs_adev_carrier(chain), taus, f_high);
}

inline GridRow evaluate_cell(const SweepSpec& spec, double total_km, double ratio) {
    GridRow row{total_km, ratio, {}, std::nullopt};
    try {
        ChainTopology c = spec.base;
        c.sublink_lengths = {total_km * ratio, total_km * (1.0 - ratio)};
        row.adev = rs_adev(c, spec.taus, spec.grid, spec.f_high).sigmas;
    } catch (const std::exception& e) {
        row.error = e.what();
        row.adev.assign(spec.taus.size(), std::numeric_limits<double>::quiet_NaN());
    }
    return row;
}

/// Every (total, ratio) cell; failed cells keep their error and NaN metrics.
/// Rows come back sorted by total then ratio whatever the axis order.
inline std::vector<GridRow> ratio_length_grid(const SweepSpec& spec) {
    spec.check();
    std::vector<GridRow> rows;
    rows.reserve(spec.totals_km.size() * spec.ratios.size());
    for (double t : spec.totals_km)
        for (double r : spec.ratios) rows.push_back(evaluate_cell(spec, t, r));
    std::sort(rows.begin(), rows.end(), [](const GridRow& a, const GridRow& b) {
        return a.total_km != b.total_km ? a.total_km < b.total_km : a.ratio < b.ratio;
    });
    return rows;
}

struct ChainVsCascade {
    AdevCurve chain;
    AdevCurve cascade;
    bool chain_not_worse_at_1s = false;  // the comparison the scheme is judged on
};

/// Equally spaced n_mars chain against n_stages independent compensated spans over the same length.
inline ChainVsCascade chain_vs_cascade(const ChainTopology& base, double total_km, std::size_t n_mars,
                                       std::size_t n_stages, std::span<const double> taus, const GridSpec& grid = {},
                                       double f_high = stability::kDefaultFHigh) {
    require(n_mars >= 1, "chain_vs_cascade: need at least one station");
    require(n_stages >= 1, "chain_vs_cascade: need at least one cascade stage");
    ChainTopology c = base;
    c.sublink_lengths.assign(n_mars + 1, total_km / static_cast<double>(n_mars + 1));
    if (c.pll.size() != 1) c.pll = {base.pll.front()};
    const auto f = grid.build();
    const double nu = rs_adev_carrier(c);

    ChainVsCascade out;
    out.chain = stability::psd_to_adev(freqdomain::residual_psd(c, f), nu, taus, f_high);
    out.cascade = stability::psd_to_adev(freqdomain::cascaded_psd(c, total_km, n_stages, f), nu, taus, f_high);
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (std::abs(taus[i] - 1.0) < 1e-12) out.chain_not_worse_at_1s = out.chain.sigmas[i] <= out.cascade.sigmas[i];
    return out;
}

}  // namespace marsft::sweep
