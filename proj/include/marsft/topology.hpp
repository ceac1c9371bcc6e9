#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marsft/core.hpp"
#include "marsft/noise.hpp"
#include "marsft/pll.hpp"

namespace marsft::topology {

/// LS -> MARS_1 -> ... -> MARS_N -> RS. Sub-link k joins station k and k+1
/// (station 0 is the LS, station N+1 the RS).
struct ChainTopology {
    double carrier_freq = 2.0e9;              // Hz, frequency standard
    std::vector<double> sublink_lengths;      // km, N+1 entries
    std::vector<pll::PllParams> pll{pll::PllParams{}};  // one shared entry, or one per station
    noise::PowerLawCoeffs fiber_noise = noise::PowerLawCoeffs::fiber_defaults();
    noise::NoiseFloorSpec floor{};
    noise::RfSourceSpec rf{};

    std::size_t station_count() const noexcept {
        return sublink_lengths.empty() ? 0 : sublink_lengths.size() - 1;
    }

    double carrier_angular() const noexcept { return kTwoPi * carrier_freq; }

    double total_length() const {
        double s = 0;
        for (double l : sublink_lengths) s += l;
        return s;
    }

    /// Loop parameters for 1-based station k.
    const pll::PllParams& station_pll(std::size_t k) const {
        require(k >= 1 && k <= station_count(), "station index out of range: " + std::to_string(k));
        return pll.size() == 1 ? pll.front() : pll.at(k - 1);
    }

    /// Equal-length chain of n_mars stations over total_km.
    static ChainTopology equal_spacing(double total_km, std::size_t n_mars) {
        ChainTopology c;
        c.sublink_lengths.assign(n_mars + 1, total_km / static_cast<double>(n_mars + 1));
        return c;
    }

    /// Two sub-links with front fraction `ratio` of total_km.
    static ChainTopology single_mars(double total_km, double ratio) {
        ChainTopology c;
        c.sublink_lengths = {total_km * ratio, total_km * (1.0 - ratio)};
        return c;
    }
};

/// One-way propagation delay, s.
inline double delay(double length_km) {
    require(length_km >= 0.0, "delay: negative length");
    return 1000.0 * length_km / kFiberVelocity;
}

struct ValidationError {
    std::string field;
    std::string message;
};

/// Checks chain invariants; never throws.
inline std::optional<ValidationError> validate(const ChainTopology& chain) {
    if (chain.sublink_lengths.empty()) return ValidationError{"sublink_lengths", "no sub-links"};
    for (std::size_t i = 0; i < chain.sublink_lengths.size(); ++i) {
        const double l = chain.sublink_lengths[i];
        if (!std::isfinite(l) || l < 0.0)
            return ValidationError{"sublink_lengths[" + std::to_string(i) + "]",
                                   "sub-link " + std::to_string(i) + " has invalid length " + std::to_string(l)};
    }
    if (!(chain.carrier_freq > 0.0) || !std::isfinite(chain.carrier_freq))
        return ValidationError{"carrier_freq", "carrier frequency must be positive"};
    const std::size_t n = chain.station_count();
    if (chain.pll.empty()) return ValidationError{"pll", "no loop parameters"};
    if (chain.pll.size() != 1 && chain.pll.size() != n)
        return ValidationError{"pll", "expected 1 shared or " + std::to_string(n) + " per-station loop parameter sets, got " +
                                          std::to_string(chain.pll.size())};
    for (std::size_t i = 0; i < chain.pll.size(); ++i) {
        try {
            chain.pll[i].check();
        } catch (const ModelError& e) {
            return ValidationError{"pll[" + std::to_string(i) + "]", e.what()};
        }
    }
    try {
        chain.fiber_noise.check();
    } catch (const ModelError& e) {
        return ValidationError{"fiber_noise", e.what()};
    }
    try {
        chain.floor.check();
    } catch (const ModelError& e) {
        return ValidationError{"floor", e.what()};
    }
    if (chain.rf.psd) {
        try {
            chain.rf.psd->check();
        } catch (const ModelError& e) {
            return ValidationError{"rf", e.what()};
        }
    }
    return std::nullopt;
}

inline void require_valid(const ChainTopology& chain) {
    if (auto err = validate(chain)) throw ModelError("invalid chain: " + err->field + ": " + err->message);
}

}  // namespace marsft::topology
