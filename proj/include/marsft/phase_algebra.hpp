#pragma once

#include <span>
#include <variant>
#include <vector>

#include "marsft/core.hpp"

namespace marsft::phase_algebra {

/// Static (DC) phases of a locked chain. phi_c[k-1] is station k's VCO phase.
struct StaticPhaseState {
    double phi_r = 0.0;
    std::vector<double> phi_p;  // N+1 sub-links
    std::vector<double> phi_c;  // N stations

    std::size_t stations() const noexcept { return phi_c.size(); }
};

/// Locks every station: the last one settles at phi_r/2 - phi_pN, and each earlier
/// station satisfies phi_ck = phi_r - phi_c(k+1) - phi_pk.
inline StaticPhaseState solve_static_locks(double phi_r, std::span<const double> phi_p) {
    require(phi_p.size() >= 2, "solve_static_locks: need at least two sub-links (one station)");
    StaticPhaseState s;
    s.phi_r = phi_r;
    s.phi_p.assign(phi_p.begin(), phi_p.end());
    const std::size_t n = phi_p.size() - 1;
    s.phi_c.resize(n);
    s.phi_c[n - 1] = phi_r / 2.0 - phi_p[n];
    for (std::size_t k = n - 1; k >= 1; --k) s.phi_c[k - 1] = phi_r - s.phi_c[k] - phi_p[k];
    return s;
}

struct RemoteSite {};
struct Station {
    std::size_t index;  // 1-based
};
using OutputPoint = std::variant<RemoteSite, Station>;

/// Phase of the recovered standard, in units of the standard's frequency.
///
/// RS: the delivered probe phi_cN + phi_pN at half the standard's frequency, doubled.
/// Station k < N: own probe mixed with the backward probe, phi_ck + phi_c(k+1) + phi_pk.
/// Station N: own probe mixed with its probe returned from the RS, 2 phi_cN + 2 phi_pN.
inline double recovered_output_phase(const StaticPhaseState& s, const OutputPoint& where) {
    const std::size_t n = s.stations();
    require(n >= 1 && s.phi_p.size() == n + 1, "recovered_output_phase: inconsistent state");
    if (std::holds_alternative<RemoteSite>(where)) return 2.0 * (s.phi_c[n - 1] + s.phi_p[n]);
    const std::size_t k = std::get<Station>(where).index;
    require(k >= 1 && k <= n, "recovered_output_phase: station index out of range");
    if (k == n) return 2.0 * (s.phi_c[n - 1] + s.phi_p[n]);
    return s.phi_c[k - 1] + s.phi_c[k] + s.phi_p[k];
}

/// Largest violation of the per-station lock identities, rad.
///   first:    phi_c1 = phi_r - phi_c2 - phi_p1
///   interior: phi_c(k-1) + phi_p(k-1) - phi_pk - phi_c(k+1) = 0
///   last:     phi_cN = phi_r/2 - phi_pN
inline double lock_identity_violation(const StaticPhaseState& s) {
    const std::size_t n = s.stations();
    const auto& c = s.phi_c;
    const auto& p = s.phi_p;
    double worst = std::abs(c[n - 1] - (s.phi_r / 2.0 - p[n]));
    if (n >= 2) worst = std::max(worst, std::abs(c[0] - (s.phi_r - c[1] - p[1])));
    for (std::size_t k = 2; k < n; ++k)
        worst = std::max(worst, std::abs(c[k - 2] + p[k - 1] - p[k] - c[k]));
    return worst;
}

/// VCO angular frequencies satisfying w_r = w_ck + w_c(k+1) for k < N and w_r = 2 w_cN.
inline std::vector<double> locked_frequencies(double omega_r, std::size_t stations) {
    require(stations >= 1, "locked_frequencies: need at least one station");
    std::vector<double> w(stations);
    w[stations - 1] = omega_r / 2.0;
    for (std::size_t k = stations - 1; k >= 1; --k) w[k - 1] = omega_r - w[k];
    return w;
}

}  // namespace marsft::phase_algebra
