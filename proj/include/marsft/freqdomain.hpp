#pragma once

#include <complex>
#include <span>
#include <vector>

#include "marsft/core.hpp"
#include "marsft/noise.hpp"
#include "marsft/pll.hpp"
#include "marsft/topology.hpp"
#include "marsft/tridiag.hpp"

namespace marsft::freqdomain {

using cplx = std::complex<double>;
using topology::ChainTopology;

/// Column layout of the noise sources driving an N-station chain:
/// fiber sub-links 0..N, detector ASE at stations 1..N, then the frequency standard.
struct SourceIndex {
    std::size_t stations;

    std::size_t count() const noexcept { return 2 * stations + 2; }
    std::size_t fiber(std::size_t link) const noexcept { return link; }
    std::size_t ase(std::size_t station) const noexcept { return stations + station; }  // 1-based station
    std::size_t rf() const noexcept { return 2 * stations + 1; }
};

/// Station equations at one angular frequency: A phi_c = B s, one column of B per source.
struct ChainSystem {
    double omega = 0.0;
    std::size_t stations = 0;
    Tridiagonal<cplx> matrix;
    std::vector<cplx> rhs;  // column-major, rhs[source * stations + row]

    SourceIndex sources() const noexcept { return {stations}; }
    std::span<const cplx> column(std::size_t s) const { return {rhs.data() + s * stations, stations}; }
};

/// Solved station phases per unit source at one frequency.
struct TransferPoint {
    double omega = 0.0;
    std::size_t stations = 0;
    std::vector<cplx> phases;  // phases[source * stations + (k-1)] = phi_ck per unit source
    std::vector<double> delays;

    SourceIndex sources() const noexcept { return {stations}; }
    cplx station(std::size_t k, std::size_t source) const { return phases[source * stations + (k - 1)]; }
};

using TransferSet = std::vector<TransferPoint>;

namespace detail {

inline std::vector<double> link_delays(const ChainTopology& chain) {
    std::vector<double> t;
    t.reserve(chain.sublink_lengths.size());
    for (double l : chain.sublink_lengths) t.push_back(topology::delay(l));
    return t;
}

inline cplx delay_factor(double omega, double tau) { return std::polar(1.0, -omega * tau); }

/// Front-link weighting of the passive LS loop, sqrt(2 [1 - sinc(2 w tau)]).
inline double front_weight(double omega, double tau) { return std::sqrt(2.0 * one_minus_sinc(2.0 * omega * tau)); }

/// Rear-link round-trip weighting, sqrt(2 [1 + sinc(2 w tau)]).
inline double rear_weight(double omega, double tau) { return std::sqrt(2.0 * (1.0 + sinc(2.0 * omega * tau))); }

inline void require_grid(std::span<const double> grid) {
    require(!grid.empty(), "frequency grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        require(grid[i] > 0.0, "frequency grid must be positive");
        require(i == 0 || grid[i] > grid[i - 1], "frequency grid must be strictly increasing");
    }
}

inline double output_floor(const ChainTopology& chain, double f, std::size_t stations_upstream) {
    const double single = noise::floor_psd(chain.floor, f);
    return chain.floor.scale_with_stations ? single * static_cast<double>(stations_upstream) : single;
}

}  // namespace detail

/// Station equations of an N-station chain (N >= 1) at angular frequency omega.
///
/// Each station's PLL drives its error to zero; the error is the backward probe from
/// the next station (or, at the last station, its own probe returned from the RS)
/// minus the forward signal from the previous station (or, at the first station, the
/// LS return). Moving the station unknowns to the left gives a tridiagonal system:
///   first:    (1 + G e^{-2jw t0}) c_1 + G e^{-jw t1} c_2 = G w0 p_0 - G p_1 + 2 G e^{-jw t0} rf
///   interior: -G e^{-jw t(k-1)} c_(k-1) + c_k + G e^{-jw tk} c_(k+1) = G p_(k-1) - G p_k
///   last:     -G e^{-jw t(N-1)} c_(N-1) + (1 + G e^{-2jw tN}) c_N = G p_(N-1) - G wN p_N
/// with w0 = sqrt(2[1 - sinc(2 w t0)]), wN = sqrt(2[1 + sinc(2 w tN)]) and -G on each
/// station's detector ASE. For N = 1 the first and last rows merge into one.
inline ChainSystem build_chain_system(const ChainTopology& chain, double omega) {
    topology::require_valid(chain);
    require(omega > 0.0, "build_chain_system: omega must be > 0");
    const std::size_t n = chain.station_count();
    require(n >= 1, "build_chain_system: chain needs at least one station");

    const auto tau = detail::link_delays(chain);
    ChainSystem sys;
    sys.omega = omega;
    sys.stations = n;
    sys.matrix = Tridiagonal<cplx>(n);
    const SourceIndex src{n};
    sys.rhs.assign(src.count() * n, cplx{});
    auto b = [&](std::size_t source, std::size_t row) -> cplx& { return sys.rhs[source * n + row]; };

    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t r = k - 1;
        const cplx g = pll::open_loop_gain(chain.station_pll(k), omega);
        cplx diag = 1.0;
        if (k == 1) {
            const cplx e0 = detail::delay_factor(omega, tau[0]);
            diag += g * e0 * e0;
            b(src.fiber(0), r) += g * detail::front_weight(omega, tau[0]);
            b(src.rf(), r) += 2.0 * g * e0;
        } else {
            sys.matrix.lower[r] = -g * detail::delay_factor(omega, tau[k - 1]);
            b(src.fiber(k - 1), r) += g;
        }
        if (k == n) {
            const cplx en = detail::delay_factor(omega, tau[n]);
            diag += g * en * en;
            b(src.fiber(n), r) += -g * detail::rear_weight(omega, tau[n]);
        } else {
            sys.matrix.upper[r] = g * detail::delay_factor(omega, tau[k]);
            b(src.fiber(k), r) += -g;
        }
        sys.matrix.diag[r] = diag;
        b(src.ase(k), r) = -g;
    }
    return sys;
}

inline constexpr double kMaxRelativeResidual = 1e-10;

/// Solves every source column; checks ||Ax - b|| / ||b|| per column.
inline TransferPoint solve_transfer_set(const ChainSystem& sys) {
    const double f = sys.omega / kTwoPi;
    const std::size_t n = sys.stations;
    const std::size_t ns = sys.sources().count();
    TransferPoint out;
    out.omega = sys.omega;
    out.stations = n;
    out.phases = sys.rhs;

    try {
        const ThomasFactor<cplx> lu(sys.matrix);
        for (std::size_t s = 0; s < ns; ++s) lu.solve(std::span<cplx>(out.phases.data() + s * n, n));
    } catch (const SingularSystem& e) {
        throw SolveError(std::string("singular chain system: ") + e.what(), f);
    }

    for (std::size_t s = 0; s < ns; ++s) {
        const auto bcol = sys.column(s);
        const std::span<const cplx> x(out.phases.data() + s * n, n);
        double bnorm = 0.0, rnorm = 0.0;
        const auto ax = sys.matrix.apply(x);
        for (std::size_t i = 0; i < n; ++i) {
            bnorm += std::norm(bcol[i]);
            rnorm += std::norm(ax[i] - bcol[i]);
            if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag()))
                throw SolveError("non-finite chain solution", f);
        }
        if (bnorm > 0.0 && std::sqrt(rnorm / bnorm) >= kMaxRelativeResidual)
            throw SolveError("ill-conditioned chain system (relative residual " +
                                 std::to_string(std::sqrt(rnorm / bnorm)) + ")",
                             f);
    }
    return out;
}

inline TransferSet transfer_set(const ChainTopology& chain, std::span<const double> grid) {
    detail::require_grid(grid);
    TransferSet set;
    set.reserve(grid.size());
    const auto tau = detail::link_delays(chain);
    for (double f : grid) {
        set.push_back(solve_transfer_set(build_chain_system(chain, kTwoPi * f)));
        set.back().delays = tau;
    }
    return set;
}

/// Source-to-RS-residual coefficients: phi_cN e^{-jw tN} + phi_pN, referenced to the standard.
inline std::vector<cplx> rs_coefficients(const TransferPoint& tp) {
    const auto src = tp.sources();
    const std::size_t n = tp.stations;
    const cplx en = detail::delay_factor(tp.omega, tp.delays.at(n));
    std::vector<cplx> h(src.count());
    for (std::size_t s = 0; s < h.size(); ++s) h[s] = tp.station(n, s) * en;
    h[src.fiber(n)] += 1.0;
    h[src.rf()] -= 1.0;
    return h;
}

/// Source-to-output coefficients at interior station k: phi_ck + e^{-jw tk} phi_c(k+1) + phi_pk.
inline std::vector<cplx> mars_coefficients(const TransferPoint& tp, std::size_t k) {
    const auto src = tp.sources();
    require(k >= 1 && k < tp.stations, "mars output: station index must satisfy 1 <= k < N");
    const cplx ek = detail::delay_factor(tp.omega, tp.delays.at(k));
    std::vector<cplx> h(src.count());
    for (std::size_t s = 0; s < h.size(); ++s) h[s] = tp.station(k, s) + ek * tp.station(k + 1, s);
    h[src.fiber(k)] += 1.0;
    h[src.rf()] -= 2.0;
    return h;
}

/// PSD of every source at frequency f, in SourceIndex order.
inline std::vector<double> source_psds(const ChainTopology& chain, double f) {
    const std::size_t n = chain.station_count();
    const SourceIndex src{n};
    std::vector<double> s(src.count(), 0.0);
    const double wr = chain.carrier_angular();
    for (std::size_t j = 0; j <= n; ++j) s[src.fiber(j)] = noise::fiber_psd(chain.fiber_noise, chain.sublink_lengths[j], wr, f);
    const double ase = noise::ase_detector_psd(chain.floor);
    for (std::size_t k = 1; k <= n; ++k) s[src.ase(k)] = ase;
    s[src.rf()] = noise::rf_psd(chain.rf, f);
    return s;
}

namespace detail {

inline double combine(std::span<const cplx> h, std::span<const double> s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        if (s[i] != 0.0) acc += std::norm(h[i]) * s[i];
    return acc;
}

}  // namespace detail

/// Residual PSD at the RS of an N-station chain via the tridiagonal solution.
/// Sources are mutually uncorrelated, so the expectation is a sum of |H|^2 S terms.
inline SpectralDensity residual_psd_chain(const ChainTopology& chain, std::span<const double> grid) {
    topology::require_valid(chain);
    const std::size_t n = chain.station_count();
    require(n >= 1, "residual_psd_chain: needs N >= 1");
    detail::require_grid(grid);
    const auto tau = detail::link_delays(chain);
    SpectralDensity out;
    out.freqs.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double f : grid) {
        auto tp = solve_transfer_set(build_chain_system(chain, kTwoPi * f));
        tp.delays = tau;
        const auto h = rs_coefficients(tp);
        const auto s = source_psds(chain, f);
        out.values.push_back(detail::combine(h, s) + detail::output_floor(chain, f, n));
    }
    return out;
}

/// Closed-form residual PSD of a single-MARS link:
///   |G e^{-jw t1} w0 / D|^2 S_p0 + |1 - G e^{-jw t1} w1 / D|^2 S_p1
///   + |1 - 2 G e^{-jw t0} e^{-jw t1} / D|^2 S_RF + |G e^{-jw t1} / D|^2 S_ASE + floor,
/// D = 1 + G e^{-2jw t0} + G e^{-2jw t1}.
inline SpectralDensity residual_psd_single_mars(const ChainTopology& chain, std::span<const double> grid) {
    topology::require_valid(chain);
    require(chain.sublink_lengths.size() == 2, "residual_psd_single_mars: needs exactly 2 sub-links, got " +
                                                   std::to_string(chain.sublink_lengths.size()));
    detail::require_grid(grid);
    const double t0 = topology::delay(chain.sublink_lengths[0]);
    const double t1 = topology::delay(chain.sublink_lengths[1]);
    const double wr = chain.carrier_angular();
    const double s_ase = noise::ase_detector_psd(chain.floor);
    const auto& p = chain.station_pll(1);

    SpectralDensity out;
    out.freqs.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double f : grid) {
        const double w = kTwoPi * f;
        const cplx g = pll::open_loop_gain(p, w);
        const cplx e0 = std::polar(1.0, -w * t0);
        const cplx e1 = std::polar(1.0, -w * t1);
        const cplx d = 1.0 + g * e0 * e0 + g * e1 * e1;
        const double front = std::norm(g * e1 * detail::front_weight(w, t0) / d);
        const double rear = std::norm(1.0 - g * e1 * detail::rear_weight(w, t1) / d);
        const double rf = std::norm(1.0 - 2.0 * g * e0 * e1 / d);
        const double ase = std::norm(g * e1 / d);
        double v = front * noise::fiber_psd(chain.fiber_noise, chain.sublink_lengths[0], wr, f) +
                   rear * noise::fiber_psd(chain.fiber_noise, chain.sublink_lengths[1], wr, f);
        if (!chain.rf.is_zero()) v += rf * noise::rf_psd(chain.rf, f);
        v += ase * s_ase + noise::floor_psd(chain.floor, f);
        out.values.push_back(v);
    }
    return out;
}

/// Residual PSD at the RS: closed form for one station, chain solver otherwise.
/// A bare single span is the one-station form with a zero-length rear link.
inline SpectralDensity residual_psd(const ChainTopology& chain, std::span<const double> grid) {
    if (chain.sublink_lengths.size() == 1) {
        ChainTopology span = chain;
        span.sublink_lengths.push_back(0.0);
        return residual_psd_single_mars(span, grid);
    }
    return chain.station_count() == 1 ? residual_psd_single_mars(chain, grid) : residual_psd_chain(chain, grid);
}

/// Output PSD at interior station k (1 <= k < N), referenced to the standard.
/// The last station's output is only available from the time-domain oracle.
inline SpectralDensity mars_output_psd(const ChainTopology& chain, std::size_t k, std::span<const double> grid) {
    topology::require_valid(chain);
    const std::size_t n = chain.station_count();
    require(k >= 1, "mars_output_psd: station index starts at 1");
    require(k < n, "mars_output_psd: station " + std::to_string(k) +
                       " is the last station; its output is only modelled in the time domain");
    detail::require_grid(grid);
    const auto tau = detail::link_delays(chain);
    SpectralDensity out;
    out.freqs.assign(grid.begin(), grid.end());
    for (double f : grid) {
        auto tp = solve_transfer_set(build_chain_system(chain, kTwoPi * f));
        tp.delays = tau;
        const auto h = mars_coefficients(tp, k);
        const auto s = source_psds(chain, f);
        out.values.push_back(detail::combine(h, s) + detail::output_floor(chain, f, k));
    }
    return out;
}

/// Uncompensated link: accumulated fiber noise of every sub-link plus one station floor.
inline SpectralDensity free_running_psd(const ChainTopology& chain, std::span<const double> grid) {
    topology::require_valid(chain);
    detail::require_grid(grid);
    const double wr = chain.carrier_angular();
    SpectralDensity out;
    out.freqs.assign(grid.begin(), grid.end());
    for (double f : grid) {
        double v = noise::floor_psd(chain.floor, f);
        for (double l : chain.sublink_lengths) v += noise::fiber_psd(chain.fiber_noise, l, wr, f);
        out.values.push_back(v);
    }
    return out;
}

/// `stages` independently compensated single-span links of total_km / stages each
/// (single-station model with a zero-length rear link); stage PSDs add.
/// Loop, noise and floor parameters come from `templ`.
inline SpectralDensity cascaded_psd(const ChainTopology& templ, double total_km, std::size_t stages,
                                    std::span<const double> grid) {
    require(stages >= 1, "cascaded_psd: needs at least one stage");
    require(total_km >= 0.0, "cascaded_psd: negative total length");
    ChainTopology stage = templ;
    stage.sublink_lengths = {total_km / static_cast<double>(stages), 0.0};
    stage.pll = {templ.pll.front()};
    const auto one = residual_psd_single_mars(stage, grid);
    return one.scaled(static_cast<double>(stages));
}

}  // namespace marsft::freqdomain
