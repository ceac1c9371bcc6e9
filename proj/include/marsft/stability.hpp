#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "marsft/core.hpp"

namespace marsft::stability {

/// Lowest frequency the conversion integrates from; nothing below is extrapolated.
inline constexpr double kLowestIntegrationHz = 1e-4;
inline constexpr double kDefaultFHigh = 1e5;

namespace detail {

inline void require_taus(std::span<const double> taus) {
    require(!taus.empty(), "adev: no averaging times given");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        require(taus[i] > 0.0 && std::isfinite(taus[i]), "adev: averaging times must be positive");
        require(i == 0 || taus[i] > taus[i - 1], "adev: averaging times must be strictly increasing");
    }
}

/// PSD between two grid points: power law when both ends are positive, linear otherwise.
struct Segment {
    double f0, f1, s0, s1, slope;
    bool power_law;

    Segment(double fa, double fb, double sa, double sb) : f0(fa), f1(fb), s0(sa), s1(sb), slope(0.0) {
        power_law = sa > 0.0 && sb > 0.0;
        if (power_law) slope = std::log(sb / sa) / std::log(fb / fa);
    }

    double at(double f) const {
        if (power_law) return s0 * std::pow(f / f0, slope);
        return s0 + (s1 - s0) * (f - f0) / (f1 - f0);
    }

    /// Integral of the PSD over [f0, f1].
    double integral() const {
        if (!power_law) return 0.5 * (s0 + s1) * (f1 - f0);
        const double r = f1 / f0;
        if (std::abs(slope + 1.0) < 1e-9) return s0 * f0 * std::log(r);
        return s0 * f0 * (std::pow(r, slope + 1.0) - 1.0) / (slope + 1.0);
    }
};

inline double sin4(double x) {
    const double s = std::sin(x);
    return s * s * s * s;
}

/// Integral of S(f) sin^4(pi f tau) over one segment.
inline double kernel_integral(const Segment& seg, double tau) {
    const double periods = (seg.f1 - seg.f0) * tau;
    if (periods > 64.0) return 0.375 * seg.integral();  // <sin^4> = 3/8
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(periods * 16.0)));
    const double h = (seg.f1 - seg.f0) / static_cast<double>(steps);
    double acc = 0.5 * (seg.s0 * sin4(kPi * seg.f0 * tau) + seg.s1 * sin4(kPi * seg.f1 * tau));
    for (std::size_t i = 1; i < steps; ++i) {
        const double f = seg.f0 + h * static_cast<double>(i);
        acc += seg.at(f) * sin4(kPi * f * tau);
    }
    return acc * h;
}

}  // namespace detail

/// Lower grid edge a conversion needs for the given taus.
inline double required_low_frequency(std::span<const double> taus) {
    return std::max(1.0 / (10.0 * taus.back()), kLowestIntegrationHz);
}

/// sigma_y^2(tau) = 2 int_0^fh (f/nu0)^2 S_phi(f) sin^4(pi f tau) / (pi f tau)^2 df
///               = 2 / (pi nu0 tau)^2 int_0^fh S_phi(f) sin^4(pi f tau) df.
///
/// Trapezoid on the PSD grid with each interval subdivided until the kernel is resolved;
/// intervals spanning more than 64 kernel periods use the kernel mean.
inline AdevCurve psd_to_adev(const SpectralDensity& psd, double carrier_freq, std::span<const double> taus,
                             double f_high = kDefaultFHigh) {
    psd.check();
    require(psd.size() >= 2, "psd_to_adev: need at least two PSD points");
    require(carrier_freq > 0.0, "psd_to_adev: carrier frequency must be positive");
    require(f_high > 0.0, "psd_to_adev: f_high must be positive");
    detail::require_taus(taus);

    const double need_low = required_low_frequency(taus);
    if (psd.freqs.front() > need_low * (1.0 + 1e-9) || psd.freqs.back() < f_high * (1.0 - 1e-12))
        throw ModelError("psd_to_adev: grid covers [" + std::to_string(psd.freqs.front()) + ", " +
                         std::to_string(psd.freqs.back()) + "] Hz but the conversion needs [" +
                         std::to_string(need_low) + ", " + std::to_string(f_high) + "] Hz");

    std::vector<detail::Segment> segs;
    for (std::size_t i = 0; i + 1 < psd.size() && psd.freqs[i] < f_high; ++i) {
        double f1 = psd.freqs[i + 1], s1 = psd.values[i + 1];
        if (f1 > f_high) {
            const detail::Segment full(psd.freqs[i], f1, psd.values[i], s1);
            s1 = full.at(f_high);
            f1 = f_high;
        }
        segs.emplace_back(psd.freqs[i], f1, psd.values[i], s1);
    }

    AdevCurve out;
    out.taus.assign(taus.begin(), taus.end());
    for (double tau : taus) {
        double acc = 0.0;
        for (const auto& seg : segs) acc += detail::kernel_integral(seg, tau);
        const double scale = 2.0 / (kPi * kPi * carrier_freq * carrier_freq * tau * tau);
        out.sigmas.push_back(std::sqrt(acc * scale));
    }
    return out;
}

/// Overlapping Allan deviation of x(t) = phi(t) / (2 pi nu0).
/// Each tau must be a whole number of samples and leave at least 3 tau of data.
inline AdevCurve adev_from_series(std::span<const double> phase, double sample_rate, double carrier_freq,
                                  std::span<const double> taus) {
    require(sample_rate > 0.0, "adev_from_series: sample rate must be positive");
    require(carrier_freq > 0.0, "adev_from_series: carrier frequency must be positive");
    detail::require_taus(taus);

    std::vector<std::size_t> ms;
    std::string too_long;
    for (double tau : taus) {
        const double mf = tau * sample_rate;
        const auto m = static_cast<std::size_t>(std::llround(mf));
        require(m >= 1 && std::abs(mf - static_cast<double>(m)) <= 1e-6 * mf,
                "adev_from_series: tau " + std::to_string(tau) + " s is not a whole number of samples");
        if (static_cast<double>(phase.size()) < 3.0 * mf) too_long += (too_long.empty() ? "" : ", ") + std::to_string(tau);
        ms.push_back(m);
    }
    if (!too_long.empty())
        throw ModelError("adev_from_series: series of " + std::to_string(phase.size()) +
                         " samples too short (needs >= 3 tau) for tau = " + too_long + " s");

    const double to_time = 1.0 / (kTwoPi * carrier_freq);
    AdevCurve out;
    out.taus.assign(taus.begin(), taus.end());
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const std::size_t m = ms[t];
        const std::size_t count = phase.size() - 2 * m;
        long double acc = 0.0L;
        for (std::size_t i = 0; i < count; ++i) {
            const long double d = static_cast<long double>(phase[i + 2 * m]) - 2.0L * phase[i + m] + phase[i];
            acc += d * d;
        }
        const double tau = static_cast<double>(m) / sample_rate;
        const double var = static_cast<double>(acc / static_cast<long double>(count)) * to_time * to_time / (2.0 * tau * tau);
        out.sigmas.push_back(std::sqrt(var));
        out.sample_counts.push_back(count);
    }
    return out;
}

}  // namespace marsft::stability
