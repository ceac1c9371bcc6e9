#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace marsft {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Propagation velocity in fiber, m/s.
inline constexpr double kFiberVelocity = 2.0e8;

/// Base error for invalid model inputs (domain violations, bad shapes).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A per-frequency linear solve failed or lost accuracy.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, double freq_hz)
        : std::runtime_error(what + " at f=" + std::to_string(freq_hz) + " Hz"), freq_hz_(freq_hz) {}
    double freq_hz() const noexcept { return freq_hz_; }

private:
    double freq_hz_;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw ModelError(msg);
}

/// One-sided phase-noise PSD sampled on an ascending frequency grid.
struct SpectralDensity {
    std::vector<double> freqs;   // Hz, strictly increasing
    std::vector<double> values;  // rad^2/Hz, >= 0

    std::size_t size() const noexcept { return freqs.size(); }

    void check() const {
        require(freqs.size() == values.size(), "spectral density: size mismatch");
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            require(std::isfinite(values[i]) && values[i] >= 0.0,
                    "spectral density: negative or non-finite value at index " + std::to_string(i));
            require(i == 0 || freqs[i] > freqs[i - 1],
                    "spectral density: frequencies not strictly increasing at index " + std::to_string(i));
        }
    }

    SpectralDensity& operator+=(const SpectralDensity& other) {
        require(other.freqs == freqs, "spectral density: grids differ");
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
        return *this;
    }

    SpectralDensity scaled(double factor) const {
        SpectralDensity out = *this;
        for (double& v : out.values) v *= factor;
        return out;
    }
};

/// Allan deviation versus averaging time.
struct AdevCurve {
    std::vector<double> taus;                // s, strictly increasing
    std::vector<double> sigmas;              // dimensionless
    std::vector<std::size_t> sample_counts;  // terms per tau; empty for PSD-derived curves

    std::size_t size() const noexcept { return taus.size(); }

    /// Sigma at an exact tau from the curve.
    double at(double tau) const {
        for (std::size_t i = 0; i < taus.size(); ++i)
            if (std::abs(taus[i] - tau) <= 1e-9 * tau) return sigmas[i];
        throw ModelError("adev curve: tau " + std::to_string(tau) + " not present");
    }
};

/// Logarithmic frequency grid from fmin to fmax inclusive with `per_decade` points per decade.
inline std::vector<double> log_grid(double fmin, double fmax, double per_decade) {
    require(fmin > 0.0 && fmax > fmin, "log grid: need 0 < fmin < fmax");
    require(per_decade >= 1.0, "log grid: need at least one point per decade");
    const double decades = std::log10(fmax / fmin);
    const auto steps = static_cast<std::size_t>(std::llround(decades * per_decade));
    std::vector<double> f(steps + 1);
    const double lmin = std::log10(fmin);
    for (std::size_t i = 0; i <= steps; ++i)
        f[i] = std::pow(10.0, lmin + decades * static_cast<double>(i) / static_cast<double>(steps));
    f.front() = fmin;
    f.back() = fmax;
    return f;
}

struct GridSpec {
    double fmin = 1e-4;
    double fmax = 1e5;
    double per_decade = 200.0;

    std::vector<double> build() const { return log_grid(fmin, fmax, per_decade); }
};

/// Unnormalized sinc, sin(x)/x.
inline double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

/// 1 - sinc(x) without cancellation near zero.
inline double one_minus_sinc(double x) {
    if (std::abs(x) < 1e-2) {
        const double x2 = x * x;
        return x2 / 6.0 - x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0;
    }
    return 1.0 - std::sin(x) / x;
}

/// SSB level L(f) in dBc/Hz to S_phi in rad^2/Hz (S_phi = 2 L).
inline double ssb_dbc_to_sphi(double dbc) {
    if (std::isinf(dbc) && dbc < 0) return 0.0;
    require(std::isfinite(dbc), "dBc/Hz level must be finite or -inf");
    return 2.0 * std::pow(10.0, dbc / 10.0);
}

inline double sphi_to_ssb_dbc(double sphi) {
    return sphi > 0 ? 10.0 * std::log10(sphi / 2.0) : -std::numeric_limits<double>::infinity();
}

}  // namespace marsft
