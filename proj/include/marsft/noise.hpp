#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "marsft/core.hpp"
#include "marsft/fft.hpp"

namespace marsft::noise {

/// Power-law coefficients of f^-3 .. f^0. For fiber noise they are per km and are
/// multiplied by the squared carrier angular frequency; elsewhere they are absolute.
struct PowerLawCoeffs {
    double h_m3 = 0.0;
    double h_m2 = 0.0;
    double h_m1 = 0.0;
    double h_0 = 0.0;

    /// Fiber-induced noise coefficients used for all simulated configurations.
    static constexpr PowerLawCoeffs fiber_defaults() { return {1e-34, 2e-34, 6e-33, 5e-37}; }

    bool is_zero() const noexcept { return h_m3 == 0 && h_m2 == 0 && h_m1 == 0 && h_0 == 0; }

    void check() const {
        require(h_m3 >= 0 && h_m2 >= 0 && h_m1 >= 0 && h_0 >= 0, "power-law coefficients must be >= 0");
    }

    /// h_m3 f^-3 + h_m2 f^-2 + h_m1 f^-1 + h_0.
    double evaluate(double f) const {
        require(f > 0.0, "power-law evaluation needs f > 0");
        return ((h_m3 / f + h_m2) / f + h_m1) / f + h_0;
    }

    bool operator==(const PowerLawCoeffs&) const = default;
};

/// Back-to-back system noise floor.
///
/// Two parts. The output-referred part (`white_ssb_dbc` plus `extra`) is added to a
/// delivered signal once per station. The ASE part is white noise at each station's
/// phase detector: the chain solver propagates it through the loop like any other source.
struct NoiseFloorSpec {
    double white_ssb_dbc = -std::numeric_limits<double>::infinity();
    PowerLawCoeffs extra{};
    double ase_ssb_dbc = -78.0;
    /// Coupling of the quoted ASE level onto the detector, dB.
    double ase_coupling_db = -30.0;
    bool scale_with_stations = true;

    void check() const {
        require(!std::isnan(white_ssb_dbc) && white_ssb_dbc < std::numeric_limits<double>::infinity(),
                "floor: white level must be finite or -inf");
        require(!std::isnan(ase_ssb_dbc) && ase_ssb_dbc < std::numeric_limits<double>::infinity(),
                "floor: ASE level must be finite or -inf");
        require(std::isfinite(ase_coupling_db), "floor: ASE coupling must be finite");
        extra.check();
    }

    static NoiseFloorSpec disabled() {
        NoiseFloorSpec s;
        s.ase_ssb_dbc = -std::numeric_limits<double>::infinity();
        return s;
    }
};

/// Frequency-standard phase noise, expressed at the delivered carrier. Absent means zero.
struct RfSourceSpec {
    std::optional<PowerLawCoeffs> psd;

    bool is_zero() const noexcept { return !psd || psd->is_zero(); }
};

/// S_p(f) = w_r^2 L (h_m3 f^-3 + h_m2 f^-2 + h_m1 f^-1 + h_0), rad^2/Hz.
inline double fiber_psd(const PowerLawCoeffs& coeffs, double length_km, double carrier_angular_freq, double f) {
    require(f > 0.0, "fiber_psd: frequency must be positive");
    require(length_km >= 0.0, "fiber_psd: length must be >= 0");
    return carrier_angular_freq * carrier_angular_freq * length_km * coeffs.evaluate(f);
}

/// Output-referred floor for one station, rad^2/Hz.
inline double floor_psd(const NoiseFloorSpec& spec, double f) {
    require(f > 0.0, "floor_psd: frequency must be positive");
    return ssb_dbc_to_sphi(spec.white_ssb_dbc) + spec.extra.evaluate(f);
}

/// Detector-referred ASE level for one station, rad^2/Hz (white).
inline double ase_detector_psd(const NoiseFloorSpec& spec) {
    if (std::isinf(spec.ase_ssb_dbc)) return 0.0;
    return ssb_dbc_to_sphi(spec.ase_ssb_dbc + spec.ase_coupling_db);
}

inline double rf_psd(const RfSourceSpec& spec, double f) {
    require(f > 0.0, "rf_psd: frequency must be positive");
    return spec.psd ? spec.psd->evaluate(f) : 0.0;
}

struct SynthesisOptions {
    double sample_rate = 1.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    /// Lowest frequency the caller needs represented; 0 means no requirement.
    double lowest_resolved_hz = 0.0;
};

inline constexpr std::size_t kMinSynthesisLength = 32;

/// Gaussian phase series whose one-sided PSD follows `target`.
///
/// White Gaussian noise is shaped in the frequency domain with a Hermitian spectrum.
/// Bin k > 0 gets amplitude sqrt(S(f_k) n fs / 4) per quadrature; the DC bin is zero, so
/// divergent f^-3 / f^-2 terms are band-limited at fs/n. The Nyquist bin is real.
inline std::vector<double> synthesize_series(const std::function<double(double)>& target,
                                             const SynthesisOptions& opt) {
    const std::size_t n = opt.n_samples;
    require(opt.sample_rate > 0.0, "synthesize_series: sample rate must be positive");
    require(n >= kMinSynthesisLength && (n & (n - 1)) == 0,
            "synthesize_series: n_samples must be a power of two >= " + std::to_string(kMinSynthesisLength));
    const double df = opt.sample_rate / static_cast<double>(n);
    require(opt.lowest_resolved_hz <= 0.0 || df <= opt.lowest_resolved_hz,
            "synthesize_series: n_samples too small to resolve " + std::to_string(opt.lowest_resolved_hz) +
                " Hz (resolution " + std::to_string(df) + " Hz)");

    const std::size_t half = n / 2;
    std::vector<double> amp(half + 1, 0.0);
    bool any = false;
    for (std::size_t k = 1; k <= half; ++k) {
        const double s = target(static_cast<double>(k) * df);
        require(std::isfinite(s) && s >= 0.0, "synthesize_series: target PSD must be finite and >= 0");
        amp[k] = std::sqrt(s * static_cast<double>(n) * opt.sample_rate / 4.0);
        any = any || s > 0.0;
    }
    if (!any) return std::vector<double>(n, 0.0);

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto spec = fft::allocate<fftw_complex>(half + 1);
    spec[0][0] = 0.0;
    spec[0][1] = 0.0;
    for (std::size_t k = 1; k < half; ++k) {
        spec[k][0] = amp[k] * gauss(rng);
        spec[k][1] = amp[k] * gauss(rng);
    }
    // Nyquist bin is real; its single quadrature carries the full power.
    spec[half][0] = amp[half] * std::sqrt(2.0) * gauss(rng);
    spec[half][1] = 0.0;

    std::vector<double> x = fft::inverse_real(spec, n);
    const double norm = 1.0 / static_cast<double>(n);
    for (double& v : x) v *= norm;
    return x;
}

}  // namespace marsft::noise
