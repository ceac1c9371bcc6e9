#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "marsft/core.hpp"

namespace marsft::fft {

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> allocate(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) throw std::bad_alloc();
    return FftwBuffer<T>(p);
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

/// Real inverse transform of a half spectrum (n/2+1 bins) into n real samples.
/// Unnormalized: out[m] = sum_k X_k e^{+2 pi i k m / n} over the full Hermitian spectrum.
inline std::vector<double> inverse_real(FftwBuffer<fftw_complex>& half_spectrum, std::size_t n) {
    auto out = allocate<double>(n);
    Plan plan(fftw_plan_dft_c2r_1d(static_cast<int>(n), half_spectrum.get(), out.get(), FFTW_ESTIMATE));
    require(plan != nullptr, "fftw: could not create c2r plan");
    fftw_execute(plan.get());
    return std::vector<double>(out.get(), out.get() + n);
}

/// Forward real transform, n samples to n/2+1 complex bins.
class RealForward {
public:
    explicit RealForward(std::size_t n)
        : n_(n), in_(allocate<double>(n)), out_(allocate<fftw_complex>(n / 2 + 1)),
          plan_(fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE)) {
        require(plan_ != nullptr, "fftw: could not create r2c plan");
    }

    std::size_t size() const noexcept { return n_; }
    double* input() noexcept { return in_.get(); }

    /// Executes and returns |X_k|^2 for k = 0..n/2.
    std::vector<double> power() {
        fftw_execute(plan_.get());
        std::vector<double> p(n_ / 2 + 1);
        for (std::size_t k = 0; k < p.size(); ++k)
            p[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
        return p;
    }

private:
    std::size_t n_;
    FftwBuffer<double> in_;
    FftwBuffer<fftw_complex> out_;
    Plan plan_;
};

/// Welch one-sided PSD estimate: Hann window, 50% overlap, mean removed per segment.
/// Returns bins k = 1 .. segment/2 - 1 (DC and Nyquist dropped).
inline SpectralDensity welch_psd(std::span<const double> x, double sample_rate, std::size_t segment) {
    require(segment >= 16 && (segment & (segment - 1)) == 0, "welch: segment must be a power of two >= 16");
    require(x.size() >= segment, "welch: series shorter than one segment");
    require(sample_rate > 0, "welch: sample rate must be positive");

    std::vector<double> window(segment);
    double wss = 0.0;
    for (std::size_t i = 0; i < segment; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(segment));
        wss += window[i] * window[i];
    }

    RealForward fwd(segment);
    std::vector<double> acc(segment / 2 + 1, 0.0);
    std::size_t count = 0;
    const std::size_t hop = segment / 2;
    for (std::size_t start = 0; start + segment <= x.size(); start += hop) {
        double mean = 0.0;
        for (std::size_t i = 0; i < segment; ++i) mean += x[start + i];
        mean /= static_cast<double>(segment);
        for (std::size_t i = 0; i < segment; ++i) fwd.input()[i] = (x[start + i] - mean) * window[i];
        const auto p = fwd.power();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p[k];
        ++count;
    }

    SpectralDensity psd;
    const double scale = 2.0 / (sample_rate * wss * static_cast<double>(count));
    for (std::size_t k = 1; k < segment / 2; ++k) {
        psd.freqs.push_back(static_cast<double>(k) * sample_rate / static_cast<double>(segment));
        psd.values.push_back(acc[k] * scale);
    }
    return psd;
}

/// Number of Welch segments produced for a series of length n.
inline std::size_t welch_segment_count(std::size_t n, std::size_t segment) {
    return n < segment ? 0 : (n - segment) / (segment / 2) + 1;
}

}  // namespace marsft::fft
