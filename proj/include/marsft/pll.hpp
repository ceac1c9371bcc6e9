#pragma once

#include <complex>

#include "marsft/core.hpp"

namespace marsft::pll {

using cplx = std::complex<double>;

/// Station loop constants: PI loop filter (k_p, k_i), phase detector gain, VCO tuning sensitivity.
struct PllParams {
    double k_p = 800.0;     // dimensionless
    double k_i = 25.0e4;    // rad/s
    double k_pfd = 6.0e-2;  // V/rad
    double k_vco = 32.0;    // rad/(s V)

    void check() const {
        require(k_pfd > 0.0, "pll: k_pfd must be > 0");
        require(k_vco > 0.0, "pll: k_vco must be > 0");
        require(k_p >= 0.0 && k_i >= 0.0, "pll: k_p and k_i must be >= 0");
    }

    bool is_open() const noexcept { return k_p == 0.0 && k_i == 0.0; }

    PllParams with_gain_scale(double s) const {
        PllParams p = *this;
        p.k_p *= s;
        p.k_i *= s;
        return p;
    }

    bool operator==(const PllParams&) const = default;
};

/// G(w) = (K_P + K_I / jw) K_PFD K_VCO / jw.
///
/// Open-loop parameters (k_p = k_i = 0) are accepted here and give G = 0; the
/// "not both zero" invariant is enforced where a closed loop is required.
inline cplx open_loop_gain(const PllParams& p, double omega) {
    require(omega > 0.0, "open_loop_gain: omega must be > 0 (integrator pole at DC)");
    const cplx jw(0.0, omega);
    return (p.k_p + p.k_i / jw) * p.k_pfd * p.k_vco / jw;
}

}  // namespace marsft::pll
