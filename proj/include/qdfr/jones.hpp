#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qdfr {

using complexd = std::complex<double>;

// Jones vector in the circular basis (sigma+, sigma-), unit vectors
// e_pm = (x_hat -/+ i y_hat)/sqrt(2). The intensity scale (photon flux) is
// carried separately by the caller; amplitudes hold only the polarization
// state and any attenuation applied to it.
struct JonesVector {
    complexd sigma_plus{0.0, 0.0};
    complexd sigma_minus{0.0, 0.0};

    double norm2() const { return std::norm(sigma_plus) + std::norm(sigma_minus); }

    JonesVector normalized() const {
        const double n = std::sqrt(norm2());
        if (!(n > 0.0)) throw std::domain_error("JonesVector: cannot normalize zero vector");
        return {sigma_plus / n, sigma_minus / n};
    }

    // E_x = (a+ + a-)/sqrt2, E_y = i (a- - a+)/sqrt2
    std::array<complexd, 2> to_linear() const {
        const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
        return {(sigma_plus + sigma_minus) * inv_sqrt2,
                complexd{0.0, 1.0} * (sigma_minus - sigma_plus) * inv_sqrt2};
    }

    static JonesVector from_linear(complexd ex, complexd ey) {
        const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
        return {(ex + complexd{0.0, 1.0} * ey) * inv_sqrt2,
                (ex - complexd{0.0, 1.0} * ey) * inv_sqrt2};
    }

    static JonesVector linear(double angle_rad) {
        return from_linear(std::cos(angle_rad), std::sin(angle_rad));
    }
    static JonesVector linear_x() { return from_linear(1.0, 0.0); }
    static JonesVector linear_y() { return from_linear(0.0, 1.0); }
    static JonesVector circular_plus() { return {1.0, 0.0}; }
    static JonesVector circular_minus() { return {0.0, 1.0}; }
};

struct StokesParameters {
    double s0, s1, s2, s3;
};

inline StokesParameters stokes(const JonesVector& j) {
    const complexd cross = j.sigma_plus * std::conj(j.sigma_minus);
    return {std::norm(j.sigma_plus) + std::norm(j.sigma_minus),
            2.0 * cross.real(),
            2.0 * cross.imag(),
            std::norm(j.sigma_minus) - std::norm(j.sigma_plus)};
}

// orientation of the polarization ellipse, in (-pi/2, pi/2]
inline double orientation_angle(const JonesVector& j) {
    const StokesParameters s = stokes(j);
    return 0.5 * std::atan2(s.s2, s.s1);
}

inline double ellipticity_angle(const JonesVector& j) {
    const StokesParameters s = stokes(j);
    if (!(s.s0 > 0.0)) return 0.0;
    double r = s.s3 / s.s0;
    r = std::clamp(r, -1.0, 1.0);
    return 0.5 * std::asin(r);
}

}  // namespace qdfr
