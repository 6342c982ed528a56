#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

// Unit policy: config files speak laboratory units (GHz, mV, nW, ms, nm);
// everything past this header is SI with angular frequencies in rad/s.
// This is the single conversion layer.

namespace qdfr::units {

inline constexpr double kPlanck = 6.62607015e-34;      // J s
inline constexpr double kLightSpeed = 2.99792458e8;    // m/s
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double ghz_to_angular(double ghz) { return kTwoPi * 1e9 * ghz; }
inline constexpr double angular_to_ghz(double w) { return w / (kTwoPi * 1e9); }
inline constexpr double hz_to_angular(double hz) { return kTwoPi * hz; }

inline constexpr double mv_to_v(double mv) { return 1e-3 * mv; }
inline constexpr double v_to_mv(double v) { return 1e3 * v; }
inline constexpr double nw_to_w(double nw) { return 1e-9 * nw; }
inline constexpr double ms_to_s(double ms) { return 1e-3 * ms; }
inline constexpr double us_to_s(double us) { return 1e-6 * us; }
inline constexpr double nm_to_m(double nm) { return 1e-9 * nm; }
inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_urad(double rad) { return 1e6 * rad; }

inline double photon_energy(double wavelength_m) {
    if (!(wavelength_m > 0.0)) throw std::domain_error("photon_energy: wavelength must be > 0");
    return kPlanck * kLightSpeed / wavelength_m;
}

}  // namespace qdfr::units
