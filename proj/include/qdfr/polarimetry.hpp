#pragma once

#include <cmath>
#include <stdexcept>

#include "qdfr/jones.hpp"
#include "qdfr/trion.hpp"
#include "qdfr/units.hpp"

// Balanced polarimetry: the transmitted field passes a polarizing beam
// splitter whose analysis basis is rotated by analysis_angle from the input
// linear polarization; two photodiodes record the arms. Their sum carries the
// absorptive response, their difference the dispersive (rotation) response.

namespace qdfr {

struct PolarimeterReading {
    double i_x = 0.0;  // photons/s, post detector efficiency
    double i_y = 0.0;
    double sum = 0.0;
    double diff = 0.0;
    double theta = 0.0;        // extracted rotation angle, rad
    double ellipticity = 0.0;  // extracted ellipticity angle, rad
};

inline JonesVector propagate(const JonesVector& input, const ComplexResponse& response) {
    return {response.t_plus * input.sigma_plus, response.t_minus * input.sigma_minus};
}

// Faraday rotation angle of the transmitted polarization.
// theta = (arg t+ - arg t-)/2; spin-down with the probe blue of its sigma-
// line gives theta > 0.
inline double faraday_angle(const ComplexResponse& response) {
    return 0.5 * (std::arg(response.t_plus) - std::arg(response.t_minus));
}

// theta extraction used throughout: theta = asin(diff/sum)/2, exact for a pure
// rotation in the balanced (45 degree) configuration; biased by ellipticity at
// order alpha0*theta, negligible for alpha0 << 1.
inline double extract_theta(double diff, double sum) {
    if (!(sum > 0.0)) return 0.0;
    const double r = std::clamp(diff / sum, -1.0, 1.0);
    return 0.5 * std::asin(r);
}

inline PolarimeterReading detect(const JonesVector& field, double analysis_angle, double flux_in,
                                 double efficiency) {
    if (!(efficiency > 0.0 && efficiency <= 1.0))
        throw std::invalid_argument("detect: efficiency must be in (0, 1]");
    const auto [ex, ey] = field.to_linear();
    const double c = std::cos(analysis_angle);
    const double s = std::sin(analysis_angle);
    const complexd px = ex * c + ey * s;
    const complexd py = -ex * s + ey * c;
    PolarimeterReading r;
    r.i_x = efficiency * flux_in * std::norm(px);
    r.i_y = efficiency * flux_in * std::norm(py);
    r.sum = r.i_x + r.i_y;
    r.diff = r.i_x - r.i_y;
    r.theta = extract_theta(r.diff, r.sum);
    r.ellipticity = ellipticity_angle(field);
    return r;
}

// Incident photon flux at the dot from the probe power.
inline double probe_flux(const ProbeField& probe, const TrionParameters& p) {
    return probe.power / units::photon_energy(p.wavelength);
}

inline PolarimeterReading pure_state_reading(const SpinState& spin, const ProbeField& probe,
                                             double gate_voltage, double b_field,
                                             const TrionParameters& p, double analysis_angle,
                                             double efficiency) {
    const ComplexResponse resp = response_for_spin(spin, probe, gate_voltage, b_field, p);
    return detect(propagate(probe.polarization, resp), analysis_angle, probe_flux(probe, p),
                  efficiency);
}

// Classically mixed spin: detector intensities are population-weighted means
// of the two pure-state readings, never amplitude averages. theta is
// re-extracted from the averaged channels.
inline PolarimeterReading mixed_reading(double rho, const ProbeField& probe, double gate_voltage,
                                        double b_field, const TrionParameters& p,
                                        double analysis_angle, double efficiency) {
    if (!(rho >= -1.0 && rho <= 1.0)) throw std::domain_error("mixed_reading: rho must be in [-1, 1]");
    const PolarimeterReading up =
        pure_state_reading(SpinState::up(), probe, gate_voltage, b_field, p, analysis_angle, efficiency);
    const PolarimeterReading down = pure_state_reading(SpinState::down(), probe, gate_voltage, b_field,
                                                       p, analysis_angle, efficiency);
    const double w_up = 0.5 * (1.0 + rho);
    const double w_down = 0.5 * (1.0 - rho);
    PolarimeterReading r;
    r.i_x = w_up * up.i_x + w_down * down.i_x;
    r.i_y = w_up * up.i_y + w_down * down.i_y;
    r.sum = r.i_x + r.i_y;
    r.diff = r.i_x - r.i_y;
    r.theta = extract_theta(r.diff, r.sum);
    r.ellipticity = w_up * up.ellipticity + w_down * down.ellipticity;
    return r;
}

}  // namespace qdfr
