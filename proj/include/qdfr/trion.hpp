#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "qdfr/jones.hpp"
#include "qdfr/units.hpp"

// Steady-state optical response of the spin-selective trion transitions of a
// singly charged quantum dot. Level scheme: the resident electron in |down>
// couples to its trion through sigma-, |up> through sigma+ (Pauli blockade:
// only the transition of the occupied spin state exists). Under a magnetic
// field along the growth axis the two transitions split; the sigma+ line sits
// at +Delta_Z/2, the sigma- line at -Delta_Z/2 relative to the bare frequency.

namespace qdfr {

struct ChargingPlateau {
    double v_min = 0.0;  // volts
    double v_max = 0.0;
    bool contains(double v) const { return v >= v_min && v <= v_max; }
};

struct TrionParameters {
    // Gamma is the FWHM of the weak-probe power-contrast Lorentzian, stored
    // in angular units (rad/s). All GHz values in configs refer to Gamma/2pi.
    double gamma = 0.0;
    double alpha0 = 0.0;                  // peak extinction (power contrast at delta=0, s->0)
    double zeeman_split_per_tesla = 0.0;  // Hz per tesla
    double stark_slope = 0.0;             // Hz per volt, common to both lines
    double resonance_voltage_prep = 0.0;  // volts; Stark reference voltage
    ChargingPlateau plateau;
    double branching_ratio = 0.0;         // spin-flip Raman branching ratio
    double wavelength = 0.0;              // m, photon-energy conversion only

    double gamma_hz() const { return gamma / units::kTwoPi; }
    double gamma_ghz() const { return gamma / units::kTwoPi / 1e9; }

    // Zeeman splitting in angular units; signed so that field reversal mirrors
    // the two lines (needed for the sigma+/sigma- exchange symmetry).
    double zeeman_splitting(double b_field) const {
        return units::hz_to_angular(zeeman_split_per_tesla * b_field);
    }

    void validate() const {
        if (!(gamma > 0.0)) throw std::invalid_argument("TrionParameters: gamma must be > 0");
        if (!(alpha0 > 0.0 && alpha0 < 1.0))
            throw std::invalid_argument("TrionParameters: alpha0 must be in (0, 1)");
        if (!(branching_ratio > 0.0 && branching_ratio < 1.0))
            throw std::invalid_argument("TrionParameters: branching_ratio must be in (0, 1)");
        if (!(plateau.v_min < resonance_voltage_prep && resonance_voltage_prep < plateau.v_max))
            throw std::invalid_argument(
                "TrionParameters: resonance_voltage_prep must lie inside the plateau");
        if (!(zeeman_split_per_tesla > 0.0))
            throw std::invalid_argument("TrionParameters: zeeman_split_per_tesla must be > 0");
        if (!(wavelength > 0.0)) throw std::invalid_argument("TrionParameters: wavelength must be > 0");
        if (!std::isfinite(stark_slope))
            throw std::invalid_argument("TrionParameters: stark_slope must be finite");
    }

    static TrionParameters defaults() {
        TrionParameters p;
        p.gamma = units::ghz_to_angular(0.30);
        p.alpha0 = 0.0045;
        p.zeeman_split_per_tesla = 26e9;
        p.stark_slope = 15e9 / 35e-3;  // 15 GHz over the 415->450 mV stretch
        p.resonance_voltage_prep = 0.415;
        p.plateau = {0.390, 0.450};
        p.branching_ratio = 1e-4;
        p.wavelength = 950e-9;
        return p;
    }
};

struct SpinState {
    enum class Kind { Up, Down, Mixed, Singlet };
    Kind kind = Kind::Mixed;
    double rho = 0.0;  // polarization P_up - P_down, Mixed only

    static SpinState up() { return {Kind::Up, 1.0}; }
    static SpinState down() { return {Kind::Down, -1.0}; }
    static SpinState singlet() { return {Kind::Singlet, 0.0}; }
    static SpinState mixed(double rho) {
        if (!(rho >= -1.0 && rho <= 1.0))
            throw std::domain_error("SpinState: rho must be in [-1, 1]");
        return {Kind::Mixed, rho};
    }
    bool is_pure() const { return kind == Kind::Up || kind == Kind::Down; }
};

struct ProbeField {
    double detuning = 0.0;  // rad/s from the bare line at the reference voltage
    double power = 0.0;     // W at the dot
    double p_sat = 20e-9;   // W at which rabi == gamma
    JonesVector polarization = JonesVector::linear_x();

    double rabi(const TrionParameters& p) const {
        if (!(power >= 0.0)) throw std::domain_error("ProbeField: power must be >= 0");
        if (!(p_sat > 0.0)) throw std::domain_error("ProbeField: p_sat must be > 0");
        return p.gamma * std::sqrt(power / p_sat);
    }
};

// Complex amplitude transmission coefficients for the two circular components.
struct ComplexResponse {
    complexd t_plus{1.0, 0.0};
    complexd t_minus{1.0, 0.0};
    static ComplexResponse identity() { return {}; }
};

// s = (Omega^2/2)/(delta^2 + Gamma^2/4); on resonance s = 2 Omega^2/Gamma^2.
inline double saturation_parameter(double rabi, double delta, const TrionParameters& p) {
    return (rabi * rabi / 2.0) / (delta * delta + p.gamma * p.gamma / 4.0);
}

// Weak-probe transmission of one trion line:
//   t(delta) = 1 - (alpha0/2) / (1+s) / (1 - 2 i delta / Gamma)
// Real/imag parts are formed explicitly so the even/odd parity in delta is
// exact in floating point.
inline complexd complex_transmission(double delta, const TrionParameters& p, double saturation_s) {
    if (!std::isfinite(delta)) throw std::domain_error("complex_transmission: non-finite detuning");
    if (!(saturation_s >= 0.0)) throw std::domain_error("complex_transmission: s must be >= 0");
    const double q = 2.0 * delta / p.gamma;
    const double k = (p.alpha0 / 2.0) / (1.0 + saturation_s);
    const double lor = 1.0 / (1.0 + q * q);
    return {1.0 - k * lor, -k * q * lor};
}

struct TransitionDetunings {
    double plus;   // detuning of the probe from the sigma+ (spin-up) line
    double minus;  // from the sigma- (spin-down) line
};

// delta_pm = probe_offset - [ +/- Delta_Z(B)/2 + stark_slope (V - V_ref) ]
inline TransitionDetunings transition_detunings(double probe_freq_offset, double gate_voltage,
                                                double b_field, const TrionParameters& p) {
    if (!std::isfinite(b_field)) throw std::domain_error("transition_detunings: non-finite field");
    const double half_zeeman = 0.5 * p.zeeman_splitting(b_field);
    const double stark = units::hz_to_angular(p.stark_slope * (gate_voltage - p.resonance_voltage_prep));
    return {probe_freq_offset - (half_zeeman + stark), probe_freq_offset - (-half_zeeman + stark)};
}

// Conditional response: the occupied spin state exposes exactly one circular
// component to its transition; the other component passes untouched. Outside
// the charging plateau (empty dot or two-electron singlet) there is no trion
// and the response is the identity.
inline ComplexResponse response_for_spin(const SpinState& spin, const ProbeField& probe,
                                         double gate_voltage, double b_field,
                                         const TrionParameters& p) {
    if (!std::isfinite(gate_voltage))
        throw std::domain_error("response_for_spin: non-finite gate voltage");
    if (spin.kind == SpinState::Kind::Mixed)
        throw std::logic_error(
            "response_for_spin: a mixed state has no single amplitude response; "
            "average detector observables over the pure states (see mixed_reading)");
    if (spin.kind == SpinState::Kind::Singlet || !p.plateau.contains(gate_voltage))
        return ComplexResponse::identity();

    const TransitionDetunings d = transition_detunings(probe.detuning, gate_voltage, b_field, p);
    const double omega = probe.rabi(p);
    ComplexResponse r;
    if (spin.kind == SpinState::Kind::Up) {
        r.t_plus = complex_transmission(d.plus, p, saturation_parameter(omega, d.plus, p));
    } else {
        r.t_minus = complex_transmission(d.minus, p, saturation_parameter(omega, d.minus, p));
    }
    return r;
}

// Total photon scattering rate of a driven line: R = (Gamma/2) s/(1+s).
inline double scattering_rate(double rabi, double delta, const TrionParameters& p) {
    if (!(rabi >= 0.0)) throw std::domain_error("scattering_rate: rabi must be >= 0");
    const double s = saturation_parameter(rabi, delta, p);
    return 0.5 * p.gamma * s / (1.0 + s);
}

}  // namespace qdfr
