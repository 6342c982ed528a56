#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qdfr/polarimetry.hpp"
#include "qdfr/rng.hpp"
#include "qdfr/trion.hpp"

// Optical spin pumping and stochastic quantum-jump trajectories. The trion is
// treated adiabatically (rates only; R_sc << Gamma everywhere in the operating
// regime), so the hidden state is a two-level continuous-time Markov chain.

namespace qdfr {

enum class PumpLine { Off, SigmaPlus, SigmaMinus };

struct PrepLaser {
    PumpLine line = PumpLine::Off;
    double detuning = 0.0;  // rad/s from the pumped line at the reference voltage
    double power = 0.0;     // W
    double p_sat = 20e-9;   // W

    double rabi(const TrionParameters& p) const {
        if (!(power >= 0.0)) throw std::domain_error("PrepLaser: power must be >= 0");
        return p.gamma * std::sqrt(power / p_sat);
    }
    // Both lines Stark-shift together, so at gate voltage V the pump sits
    // detuning - stark_slope*(V - V_ref) from its line.
    double detuning_at(double gate_voltage, const TrionParameters& p) const {
        return detuning -
               units::hz_to_angular(p.stark_slope * (gate_voltage - p.resonance_voltage_prep));
    }
};

// Spin pumping steady state. The pump empties the addressed spin state via
// spin-flip Raman scattering at R_p = beta * R_sc; cotunneling and natural
// relaxation at kappa = kappa_cot + 1/(2 T1) each way pull back toward the
// mixed state:  |rho| = R_p / (R_p + 2 kappa).
// A sigma- pump shelves the electron in |up> (rho -> +1), sigma+ in |down>.
inline double preparation_steady_state(double prep_detuning_from_pumped_line, double prep_rabi,
                                       double gate_voltage, const TrionParameters& p,
                                       double cotunneling_rate, double t1_natural,
                                       PumpLine pumped_line) {
    if (!(cotunneling_rate >= 0.0))
        throw std::domain_error("preparation_steady_state: cotunneling rate must be >= 0");
    if (pumped_line == PumpLine::Off) return 0.0;
    if (!p.plateau.contains(gate_voltage)) return 0.0;

    const double pump_rate =
        p.branching_ratio * scattering_rate(prep_rabi, prep_detuning_from_pumped_line, p);
    double kappa = cotunneling_rate;
    if (t1_natural > 0.0) kappa += 0.5 / t1_natural;

    double magnitude;
    if (pump_rate + 2.0 * kappa <= 0.0) {
        magnitude = 0.0;
    } else {
        magnitude = pump_rate / (pump_rate + 2.0 * kappa);
    }
    return (pumped_line == PumpLine::SigmaMinus) ? magnitude : -magnitude;
}

struct RateSet {
    double flip_up_to_down = 0.0;  // 1/s
    double flip_down_to_up = 0.0;
    double t1_natural = 0.0;  // s, the configured natural lifetime (kept for reporting)

    double stationary_rho() const {
        const double total = flip_up_to_down + flip_down_to_up;
        if (!(total > 0.0)) return 0.0;
        return (flip_down_to_up - flip_up_to_down) / total;
    }
};

// Total flip rates seen by the hidden spin: probe-induced spin-flip Raman
// scattering on whichever transition the occupied state exposes, natural
// relaxation 1/(2 T1) each way, and the preparation pump if present.
inline RateSet build_rate_set(const ProbeField& probe, const PrepLaser& prep, double gate_voltage,
                              double b_field, const TrionParameters& p, double t1_natural) {
    RateSet r;
    r.t1_natural = t1_natural;
    if (t1_natural > 0.0) {
        r.flip_up_to_down = r.flip_down_to_up = 0.5 / t1_natural;
    }
    if (p.plateau.contains(gate_voltage)) {
        const TransitionDetunings d = transition_detunings(probe.detuning, gate_voltage, b_field, p);
        const double omega = probe.rabi(p);
        r.flip_up_to_down += p.branching_ratio * scattering_rate(omega, d.plus, p);
        r.flip_down_to_up += p.branching_ratio * scattering_rate(omega, d.minus, p);
        if (prep.line != PumpLine::Off) {
            const double pump =
                p.branching_ratio *
                scattering_rate(prep.rabi(p), prep.detuning_at(gate_voltage, p), p);
            if (prep.line == PumpLine::SigmaMinus) {
                r.flip_down_to_up += pump;  // empties |down>
            } else {
                r.flip_up_to_down += pump;
            }
        }
    }
    return r;
}

struct TrajectoryBin {
    std::int8_t spin;  // +1 up, -1 down: majority occupant of the bin
    std::int64_t diff_count;
    std::int64_t sum_count;
};

struct Trajectory {
    double bin_duration = 0.0;  // s
    std::uint64_t seed = 0;
    std::vector<TrajectoryBin> bins;
    std::uint64_t jump_count = 0;
    double occupancy_up = 0.0;  // time-averaged
    // analytic per-second detector means of the two pure states, for
    // classification polarity and oracle tests
    double diff_rate_up = 0.0, diff_rate_down = 0.0;
    double sum_rate_up = 0.0, sum_rate_down = 0.0;
};

inline Trajectory simulate_trajectory(const TrionParameters& p, const ProbeField& probe,
                                      double gate_voltage, double b_field, const RateSet& rates,
                                      double duration, double bin, double efficiency,
                                      double analysis_angle, std::uint64_t seed,
                                      std::optional<SpinState::Kind> initial_spin = std::nullopt) {
    if (!(bin > 0.0)) throw std::invalid_argument("simulate_trajectory: bin must be > 0");
    if (!(duration >= bin))
        throw std::invalid_argument("simulate_trajectory: duration must cover at least one bin");
    if (!(rates.flip_up_to_down >= 0.0 && rates.flip_down_to_up >= 0.0))
        throw std::invalid_argument("simulate_trajectory: rates must be >= 0");

    const PolarimeterReading up =
        pure_state_reading(SpinState::up(), probe, gate_voltage, b_field, p, analysis_angle, efficiency);
    const PolarimeterReading down = pure_state_reading(SpinState::down(), probe, gate_voltage,
                                                       b_field, p, analysis_angle, efficiency);

    Trajectory traj;
    traj.bin_duration = bin;
    traj.seed = seed;
    traj.diff_rate_up = up.diff;
    traj.diff_rate_down = down.diff;
    traj.sum_rate_up = up.sum;
    traj.sum_rate_down = down.sum;

    const auto n_bins = static_cast<std::size_t>(duration / bin);
    traj.bins.reserve(n_bins);
    rng::Stream rng(seed);

    bool is_up;
    if (initial_spin) {
        if (*initial_spin != SpinState::Kind::Up && *initial_spin != SpinState::Kind::Down)
            throw std::invalid_argument("simulate_trajectory: initial spin must be pure");
        is_up = (*initial_spin == SpinState::Kind::Up);
    } else {
        const double p_up = 0.5 * (1.0 + rates.stationary_rho());
        is_up = rng.uniform() < p_up;
    }

    double total_up_time = 0.0;
    for (std::size_t i = 0; i < n_bins; ++i) {
        double t_left = bin;
        double up_time = 0.0;
        for (;;) {
            const double rate_out = is_up ? rates.flip_up_to_down : rates.flip_down_to_up;
            if (!(rate_out > 0.0)) {
                if (is_up) up_time += t_left;
                break;
            }
            const double dwell = rng.exponential(rate_out);
            if (dwell >= t_left) {  // memoryless: re-drawing next bin is equivalent
                if (is_up) up_time += t_left;
                break;
            }
            if (is_up) up_time += dwell;
            t_left -= dwell;
            is_up = !is_up;
            ++traj.jump_count;
        }
        total_up_time += up_time;
        const double f_up = up_time / bin;
        const double lam_x = bin * (f_up * up.i_x + (1.0 - f_up) * down.i_x);
        const double lam_y = bin * (f_up * up.i_y + (1.0 - f_up) * down.i_y);
        const std::int64_t nx = rng.poisson(lam_x);
        const std::int64_t ny = rng.poisson(lam_y);
        traj.bins.push_back({static_cast<std::int8_t>(f_up >= 0.5 ? 1 : -1), nx - ny, nx + ny});
    }
    traj.occupancy_up = total_up_time / (static_cast<double>(n_bins) * bin);
    return traj;
}

struct FidelityEstimate {
    double fidelity = 0.5;
    double threshold = 0.0;
    bool degenerate = false;  // trajectory never left one spin state
    bool optimized = false;
};

namespace detail {
inline double threshold_accuracy(const std::vector<TrajectoryBin>& bins, double threshold,
                                 bool high_is_up) {
    std::size_t match = 0;
    for (const auto& b : bins) {
        const bool classified_up = (static_cast<double>(b.diff_count) >= threshold) == high_is_up;
        if (classified_up == (b.spin > 0)) ++match;
    }
    return static_cast<double>(match) / static_cast<double>(bins.size());
}
}  // namespace detail

// Threshold classification of the per-bin difference counts against the
// hidden spin record. The classifier family includes both sign conventions,
// so the returned accuracy is never below chance.
inline FidelityEstimate estimate_readout_fidelity(const Trajectory& traj, double threshold,
                                                  bool optimize_threshold = false) {
    if (traj.bins.size() < 100)
        throw std::invalid_argument("estimate_readout_fidelity: need at least 100 bins");

    const bool high_is_up = traj.diff_rate_up >= traj.diff_rate_down;
    const bool any_up = std::any_of(traj.bins.begin(), traj.bins.end(),
                                    [](const TrajectoryBin& b) { return b.spin > 0; });
    const bool any_down = std::any_of(traj.bins.begin(), traj.bins.end(),
                                      [](const TrajectoryBin& b) { return b.spin < 0; });
    if (!(any_up && any_down)) return {1.0, threshold, true, optimize_threshold};

    FidelityEstimate est;
    est.degenerate = false;
    est.optimized = optimize_threshold;
    if (!optimize_threshold) {
        const double acc = detail::threshold_accuracy(traj.bins, threshold, high_is_up);
        est.fidelity = std::max(acc, 1.0 - acc);
        est.threshold = threshold;
        return est;
    }

    std::vector<double> cuts;
    cuts.reserve(traj.bins.size() + 1);
    {
        std::vector<double> diffs;
        diffs.reserve(traj.bins.size());
        for (const auto& b : traj.bins) diffs.push_back(static_cast<double>(b.diff_count));
        std::sort(diffs.begin(), diffs.end());
        diffs.erase(std::unique(diffs.begin(), diffs.end()), diffs.end());
        cuts.push_back(diffs.front() - 1.0);
        for (std::size_t i = 0; i + 1 < diffs.size(); ++i)
            cuts.push_back(0.5 * (diffs[i] + diffs[i + 1]));
        cuts.push_back(diffs.back() + 1.0);
    }
    est.fidelity = 0.0;
    for (const double cut : cuts) {
        const double acc = detail::threshold_accuracy(traj.bins, cut, high_is_up);
        const double best = std::max(acc, 1.0 - acc);
        if (best > est.fidelity) {
            est.fidelity = best;
            est.threshold = cut;
        }
    }
    return est;
}

}  // namespace qdfr
