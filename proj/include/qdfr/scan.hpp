#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qdfr/budget.hpp"
#include "qdfr/polarimetry.hpp"
#include "qdfr/rng.hpp"
#include "qdfr/spin_dynamics.hpp"
#include "qdfr/trion.hpp"

// Sweep engine: 1D spectra, gate-voltage sweeps and 2D voltage x detuning
// maps. Grid points are independent; evaluation may run on several threads
// but output order and per-point noise streams are fixed by the grid index.

namespace qdfr {

enum class NoiseMode { None, Shot };

// Two-zone cotunneling model: a configurable randomization rate inside a band
// of width zone_width at either plateau edge, a base rate elsewhere. The edge
// zones reproduce the "cotunneling regime" in which pumping is defeated and
// the spin stays mixed.
struct CotunnelingModel {
    double base_rate = 0.0;   // 1/s
    double edge_rate = 0.0;   // 1/s
    double zone_width = 0.0;  // volts

    double rate_at(double v, const ChargingPlateau& plateau) const {
        if (zone_width > 0.0 &&
            (v <= plateau.v_min + zone_width || v >= plateau.v_max - zone_width))
            return base_rate + edge_rate;
        return base_rate;
    }
};

// Everything a single grid point needs. Axis setters mutate a copy of this.
struct OperatingPoint {
    TrionParameters trion;
    ProbeField probe;               // detuning relative to the bare line
    double probe_ref_offset = 0.0;  // rad/s added when an axis sets probe_detuning_ghz
    PrepLaser prep;
    double b_field = 0.0;       // tesla
    double gate_voltage = 0.0;  // volts
    double efficiency = 0.1;
    double analysis_angle = 0.0;  // rad
    double t1_natural = 0.0;      // s
    CotunnelingModel cotunneling;
};

using AxisSetter = void (*)(OperatingPoint&, double);

inline const std::map<std::string, AxisSetter>& sweepable_parameters() {
    static const std::map<std::string, AxisSetter> table = {
        {"gate_voltage_mv", [](OperatingPoint& op, double v) { op.gate_voltage = units::mv_to_v(v); }},
        {"b_field_t", [](OperatingPoint& op, double v) { op.b_field = v; }},
        {"probe_detuning_ghz",
         [](OperatingPoint& op, double v) {
             op.probe.detuning = units::ghz_to_angular(v) + op.probe_ref_offset;
         }},
        {"probe_power_nw", [](OperatingPoint& op, double v) { op.probe.power = units::nw_to_w(v); }},
        {"prep_detuning_ghz",
         [](OperatingPoint& op, double v) { op.prep.detuning = units::ghz_to_angular(v); }},
        {"prep_power_nw", [](OperatingPoint& op, double v) { op.prep.power = units::nw_to_w(v); }},
    };
    return table;
}

struct AxisSpec {
    std::string parameter;
    double lo = 0.0;
    double hi = 0.0;
    int points = 0;
};

struct SweepSpec {
    AxisSpec axis1;
    std::optional<AxisSpec> axis2;
    double measurement_time = 0.1;  // s per point
    NoiseMode noise = NoiseMode::None;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct DataPoint {
    double sum = 0.0;            // photons/s, detected
    double diff = 0.0;           // photons/s, detected
    double diff_contrast = 0.0;  // diff / (efficiency * incident flux)
    double theta = 0.0;          // rad
    double rho_prepared = 0.0;
};

struct Dataset {
    std::vector<std::string> axis_names;
    std::vector<double> axis1;
    std::vector<double> axis2;  // empty for 1D
    std::vector<std::string> series_labels;  // optional annotation of axis2 values
    std::vector<DataPoint> points;  // axis1-major
    double measurement_time = 0.0;
    NoiseMode noise = NoiseMode::None;
    std::uint64_t seed = 0;

    std::size_t n1() const { return axis1.size(); }
    std::size_t n2() const { return axis2.empty() ? 1 : axis2.size(); }
    const DataPoint& at(std::size_t i, std::size_t j = 0) const { return points[i * n2() + j]; }
};

namespace detail {

inline AxisSetter find_axis_setter(const std::string& name) {
    const auto& table = sweepable_parameters();
    const auto it = table.find(name);
    if (it == table.end()) {
        std::string msg = "unknown sweep parameter '" + name + "'; valid parameters:";
        for (const auto& [key, fn] : table) msg += " " + key;
        throw std::invalid_argument(msg);
    }
    return it->second;
}

inline std::vector<double> axis_grid(const AxisSpec& axis) {
    if (!(axis.points >= 2)) throw std::invalid_argument("sweep axis needs at least 2 points");
    if (!(std::isfinite(axis.lo) && std::isfinite(axis.hi)))
        throw std::invalid_argument("sweep axis range must be finite");
    std::vector<double> g(static_cast<std::size_t>(axis.points));
    const double step = (axis.hi - axis.lo) / static_cast<double>(axis.points - 1);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = axis.lo + step * static_cast<double>(i);
    g.back() = axis.hi;
    return g;
}

inline DataPoint evaluate_point(const OperatingPoint& op, double measurement_time, NoiseMode noise,
                                std::uint64_t point_seed) {
    DataPoint out;
    const double incident = probe_flux(op.probe, op.trion);
    const double detected_scale = op.efficiency * incident;
    if (!op.trion.plateau.contains(op.gate_voltage)) {
        // no resident single electron: identity response, exactly no rotation
        out.sum = detected_scale;
        out.diff = 0.0;
    } else {
        double rho = 0.0;
        if (op.prep.line != PumpLine::Off) {
            rho = preparation_steady_state(op.prep.detuning_at(op.gate_voltage, op.trion),
                                           op.prep.rabi(op.trion), op.gate_voltage, op.trion,
                                           op.cotunneling.rate_at(op.gate_voltage, op.trion.plateau),
                                           op.t1_natural, op.prep.line);
        }
        const PolarimeterReading r = mixed_reading(rho, op.probe, op.gate_voltage, op.b_field,
                                                   op.trion, op.analysis_angle, op.efficiency);
        out.sum = r.sum;
        out.diff = r.diff;
        out.rho_prepared = rho;
    }
    if (noise == NoiseMode::Shot && out.sum > 0.0) {
        // Gaussian shot noise on the difference counts, variance = sum * T
        rng::Stream stream(point_seed);
        const double sigma_counts = std::sqrt(out.sum * measurement_time);
        out.diff += stream.normal() * sigma_counts / measurement_time;
    }
    out.theta = extract_theta(out.diff, out.sum);
    out.diff_contrast = detected_scale > 0.0 ? out.diff / detected_scale : 0.0;
    return out;
}

template <typename PointFn>
inline void parallel_for(std::size_t n, int threads, PointFn&& fn) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

inline Dataset run_sweep(const SweepSpec& spec, const OperatingPoint& base) {
    base.trion.validate();
    const AxisSetter set1 = detail::find_axis_setter(spec.axis1.parameter);
    AxisSetter set2 = nullptr;

    Dataset ds;
    ds.axis_names.push_back(spec.axis1.parameter);
    ds.axis1 = detail::axis_grid(spec.axis1);
    if (spec.axis2) {
        set2 = detail::find_axis_setter(spec.axis2->parameter);
        ds.axis_names.push_back(spec.axis2->parameter);
        ds.axis2 = detail::axis_grid(*spec.axis2);
    }
    ds.measurement_time = spec.measurement_time;
    ds.noise = spec.noise;
    ds.seed = spec.seed;

    const std::size_t n2 = ds.n2();
    const std::size_t total = ds.n1() * n2;
    ds.points.resize(total);
    detail::parallel_for(total, spec.threads, [&](std::size_t idx) {
        OperatingPoint op = base;
        set1(op, ds.axis1[idx / n2]);
        if (set2) set2(op, ds.axis2[idx % n2]);
        ds.points[idx] = detail::evaluate_point(op, spec.measurement_time, spec.noise,
                                                rng::derive_seed(spec.seed, idx));
    });
    return ds;
}

inline Dataset run_map(const SweepSpec& spec, const OperatingPoint& base) {
    if (!spec.axis2) throw std::invalid_argument("run_map: a second axis is required");
    return run_sweep(spec, base);
}

// Faraday rotation angle versus preparation-laser detuning. Each probe
// detuning (given relative to the sigma+ line) is paired with both pump
// polarizations: the sigma- pump prepares |up> (the probe then sees its
// sigma+ line at the quoted detuning), the sigma+ pump prepares |down>
// (active line one Zeeman splitting further away).
inline Dataset rotation_vs_preparation(const std::vector<double>& probe_detunings_ghz,
                                       const AxisSpec& prep_axis, const OperatingPoint& base) {
    base.trion.validate();
    if (prep_axis.parameter != "prep_detuning_ghz")
        throw std::invalid_argument("rotation_vs_preparation: axis must be prep_detuning_ghz");
    if (probe_detunings_ghz.empty())
        throw std::invalid_argument("rotation_vs_preparation: need at least one probe detuning");

    const double half_zeeman = 0.5 * base.trion.zeeman_splitting(base.b_field);
    for (const double ghz : probe_detunings_ghz) {
        const double offset = units::ghz_to_angular(ghz) + half_zeeman;
        const TransitionDetunings d =
            transition_detunings(offset, base.trion.resonance_voltage_prep, base.b_field, base.trion);
        const double min_det = std::min(std::abs(d.plus), std::abs(d.minus));
        if (!(min_det > 10.0 * base.trion.gamma))
            throw std::invalid_argument(
                "rotation_vs_preparation: probe detuning must stay > 10 linewidths from both lines");
    }

    Dataset ds;
    ds.axis_names = {prep_axis.parameter, "series"};
    ds.axis1 = detail::axis_grid(prep_axis);
    ds.seed = 0;
    ds.noise = NoiseMode::None;

    for (const double ghz : probe_detunings_ghz) {
        for (const PumpLine line : {PumpLine::SigmaMinus, PumpLine::SigmaPlus}) {
            ds.axis2.push_back(static_cast<double>(ds.axis2.size()));
            ds.series_labels.push_back("probe_" + std::to_string(ghz) + "ghz_above_sigma_plus_prep_" +
                                       (line == PumpLine::SigmaMinus ? "sigma_minus" : "sigma_plus"));
        }
    }
    const std::size_t n2 = ds.axis2.size();
    ds.points.resize(ds.axis1.size() * n2);
    for (std::size_t i = 0; i < ds.axis1.size(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            OperatingPoint op = base;
            op.probe.detuning = units::ghz_to_angular(probe_detunings_ghz[j / 2]) + half_zeeman;
            op.prep.line = (j % 2 == 0) ? PumpLine::SigmaMinus : PumpLine::SigmaPlus;
            op.prep.detuning = units::ghz_to_angular(ds.axis1[i]);
            ds.points[i * n2 + j] =
                detail::evaluate_point(op, 0.0, NoiseMode::None, rng::derive_seed(0, i * n2 + j));
        }
    }
    return ds;
}

}  // namespace qdfr
