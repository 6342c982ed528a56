#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdfr/scan.hpp"
#include "qdfr/spin_dynamics.hpp"
#include "qdfr/trion.hpp"
#include "qdfr/units.hpp"

// Config ingestion. Files speak laboratory units with explicit suffixes
// (_ghz, _mv, _nw, _ms, _nm); this layer converts once into SI/angular and
// validates every constraint. Unknown keys are rejected with a suggestion,
// never ignored.

namespace qdfr {

using json = nlohmann::json;

struct ConfigMissingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t prev = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t cur = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                               prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
            prev = cur;
        }
    }
    return row[b.size()];
}

inline std::string nearest_key(const std::string& key, const json& schema_node) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& [k, v] : schema_node.items()) {
        const std::size_t d = edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

inline std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

// Every key of the default tree is the schema; user keys must exist there
// with a compatible JSON type.
inline void validate_keys(const json& user, const json& defaults, const std::string& path) {
    for (const auto& [key, value] : user.items()) {
        if (!defaults.contains(key)) {
            std::string msg = "unknown config key '" + join_path(path, key) + "'";
            const std::string hint = nearest_key(key, defaults);
            if (!hint.empty()) msg += "; nearest valid key: '" + join_path(path, hint) + "'";
            throw ConfigConstraintError(msg);
        }
        const json& def = defaults.at(key);
        const bool both_num = value.is_number() && def.is_number();
        const bool both_obj = value.is_object() && def.is_object();
        if (!both_num && !both_obj && value.type() != def.type()) {
            throw ConfigConstraintError("config key '" + join_path(path, key) +
                                        "' has the wrong type (expected " +
                                        std::string(def.type_name()) + ")");
        }
        if (both_obj) validate_keys(value, def, join_path(path, key));
    }
}

inline void require(bool ok, const std::string& key, const std::string& constraint) {
    if (!ok) throw ConfigConstraintError("config key '" + key + "' violates: " + constraint);
}

}  // namespace detail

inline json default_config() {
    return json{
        {"seed", -1},  // sentinel: a seed is required, there is no entropy default
        {"threads", 1},
        {"dot",
         {{"gamma_ghz", 0.30},
          {"alpha0", 0.0045},
          {"zeeman_ghz_per_tesla", 26.0},
          {"stark_ghz_per_volt", 15.0 / 0.035},
          {"resonance_voltage_mv", 415.0},
          {"plateau_mv", json::array({390.0, 450.0})},
          {"branching_ratio", 1e-4},
          {"wavelength_nm", 950.0}}},
        {"field", {{"b_tesla", 1.0}}},
        {"gate", {{"voltage_mv", 415.0}}},
        {"probe",
         {{"detuning_ghz", 92.0},
          {"reference", "sigma_minus"},
          {"power_nw", 1000.0},
          {"p_sat_nw", 20.0},
          {"polarization", "linear_x"}}},
        {"prep",
         {{"pump", "sigma_plus"},
          {"detuning_ghz", 0.0},
          {"power_nw", 1000.0},
          {"p_sat_nw", 20.0}}},
        {"detector", {{"efficiency", 0.1}, {"analysis_angle_deg", 45.0}}},
        {"spin",
         {{"t1_ms", 1.0},
          {"cotunneling_base_hz", 0.0},
          {"cotunneling_edge_hz", 0.0},
          {"cotunneling_zone_mv", 0.0}}},
        {"sweep",
         {{"parameter", "gate_voltage_mv"},
          {"from", 390.0},
          {"to", 460.0},
          {"points", 141},
          {"parameter2", ""},
          {"from2", 0.0},
          {"to2", 0.0},
          {"points2", 0},
          {"measurement_time_ms", 100.0},
          {"noise", "none"}}},
        {"trajectory",
         {{"duration_ms", 2000.0},
          {"bin_ms", 20.0},
          {"initial_spin", "stationary"},
          {"threshold", 0.0},
          {"optimize_threshold", true}}},
        {"budget", {{"spin", "down"}}},
    };
}

struct TrajectoryConfig {
    double duration = 0.0;  // s
    double bin = 0.0;       // s
    std::string initial_spin = "stationary";
    double threshold = 0.0;
    bool optimize_threshold = true;
};

struct RunConfig {
    TrionParameters trion;
    ProbeField probe;  // detuning already referenced to the bare line
    double probe_ref_offset = 0.0;
    PrepLaser prep;
    double b_field = 0.0;
    double gate_voltage = 0.0;
    double efficiency = 0.1;
    double analysis_angle = 0.0;
    double t1_natural = 0.0;
    CotunnelingModel cotunneling;
    SweepSpec sweep;
    TrajectoryConfig trajectory;
    SpinState budget_spin = SpinState::down();
    std::uint64_t seed = 0;
    int threads = 1;
    json resolved;  // fully defaulted echo, embedded in every output

    OperatingPoint operating_point() const {
        OperatingPoint op;
        op.trion = trion;
        op.probe = probe;
        op.probe_ref_offset = probe_ref_offset;
        op.prep = prep;
        op.b_field = b_field;
        op.gate_voltage = gate_voltage;
        op.efficiency = efficiency;
        op.analysis_angle = analysis_angle;
        op.t1_natural = t1_natural;
        op.cotunneling = cotunneling;
        return op;
    }
};

inline JonesVector parse_polarization(const std::string& text) {
    if (text == "linear_x") return JonesVector::linear_x();
    if (text == "linear_y") return JonesVector::linear_y();
    if (text == "circular" || text == "sigma_plus" || text == "circular_plus")
        return JonesVector::circular_plus();
    if (text == "sigma_minus" || text == "circular_minus") return JonesVector::circular_minus();
    if (text.rfind("linear:", 0) == 0) {
        try {
            return JonesVector::linear(units::deg_to_rad(std::stod(text.substr(7))));
        } catch (const std::exception&) {
            throw ConfigConstraintError("config key 'probe.polarization': bad angle in '" + text + "'");
        }
    }
    throw ConfigConstraintError(
        "config key 'probe.polarization': unknown value '" + text +
        "' (use linear_x, linear_y, linear:<deg>, circular, sigma_plus, sigma_minus)");
}

inline PumpLine parse_pump_line(const std::string& text) {
    if (text == "off") return PumpLine::Off;
    if (text == "sigma_plus") return PumpLine::SigmaPlus;
    if (text == "sigma_minus") return PumpLine::SigmaMinus;
    throw ConfigConstraintError("config key 'prep.pump': unknown value '" + text +
                                "' (use off, sigma_plus, sigma_minus)");
}

inline RunConfig config_from_json(const json& user) {
    const json defaults = default_config();
    detail::validate_keys(user, defaults, "");
    json merged = defaults;
    merged.merge_patch(user);

    RunConfig cfg;
    cfg.resolved = merged;

    const json& dot = merged.at("dot");
    cfg.trion.gamma = units::ghz_to_angular(dot.at("gamma_ghz").get<double>());
    cfg.trion.alpha0 = dot.at("alpha0").get<double>();
    cfg.trion.zeeman_split_per_tesla = dot.at("zeeman_ghz_per_tesla").get<double>() * 1e9;
    cfg.trion.stark_slope = dot.at("stark_ghz_per_volt").get<double>() * 1e9;
    cfg.trion.resonance_voltage_prep = units::mv_to_v(dot.at("resonance_voltage_mv").get<double>());
    const json& plateau = dot.at("plateau_mv");
    detail::require(plateau.is_array() && plateau.size() == 2, "dot.plateau_mv",
                    "must be [v_min_mv, v_max_mv]");
    cfg.trion.plateau = {units::mv_to_v(plateau[0].get<double>()),
                         units::mv_to_v(plateau[1].get<double>())};
    cfg.trion.branching_ratio = dot.at("branching_ratio").get<double>();
    cfg.trion.wavelength = units::nm_to_m(dot.at("wavelength_nm").get<double>());

    detail::require(cfg.trion.gamma > 0.0, "dot.gamma_ghz", "must be > 0");
    detail::require(cfg.trion.alpha0 > 0.0 && cfg.trion.alpha0 < 1.0, "dot.alpha0",
                    "must be in (0, 1)");
    detail::require(cfg.trion.branching_ratio > 0.0 && cfg.trion.branching_ratio < 1.0,
                    "dot.branching_ratio", "must be in (0, 1)");
    detail::require(cfg.trion.zeeman_split_per_tesla > 0.0, "dot.zeeman_ghz_per_tesla", "must be > 0");
    detail::require(cfg.trion.wavelength > 0.0, "dot.wavelength_nm", "must be > 0");
    detail::require(cfg.trion.plateau.v_min < cfg.trion.plateau.v_max, "dot.plateau_mv",
                    "v_min must be < v_max");
    detail::require(cfg.trion.plateau.contains(cfg.trion.resonance_voltage_prep) &&
                        cfg.trion.resonance_voltage_prep > cfg.trion.plateau.v_min &&
                        cfg.trion.resonance_voltage_prep < cfg.trion.plateau.v_max,
                    "dot.resonance_voltage_mv", "must lie strictly inside plateau_mv");

    cfg.b_field = merged.at("field").at("b_tesla").get<double>();
    detail::require(std::isfinite(cfg.b_field), "field.b_tesla", "must be finite");
    cfg.gate_voltage = units::mv_to_v(merged.at("gate").at("voltage_mv").get<double>());

    const json& probe = merged.at("probe");
    cfg.probe.power = units::nw_to_w(probe.at("power_nw").get<double>());
    cfg.probe.p_sat = units::nw_to_w(probe.at("p_sat_nw").get<double>());
    detail::require(cfg.probe.power >= 0.0, "probe.power_nw", "must be >= 0");
    detail::require(cfg.probe.p_sat > 0.0, "probe.p_sat_nw", "must be > 0");
    cfg.probe.polarization = parse_polarization(probe.at("polarization").get<std::string>());
    const std::string ref = probe.at("reference").get<std::string>();
    const double half_zeeman = 0.5 * cfg.trion.zeeman_splitting(cfg.b_field);
    if (ref == "bare") {
        cfg.probe_ref_offset = 0.0;
    } else if (ref == "sigma_plus") {
        cfg.probe_ref_offset = half_zeeman;
    } else if (ref == "sigma_minus") {
        cfg.probe_ref_offset = -half_zeeman;
    } else {
        throw ConfigConstraintError("config key 'probe.reference': unknown value '" + ref +
                                    "' (use bare, sigma_plus, sigma_minus)");
    }
    cfg.probe.detuning =
        units::ghz_to_angular(probe.at("detuning_ghz").get<double>()) + cfg.probe_ref_offset;

    const json& prep = merged.at("prep");
    cfg.prep.line = parse_pump_line(prep.at("pump").get<std::string>());
    cfg.prep.detuning = units::ghz_to_angular(prep.at("detuning_ghz").get<double>());
    cfg.prep.power = units::nw_to_w(prep.at("power_nw").get<double>());
    cfg.prep.p_sat = units::nw_to_w(prep.at("p_sat_nw").get<double>());
    detail::require(cfg.prep.power >= 0.0, "prep.power_nw", "must be >= 0");
    detail::require(cfg.prep.p_sat > 0.0, "prep.p_sat_nw", "must be > 0");

    const json& det = merged.at("detector");
    cfg.efficiency = det.at("efficiency").get<double>();
    detail::require(cfg.efficiency > 0.0 && cfg.efficiency <= 1.0, "detector.efficiency",
                    "must be in (0, 1]");
    cfg.analysis_angle = units::deg_to_rad(det.at("analysis_angle_deg").get<double>());

    const json& spin = merged.at("spin");
    const double t1_ms = spin.at("t1_ms").get<double>();
    detail::require(t1_ms >= 0.0, "spin.t1_ms", "must be >= 0 (0 disables natural relaxation)");
    cfg.t1_natural = units::ms_to_s(t1_ms);
    cfg.cotunneling.base_rate = spin.at("cotunneling_base_hz").get<double>();
    cfg.cotunneling.edge_rate = spin.at("cotunneling_edge_hz").get<double>();
    cfg.cotunneling.zone_width = units::mv_to_v(spin.at("cotunneling_zone_mv").get<double>());
    detail::require(cfg.cotunneling.base_rate >= 0.0, "spin.cotunneling_base_hz", "must be >= 0");
    detail::require(cfg.cotunneling.edge_rate >= 0.0, "spin.cotunneling_edge_hz", "must be >= 0");
    detail::require(cfg.cotunneling.zone_width >= 0.0, "spin.cotunneling_zone_mv", "must be >= 0");

    const json& sweep = merged.at("sweep");
    cfg.sweep.axis1 = {sweep.at("parameter").get<std::string>(), sweep.at("from").get<double>(),
                       sweep.at("to").get<double>(), sweep.at("points").get<int>()};
    detail::require(cfg.sweep.axis1.points >= 2, "sweep.points", "must be >= 2");
    const std::string param2 = sweep.at("parameter2").get<std::string>();
    if (!param2.empty()) {
        cfg.sweep.axis2 = AxisSpec{param2, sweep.at("from2").get<double>(),
                                   sweep.at("to2").get<double>(), sweep.at("points2").get<int>()};
        detail::require(cfg.sweep.axis2->points >= 2, "sweep.points2", "must be >= 2");
    }
    cfg.sweep.measurement_time = units::ms_to_s(sweep.at("measurement_time_ms").get<double>());
    detail::require(cfg.sweep.measurement_time > 0.0, "sweep.measurement_time_ms", "must be > 0");
    const std::string noise = sweep.at("noise").get<std::string>();
    if (noise == "none") {
        cfg.sweep.noise = NoiseMode::None;
    } else if (noise == "shot") {
        cfg.sweep.noise = NoiseMode::Shot;
    } else {
        throw ConfigConstraintError("config key 'sweep.noise': unknown value '" + noise +
                                    "' (use none, shot)");
    }

    const json& traj = merged.at("trajectory");
    cfg.trajectory.duration = units::ms_to_s(traj.at("duration_ms").get<double>());
    cfg.trajectory.bin = units::ms_to_s(traj.at("bin_ms").get<double>());
    detail::require(cfg.trajectory.bin > 0.0, "trajectory.bin_ms", "must be > 0");
    detail::require(cfg.trajectory.duration >= cfg.trajectory.bin, "trajectory.duration_ms",
                    "must cover at least one bin");
    cfg.trajectory.initial_spin = traj.at("initial_spin").get<std::string>();
    detail::require(cfg.trajectory.initial_spin == "stationary" ||
                        cfg.trajectory.initial_spin == "up" || cfg.trajectory.initial_spin == "down",
                    "trajectory.initial_spin", "must be stationary, up or down");
    cfg.trajectory.threshold = traj.at("threshold").get<double>();
    cfg.trajectory.optimize_threshold = traj.at("optimize_threshold").get<bool>();

    const std::string budget_spin = merged.at("budget").at("spin").get<std::string>();
    if (budget_spin == "up") {
        cfg.budget_spin = SpinState::up();
    } else if (budget_spin == "down") {
        cfg.budget_spin = SpinState::down();
    } else {
        throw ConfigConstraintError("config key 'budget.spin': must be up or down");
    }

    if (!merged.at("seed").is_number_integer() || merged.at("seed").get<std::int64_t>() < 0)
        throw ConfigConstraintError(
            "config key 'seed': a nonnegative integer seed is required (no entropy default)");
    cfg.seed = merged.at("seed").get<std::uint64_t>();
    cfg.sweep.seed = cfg.seed;

    cfg.threads = merged.at("threads").get<int>();
    detail::require(cfg.threads >= 1, "threads", "must be >= 1");
    cfg.sweep.threads = cfg.threads;

    cfg.trion.validate();
    return cfg;
}

// dotted-path override, e.g. apply_override(tree, "probe.power_nw", "500").
// The value is parsed as JSON when possible, else taken as a string.
inline void apply_override(json& tree, const std::string& key_path, const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(key_path);
    std::string part;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw UsageError("--set: empty key");
    json* node = &tree;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    (*node)[parts.back()] = parsed;
}

inline json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigMissingError("config file not found: " + path);
    json user;
    try {
        in >> user;
    } catch (const json::parse_error& e) {
        throw ConfigParseError("config parse error in " + path + ": " + e.what());
    }
    if (!user.is_object()) throw ConfigParseError("config root must be a JSON object: " + path);
    return user;
}

inline RunConfig load_config(const std::string& path) { return config_from_json(read_config_file(path)); }

}  // namespace qdfr
