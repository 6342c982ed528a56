#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdfr/budget.hpp"
#include "qdfr/config.hpp"
#include "qdfr/scan.hpp"
#include "qdfr/spin_dynamics.hpp"
#include "qdfr/units.hpp"

// Output writers. The primary format is comma-separated text with a '#'
// comment header that embeds the subcommand, seed and fully resolved config,
// which is what makes --replay byte-exact. A JSON variant carries the same
// content. Floats are printed shortest-roundtrip; no timestamps anywhere.

namespace qdfr::io {

inline std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct OutputMeta {
    std::string subcommand;
    json config;  // resolved
    std::uint64_t seed = 0;
};

inline void write_header(std::ostream& os, const OutputMeta& meta,
                         const std::vector<std::string>& columns) {
    os << "# qdfr v1\n";
    os << "# subcommand: " << meta.subcommand << "\n";
    os << "# seed: " << meta.seed << "\n";
    os << "# config: " << meta.config.dump() << "\n";
    os << "# columns: ";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
}

inline std::vector<std::string> dataset_columns(const Dataset& ds) {
    std::vector<std::string> cols;
    cols.push_back(ds.axis_names.at(0));
    if (ds.axis_names.size() > 1) cols.push_back(ds.axis_names.at(1));
    cols.insert(cols.end(), {"sum_photons_per_s", "diff_photons_per_s", "diff_contrast",
                             "theta_urad", "rho_prepared"});
    return cols;
}

inline void write_dataset_csv(std::ostream& os, const Dataset& ds, const OutputMeta& meta) {
    write_header(os, meta, dataset_columns(ds));
    if (!ds.series_labels.empty()) {
        os << "# series:";
        for (const auto& label : ds.series_labels) os << " " << label;
        os << "\n";
    }
    const std::size_t n2 = ds.n2();
    for (std::size_t i = 0; i < ds.n1(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const DataPoint& pt = ds.at(i, j);
            os << format_double(ds.axis1[i]);
            if (!ds.axis2.empty()) os << "," << format_double(ds.axis2[j]);
            os << "," << format_double(pt.sum) << "," << format_double(pt.diff) << ","
               << format_double(pt.diff_contrast) << "," << format_double(units::rad_to_urad(pt.theta))
               << "," << format_double(pt.rho_prepared) << "\n";
        }
    }
}

inline json dataset_json(const Dataset& ds, const OutputMeta& meta) {
    json rows = json::array();
    const std::size_t n2 = ds.n2();
    for (std::size_t i = 0; i < ds.n1(); ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const DataPoint& pt = ds.at(i, j);
            json row = json::array();
            row.push_back(ds.axis1[i]);
            if (!ds.axis2.empty()) row.push_back(ds.axis2[j]);
            row.push_back(pt.sum);
            row.push_back(pt.diff);
            row.push_back(pt.diff_contrast);
            row.push_back(units::rad_to_urad(pt.theta));
            row.push_back(pt.rho_prepared);
            rows.push_back(std::move(row));
        }
    }
    return json{{"tool", "qdfr"},         {"version", 1},
                {"subcommand", meta.subcommand}, {"seed", meta.seed},
                {"config", meta.config},  {"columns", dataset_columns(ds)},
                {"series", ds.series_labels}, {"data", std::move(rows)}};
}

inline const char* kSnrConventionNote =
    "snr convention: single-state signal diff = 2*theta*N against noise sqrt(N); "
    "t_snr1 uses the conditional swing 2*theta between the spin states, "
    "t_snr1 = 1/(16 theta^2 detected_flux)";

inline void write_budget_text(std::ostream& os, const BudgetReport& rep, const OutputMeta& meta) {
    write_header(os, meta, {});
    os << "photon_scatter_interval_s = " << format_double(rep.photon_scatter_interval) << "\n";
    os << "spin_flip_interval_s = " << format_double(rep.spin_flip_interval) << "\n";
    os << "theta_rad = " << format_double(rep.theta) << "\n";
    os << "theta_urad = " << format_double(units::rad_to_urad(rep.theta)) << "\n";
    os << "detected_flux_per_s = " << format_double(rep.detected_flux) << "\n";
    os << "t_snr1_s = " << format_double(rep.t_snr1) << "\n";
    os << "n_backaction_at_snr1 = " << format_double(rep.n_backaction_at_snr1) << "\n";
    os << "qnd_margin = " << format_double(rep.qnd_margin) << "\n";
    os << "probe_detuning_active_ghz = "
       << format_double(units::angular_to_ghz(rep.probe_detuning_active)) << "\n";
    os << "# " << kSnrConventionNote << "\n";
}

inline json budget_json(const BudgetReport& rep, const OutputMeta& meta) {
    return json{{"tool", "qdfr"},
                {"version", 1},
                {"subcommand", meta.subcommand},
                {"seed", meta.seed},
                {"config", meta.config},
                {"snr_convention", kSnrConventionNote},
                {"report",
                 {{"photon_scatter_interval_s", rep.photon_scatter_interval},
                  {"spin_flip_interval_s", rep.spin_flip_interval},
                  {"theta_rad", rep.theta},
                  {"detected_flux_per_s", rep.detected_flux},
                  {"t_snr1_s", rep.t_snr1},
                  {"n_backaction_at_snr1", rep.n_backaction_at_snr1},
                  {"qnd_margin", rep.qnd_margin},
                  {"probe_detuning_active_ghz", units::angular_to_ghz(rep.probe_detuning_active)}}}};
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const OutputMeta& meta) {
    write_header(os, meta, {"t_start_s", "hidden_spin", "diff_count", "sum_count"});
    os << "# bin_duration_s: " << format_double(traj.bin_duration) << "\n";
    os << "# jump_count: " << traj.jump_count << "\n";
    for (std::size_t i = 0; i < traj.bins.size(); ++i) {
        const TrajectoryBin& b = traj.bins[i];
        os << format_double(static_cast<double>(i) * traj.bin_duration) << ","
           << static_cast<int>(b.spin) << "," << b.diff_count << "," << b.sum_count << "\n";
    }
}

inline std::string serialize_trajectory(const Trajectory& traj, const OutputMeta& meta) {
    std::ostringstream ss;
    write_trajectory_csv(ss, traj, meta);
    return ss.str();
}

// --replay support: pull the embedded subcommand/seed/config back out of an
// output file, either format.
inline OutputMeta read_embedded_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigMissingError("replay file not found: " + path);
    std::string first;
    if (!std::getline(in, first)) throw ConfigParseError("replay file is empty: " + path);
    OutputMeta meta;
    if (!first.empty() && first[0] == '{') {
        in.seekg(0);
        json doc;
        try {
            in >> doc;
        } catch (const json::parse_error& e) {
            throw ConfigParseError("replay: bad JSON in " + path + ": " + e.what());
        }
        if (!doc.contains("subcommand") || !doc.contains("config"))
            throw ConfigParseError("replay: " + path + " does not embed subcommand/config");
        meta.subcommand = doc.at("subcommand").get<std::string>();
        meta.config = doc.at("config");
        meta.seed = doc.value("seed", 0ull);
        return meta;
    }
    std::string line = first;
    bool have_sub = false, have_cfg = false;
    do {
        if (line.rfind("# subcommand: ", 0) == 0) {
            meta.subcommand = line.substr(14);
            have_sub = true;
        } else if (line.rfind("# seed: ", 0) == 0) {
            meta.seed = std::stoull(line.substr(8));
        } else if (line.rfind("# config: ", 0) == 0) {
            try {
                meta.config = json::parse(line.substr(10));
            } catch (const json::parse_error& e) {
                throw ConfigParseError("replay: bad embedded config in " + path + ": " + e.what());
            }
            have_cfg = true;
        } else if (!line.empty() && line[0] != '#') {
            break;
        }
    } while (std::getline(in, line));
    if (!have_sub || !have_cfg)
        throw ConfigParseError("replay: " + path + " does not embed subcommand/config");
    return meta;
}

}  // namespace qdfr::io
