#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "qnd/params.hpp"

namespace qnd {

/// One swept variable on a regular grid.
struct SweepConfig {
    std::string variable;  ///< e.g. "delta_omega", "epsilon", "lambda11"
    double min = 0.0;
    double max = 0.0;
    int points = 2;
    std::string spacing = "linear";  ///< "linear" or "log"

    std::vector<double> grid() const;
};

/// Full run description parsed from a plain-text config file. Sections:
/// [system], [ancilla], [coupling], [geometry], [sweep], [sweep2],
/// [output], [run]. Every field is optional and keeps its default when
/// absent; unknown sections or keys are rejected by name.
struct RunConfig {
    SystemParams system;
    AncillaParams ancilla;
    CouplingParams coupling;
    BeamGeometry geometry;
    bool has_geometry = false;

    std::vector<SweepConfig> sweeps;  ///< at most 2

    std::string output_path;          ///< empty = stdout
    std::string output_format = "csv";  ///< "csv" or "json"

    std::uint64_t seed = 1;
    double tolerance = 1e-8;  ///< generic solver tolerance override
};

/// Parses the INI-like format: `[section]` headers, `key = value` lines,
/// `#` or `;` comments, blank lines ignored. Occupations may be given
/// directly (`occupation_thermal = ...`) or as a frequency/temperature
/// pair (`omega1 = ...` plus `temperature_thermal = ...` in SI units).
/// Throws std::runtime_error naming the line number and offending key on
/// any malformed or unknown input.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

}  // namespace qnd
