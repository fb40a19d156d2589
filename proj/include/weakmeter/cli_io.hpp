#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "weakmeter/experiment_sim.hpp"

namespace weakmeter {

// Every key the config grammar knows, resolved against the defaults. Angles
// are degrees throughout this layer.
struct ResolvedConfig {
    double theta_deg = 0.5;
    double phi_deg = 25.0;
    double phi_start_deg = -10.0;
    double phi_stop_deg = 10.0;
    double phi_step_deg = 1.0;
    double theta_start_deg = 0.0;
    double theta_stop_deg = 22.5;
    double theta_step_deg = 2.5;
    double v_hv = 1.0;
    double v_pm = 1.0;
    double monitor_fraction = 0.0;
    std::uint64_t n_photons = 1'000'000;
    std::uint64_t seed = 42;
    std::string post_select = "none";    // none | H | V | P | M | phi:<deg>
    std::string analysis = "pm_branch";  // pm_branch | hv_output
    bool exact = false;

    bool operator==(const ResolvedConfig&) const = default;
};

// Parse `key = value` text with # comments. Unknown keys, duplicates and
// out-of-range values raise ValidationError; malformed lines raise ParseError
// with a 1-based line number. The manifest echo keys (schema, command,
// config, out) are accepted and checked but carry no parameters, so a CSV
// header block can be fed back through this parser unchanged.
ResolvedConfig parse_config(const std::string& text);

// Post-selection token to state; "none" maps to no polarizer.
std::optional<PureState> post_select_state(const std::string& token);

ExperimentConfig to_experiment_config(const ResolvedConfig& rc);
SweepSpec to_sweep_spec(const ResolvedConfig& rc, SweepVariable variable);

// Provenance block written at the top of every emitted CSV.
struct RunManifest {
    std::string command;
    std::string config_path;
    std::string output_path;  // "-" for stdout
    ResolvedConfig config;

    std::vector<std::string> header_lines() const;  // "# key = value"
    std::string config_text() const;                // bare key = value document
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Shortest decimal form that parses back to the same double; NaN prints as
// "nan".
std::string format_double(double value);

// Manifest header, one column-name row, then data rows; '\n' line endings.
void emit_csv(std::ostream& out, const Table& table, const RunManifest& manifest);

// Entry point behind main(). args is argv without the program name. Returns
// 0 on success, 1 for unusable arguments or config, 2 for a run that failed
// after the config resolved.
int run(const std::vector<std::string>& args);

}  // namespace weakmeter
