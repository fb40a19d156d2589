#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weakmeter/meas_model.hpp"

namespace weakmeter {

// What sits behind the interferometer: a polarizer (pass/block counting, used
// with post-selection) or an H/V-resolving analyzer on each port.
enum class Analysis { pm_branch, hv_output };

struct ExperimentConfig {
    MeasurementSetting setting;
    Angle input_phi = Angle::degrees(25.0);
    std::optional<PureState> post_select;
    Analysis analysis = Analysis::pm_branch;
    double monitor_fraction = 0.0;  // photons skimmed off before the device
    std::uint64_t n_photons = 1'000'000;
    std::uint64_t seed = 42;
    bool exact = false;  // propagate probabilities instead of sampling

    void validate() const;
};

struct OutcomeCell {
    std::string label;
    double p = 0.0;
};

// Probabilities over the detector cells, in a fixed canonical order; the
// monitor tap sits outside the cell list.
struct OutcomeDistribution {
    std::vector<OutcomeCell> cells;
    double p_monitor = 0.0;

    double cell(const std::string& label) const;
    double total() const;
};

struct CountRecord {
    std::map<std::string, std::uint64_t> cells;
    std::uint64_t n_monitor = 0;

    std::uint64_t at(const std::string& label) const;
    std::uint64_t total() const;
};

enum class SweepVariable { phi, theta };

struct SweepSpec {
    SweepVariable variable = SweepVariable::phi;
    std::vector<Angle> grid;
    ExperimentConfig base;

    void validate() const;
};

struct ConditionalEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

// One row of a weak-value sweep. In exact mode the count columns hold
// expected counts and std_err is zero; a row whose post-selection passed
// nothing carries NaN estimates and n_pass = 0.
struct WeakSweepRow {
    double phi_deg = 0.0;
    double value_est = 0.0;
    double std_err = 0.0;
    double value_pred = 0.0;
    double weak_value = 0.0;  // 1/tan(phi); NaN at phi = 0
    double n_pass = 0.0;
    double n_block = 0.0;
};

struct TradeoffRow {
    double theta_deg = 0.0;
    double epsilon_est = 0.0;
    double epsilon_err = 0.0;
    double backaction_est = 0.0;
    double backaction_err = 0.0;
    double ellipse_residual = 0.0;
};

// Probabilities for every detector cell of the configured run. Cells are
// scaled by (1 - monitor_fraction); the whole set plus the monitor tap sums
// to one.
OutcomeDistribution outcome_distribution(const ExperimentConfig& cfg);

// One multinomial draw of n_photons over the outcome distribution,
// deterministic in (seed, config).
CountRecord simulate_counts(const ExperimentConfig& cfg);

// (n1 - n2) / ((n1 + n2) epsilon) with its binomial standard error
// 2/epsilon * sqrt(n1 n2 / (n1 + n2)^3). Accepts real-valued weights so the
// same code serves exact probabilities.
ConditionalEstimate estimate_conditional_value(double n_b1_pass, double n_b2_pass,
                                               double epsilon);
ConditionalEstimate estimate_conditional_value(const CountRecord& counts,
                                               double epsilon);

// Strong-measurement calibration run: diagonal input, no polarizer, and the
// branch count asymmetry (n_b1 - n_b2)/(n_b1 + n_b2) estimates the realized
// resolution v_hv * sin(4 theta).
double calibrate_epsilon(std::uint64_t n_photons, const MeasurementSetting& setting,
                         std::uint64_t seed);

// Post-selected sweep over the input angle. The estimator divides by the
// realized resolution v_hv * sin(4 theta); the predicted column uses the
// ideal eta of the base setting unless eta_override supplies a measured one.
std::vector<WeakSweepRow> sweep_weak_values(
    const SweepSpec& spec, std::optional<double> eta_override = std::nullopt);

// Resolution and back-action at each plate angle, from a bare branch-count
// run and an H/V-resolved run per point.
std::vector<TradeoffRow> sweep_tradeoff(const SweepSpec& spec);

}  // namespace weakmeter
