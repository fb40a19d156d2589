#include "weakmeter/experiment_sim.hpp"

#include <cmath>
#include <limits>

#include "weakmeter/rng.hpp"

namespace weakmeter {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double clamp0(double p) { return p < 0.0 ? 0.0 : p; }

}  // namespace

void ExperimentConfig::validate() const {
    setting.validate();
    if (n_photons < 1) throw DomainError("n_photons must be at least 1");
    if (!(monitor_fraction >= 0.0 && monitor_fraction < 1.0))
        throw DomainError("monitor_fraction must lie in [0, 1)");
    if (post_select) {
        if (std::abs(post_select->norm2() - 1.0) > 1e-12)
            throw InvalidState("post_select state must be normalized");
        if (analysis == Analysis::hv_output)
            throw ValidationError(
                "post_select cannot be combined with hv_output analysis; the "
                "polarizer already fixes the output polarization");
    }
}

double OutcomeDistribution::cell(const std::string& label) const {
    for (const auto& c : cells)
        if (c.label == label) return c.p;
    throw DomainError("unknown outcome label '" + label + "'");
}

double OutcomeDistribution::total() const {
    double sum = p_monitor;
    for (const auto& c : cells) sum += c.p;
    return sum;
}

std::uint64_t CountRecord::at(const std::string& label) const {
    const auto it = cells.find(label);
    return it == cells.end() ? 0 : it->second;
}

std::uint64_t CountRecord::total() const {
    std::uint64_t sum = n_monitor;
    for (const auto& [label, n] : cells) sum += n;
    return sum;
}

void SweepSpec::validate() const {
    base.validate();
    if (grid.empty()) throw ValidationError("sweep grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double step = grid[i].deg() - grid[i - 1].deg();
        const double first = grid[1].deg() - grid[0].deg();
        if (step == 0.0 || step * first <= 0.0)
            throw ValidationError("sweep grid must be strictly monotone");
    }
}

OutcomeDistribution outcome_distribution(const ExperimentConfig& cfg) {
    cfg.validate();
    const DensityMatrix rho_in = DensityMatrix::pure(input_state(cfg.input_phi));
    const BranchPair bp = branch_states(rho_in, cfg.setting);
    const double keep = 1.0 - cfg.monitor_fraction;

    OutcomeDistribution dist;
    if (cfg.post_select) {
        const PureState pass = *cfg.post_select;
        const PureState block = orthogonal(pass);
        dist.cells = {
            {"b1_pass", keep * clamp0(projection_prob(pass, bp.b1))},
            {"b1_block", keep * clamp0(projection_prob(block, bp.b1))},
            {"b2_pass", keep * clamp0(projection_prob(pass, bp.b2))},
            {"b2_block", keep * clamp0(projection_prob(block, bp.b2))},
        };
    } else if (cfg.analysis == Analysis::hv_output) {
        dist.cells = {
            {"b1_H", keep * clamp0(bp.b1.m.hh.real())},
            {"b1_V", keep * clamp0(bp.b1.m.vv.real())},
            {"b2_H", keep * clamp0(bp.b2.m.hh.real())},
            {"b2_V", keep * clamp0(bp.b2.m.vv.real())},
        };
    } else {
        dist.cells = {
            {"b1", keep * clamp0(bp.b1.trace_real())},
            {"b2", keep * clamp0(bp.b2.trace_real())},
        };
    }
    dist.p_monitor = cfg.monitor_fraction;
    return dist;
}

CountRecord simulate_counts(const ExperimentConfig& cfg) {
    const OutcomeDistribution dist = outcome_distribution(cfg);
    const std::size_t k = dist.cells.size();

    // Cumulative cell boundaries; the monitor tap takes [cum[k-1], 1). With
    // no monitor the last cell absorbs the remainder so summation rounding
    // cannot leak counts into a zero-probability tap.
    std::vector<double> cum(k + 1, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        acc += dist.cells[i].p;
        cum[i] = acc;
    }
    cum[k] = 1.0;
    if (cfg.monitor_fraction == 0.0) cum[k - 1] = 1.0;

    std::vector<std::uint64_t> counts(k + 1, 0);
    CounterRng rng(cfg.seed);
    for (std::uint64_t i = 0; i < cfg.n_photons; ++i) {
        const double u = rng.next_unit();
        std::size_t j = 0;
        while (u >= cum[j]) ++j;
        ++counts[j];
    }

    CountRecord rec;
    for (std::size_t i = 0; i < k; ++i) rec.cells[dist.cells[i].label] = counts[i];
    rec.n_monitor = counts[k];
    return rec;
}

ConditionalEstimate estimate_conditional_value(double n_b1_pass, double n_b2_pass,
                                               double epsilon) {
    if (std::abs(epsilon) <= 1e-12)
        throw ZeroResolution("epsilon is zero; the conditional value is undefined");
    if (!(n_b1_pass >= 0.0) || !(n_b2_pass >= 0.0))
        throw DomainError("pass weights must be non-negative");
    const double n = n_b1_pass + n_b2_pass;
    if (n <= 0.0)
        throw NoPostSelectedCounts("no photons passed the post-selection");
    const double value = (n_b1_pass - n_b2_pass) / (n * epsilon);
    const double std_error =
        (2.0 / std::abs(epsilon)) * std::sqrt(n_b1_pass * n_b2_pass / (n * n * n));
    return {value, std_error};
}

ConditionalEstimate estimate_conditional_value(const CountRecord& counts,
                                               double epsilon) {
    return estimate_conditional_value(double(counts.at("b1_pass")),
                                      double(counts.at("b2_pass")), epsilon);
}

double calibrate_epsilon(std::uint64_t n_photons, const MeasurementSetting& setting,
                         std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.setting = setting;
    cfg.input_phi = Angle::degrees(45.0);
    cfg.analysis = Analysis::pm_branch;
    cfg.n_photons = n_photons;
    cfg.seed = seed;
    const CountRecord rec = simulate_counts(cfg);
    const double n1 = double(rec.at("b1"));
    const double n2 = double(rec.at("b2"));
    return (n1 - n2) / (n1 + n2);
}

std::vector<WeakSweepRow> sweep_weak_values(const SweepSpec& spec,
                                            std::optional<double> eta_override) {
    spec.validate();
    if (spec.variable != SweepVariable::phi)
        throw ValidationError("weak-value sweep expects a phi grid");
    if (!spec.base.post_select)
        throw ValidationError("weak-value sweep requires post_select");

    const double eps_eff =
        spec.base.setting.v_hv * epsilon_ideal(spec.base.setting.theta);
    const double eta_pred =
        eta_override ? *eta_override : eta_ideal(spec.base.setting.theta);

    std::vector<WeakSweepRow> rows;
    rows.reserve(spec.grid.size());
    for (std::size_t k = 0; k < spec.grid.size(); ++k) {
        const Angle phi = spec.grid[k];
        ExperimentConfig cfg = spec.base;
        cfg.input_phi = phi;
        cfg.seed = CounterRng::derive(spec.base.seed, k);

        WeakSweepRow row;
        row.phi_deg = phi.deg();
        row.value_pred = predicted_exp_value_phi(phi, eta_pred);
        const double wv = 1.0 / std::tan(phi.rad());
        row.weak_value = std::isfinite(wv) ? wv : kNan;

        double n1 = 0.0;
        double n2 = 0.0;
        if (cfg.exact) {
            const OutcomeDistribution d = outcome_distribution(cfg);
            const double n = double(cfg.n_photons);
            n1 = d.cell("b1_pass") * n;
            n2 = d.cell("b2_pass") * n;
            row.n_block = (d.cell("b1_block") + d.cell("b2_block")) * n;
        } else {
            const CountRecord rec = simulate_counts(cfg);
            n1 = double(rec.at("b1_pass"));
            n2 = double(rec.at("b2_pass"));
            row.n_block = double(rec.at("b1_block") + rec.at("b2_block"));
        }
        row.n_pass = n1 + n2;
        if (row.n_pass > 0.0) {
            const ConditionalEstimate est =
                estimate_conditional_value(n1, n2, eps_eff);
            row.value_est = est.value;
            row.std_err = cfg.exact ? 0.0 : est.std_error;
        } else {
            row.value_est = kNan;
            row.std_err = kNan;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<TradeoffRow> sweep_tradeoff(const SweepSpec& spec) {
    spec.validate();
    if (spec.variable != SweepVariable::theta)
        throw ValidationError("trade-off sweep expects a theta grid");
    if (spec.base.post_select)
        throw ValidationError("trade-off sweep runs without a polarizer");

    const DensityMatrix rho_in =
        DensityMatrix::pure(input_state(spec.base.input_phi));
    const double s_pm = stokes_pm(rho_in);
    const double s_hv = stokes_hv(rho_in);
    if (std::abs(s_pm) <= 1e-9 || std::abs(s_hv) <= 1e-9)
        throw UnpolarizedInput(
            "input must carry both diagonal and H/V polarization; tilt phi away "
            "from 0, 45 and 90 degrees");

    std::vector<TradeoffRow> rows;
    rows.reserve(spec.grid.size());
    for (std::size_t k = 0; k < spec.grid.size(); ++k) {
        ExperimentConfig branch_cfg = spec.base;
        branch_cfg.setting.theta = spec.grid[k];
        branch_cfg.analysis = Analysis::pm_branch;
        branch_cfg.seed = CounterRng::derive(spec.base.seed, 2 * k);
        ExperimentConfig hv_cfg = branch_cfg;
        hv_cfg.analysis = Analysis::hv_output;
        hv_cfg.seed = CounterRng::derive(spec.base.seed, 2 * k + 1);

        TradeoffRow row;
        row.theta_deg = spec.grid[k].deg();
        if (spec.base.exact) {
            const OutcomeDistribution d1 = outcome_distribution(branch_cfg);
            const double w1 = d1.cell("b1");
            const double w2 = d1.cell("b2");
            const double p1 = w1 / (w1 + w2);
            row.epsilon_est = resolution_from_stats(p1, 1.0 - p1, s_pm);

            const OutcomeDistribution d2 = outcome_distribution(hv_cfg);
            const double wh = d2.cell("b1_H") + d2.cell("b2_H");
            const double wv = d2.cell("b1_V") + d2.cell("b2_V");
            const double ph = wh / (wh + wv);
            row.backaction_est = backaction_from_stats(ph, 1.0 - ph, s_hv);
        } else {
            const CountRecord rec1 = simulate_counts(branch_cfg);
            const double nb = double(rec1.at("b1") + rec1.at("b2"));
            if (nb <= 0.0)
                throw NoPostSelectedCounts("no photons reached the branch detectors");
            const double p1 = double(rec1.at("b1")) / nb;
            row.epsilon_est = resolution_from_stats(p1, 1.0 - p1, s_pm);
            row.epsilon_err =
                2.0 * std::sqrt(p1 * (1.0 - p1) / nb) / std::abs(s_pm);

            const CountRecord rec2 = simulate_counts(hv_cfg);
            const double nh = double(rec2.total() - rec2.n_monitor);
            if (nh <= 0.0)
                throw NoPostSelectedCounts("no photons reached the output analyzers");
            const double ph = double(rec2.at("b1_H") + rec2.at("b2_H")) / nh;
            row.backaction_est = backaction_from_stats(ph, 1.0 - ph, s_hv);
            row.backaction_err =
                2.0 * std::sqrt(ph * (1.0 - ph) / nh) / std::abs(s_hv);
        }
        row.ellipse_residual = ellipse_residual(
            {row.epsilon_est, row.backaction_est, spec.grid[k]},
            spec.base.setting.v_hv, spec.base.setting.v_pm);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace weakmeter
