#include "weakmeter/cli_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "weakmeter/rng.hpp"

namespace weakmeter {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_number(const std::string& value, int line, const std::string& key) {
    double out = 0.0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(line, "key '" + key + "': '" + value + "' is not a number");
    if (!std::isfinite(out))
        throw ValidationError("key '" + key + "' must be finite");
    return out;
}

std::uint64_t parse_count(const std::string& value, int line, const std::string& key) {
    std::uint64_t out = 0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(line,
                         "key '" + key + "': '" + value + "' is not a non-negative integer");
    return out;
}

bool parse_bool(const std::string& value, int line, const std::string& key) {
    const std::string v = lower(value);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ParseError(line, "key '" + key + "': expected true or false, got '" + value + "'");
}

std::string canonical_post_select(const std::string& value, int line) {
    const std::string low = lower(value);
    if (low == "none") return "none";
    if (low == "h") return "H";
    if (low == "v") return "V";
    if (low == "p") return "P";
    if (low == "m") return "M";
    if (low.rfind("phi:", 0) == 0) {
        const double deg = parse_number(trim(value.substr(4)), line, "post_select");
        return "phi:" + format_double(deg);
    }
    throw ValidationError(
        "post_select must be one of H, V, P, M, none, or phi:<deg>; got '" + value + "'");
}

std::string canonical_analysis(const std::string& value) {
    const std::string low = lower(value);
    if (low == "pm_branch" || low == "hv_output") return low;
    throw ValidationError("analysis must be pm_branch or hv_output; got '" + value + "'");
}

void check_bounds(const ResolvedConfig& rc) {
    const auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(rc.v_hv)) throw ValidationError("v_hv must lie in [0, 1]");
    if (!in01(rc.v_pm)) throw ValidationError("v_pm must lie in [0, 1]");
    if (!(rc.monitor_fraction >= 0.0 && rc.monitor_fraction < 1.0))
        throw ValidationError("monitor_fraction must lie in [0, 1)");
    if (rc.n_photons < 1) throw ValidationError("n_photons must be at least 1");
    if (rc.phi_step_deg == 0.0) throw ValidationError("phi_step_deg must be nonzero");
    if (rc.theta_step_deg == 0.0)
        throw ValidationError("theta_step_deg must be nonzero");
    if ((rc.phi_stop_deg - rc.phi_start_deg) * rc.phi_step_deg < 0.0)
        throw ValidationError("phi range and phi_step_deg disagree in direction");
    if ((rc.theta_stop_deg - rc.theta_start_deg) * rc.theta_step_deg < 0.0)
        throw ValidationError("theta range and theta_step_deg disagree in direction");
}

std::vector<Angle> build_grid(double start, double stop, double step) {
    const double span = (stop - start) / step;
    const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    std::vector<Angle> grid;
    grid.reserve(count);
    for (std::size_t k = 0; k < count; ++k)
        grid.push_back(Angle::degrees(start + double(k) * step));
    return grid;
}

}  // namespace

ResolvedConfig parse_config(const std::string& text) {
    ResolvedConfig rc;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(lineno, "missing key before '='");
        if (value.empty())
            throw ParseError(lineno, "missing value for key '" + key + "'");
        if (!seen.insert(key).second)
            throw ValidationError("duplicate key '" + key + "' (line " +
                                  std::to_string(lineno) + ")");

        if (key == "theta_deg") rc.theta_deg = parse_number(value, lineno, key);
        else if (key == "phi_deg") rc.phi_deg = parse_number(value, lineno, key);
        else if (key == "phi_start_deg") rc.phi_start_deg = parse_number(value, lineno, key);
        else if (key == "phi_stop_deg") rc.phi_stop_deg = parse_number(value, lineno, key);
        else if (key == "phi_step_deg") rc.phi_step_deg = parse_number(value, lineno, key);
        else if (key == "theta_start_deg") rc.theta_start_deg = parse_number(value, lineno, key);
        else if (key == "theta_stop_deg") rc.theta_stop_deg = parse_number(value, lineno, key);
        else if (key == "theta_step_deg") rc.theta_step_deg = parse_number(value, lineno, key);
        else if (key == "v_hv") rc.v_hv = parse_number(value, lineno, key);
        else if (key == "v_pm") rc.v_pm = parse_number(value, lineno, key);
        else if (key == "monitor_fraction") rc.monitor_fraction = parse_number(value, lineno, key);
        else if (key == "n_photons") rc.n_photons = parse_count(value, lineno, key);
        else if (key == "seed") rc.seed = parse_count(value, lineno, key);
        else if (key == "exact") rc.exact = parse_bool(value, lineno, key);
        else if (key == "post_select") rc.post_select = canonical_post_select(value, lineno);
        else if (key == "analysis") rc.analysis = canonical_analysis(value);
        else if (key == "schema") {
            if (parse_count(value, lineno, key) != 1)
                throw ValidationError("schema 1 is the only supported version");
        } else if (key == "command" || key == "config" || key == "out") {
            // Manifest echo keys; validated as present but carry no parameters.
        } else {
            throw ValidationError("unknown key '" + key + "' (line " +
                                  std::to_string(lineno) + ")");
        }
    }
    check_bounds(rc);
    return rc;
}

std::optional<PureState> post_select_state(const std::string& token) {
    if (token == "none") return std::nullopt;
    if (token == "H") return PureState::horizontal();
    if (token == "V") return PureState::vertical();
    if (token == "P") return PureState::diagonal_p();
    if (token == "M") return PureState::diagonal_m();
    if (token.rfind("phi:", 0) == 0) {
        double deg = 0.0;
        const std::string num = token.substr(4);
        const char* end = num.data() + num.size();
        const auto [ptr, ec] = std::from_chars(num.data(), end, deg);
        if (ec == std::errc{} && ptr == end)
            return input_state(Angle::degrees(deg));
    }
    throw ValidationError("unrecognized post_select token '" + token + "'");
}

ExperimentConfig to_experiment_config(const ResolvedConfig& rc) {
    ExperimentConfig cfg;
    cfg.setting.theta = Angle::degrees(rc.theta_deg);
    cfg.setting.v_hv = rc.v_hv;
    cfg.setting.v_pm = rc.v_pm;
    cfg.input_phi = Angle::degrees(rc.phi_deg);
    cfg.post_select = post_select_state(rc.post_select);
    cfg.analysis = rc.analysis == "hv_output" ? Analysis::hv_output : Analysis::pm_branch;
    cfg.monitor_fraction = rc.monitor_fraction;
    cfg.n_photons = rc.n_photons;
    cfg.seed = rc.seed;
    cfg.exact = rc.exact;
    cfg.validate();
    return cfg;
}

SweepSpec to_sweep_spec(const ResolvedConfig& rc, SweepVariable variable) {
    SweepSpec spec;
    spec.variable = variable;
    spec.base = to_experiment_config(rc);
    spec.grid = variable == SweepVariable::phi
                    ? build_grid(rc.phi_start_deg, rc.phi_stop_deg, rc.phi_step_deg)
                    : build_grid(rc.theta_start_deg, rc.theta_stop_deg,
                                 rc.theta_step_deg);
    spec.validate();
    return spec;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::vector<std::string> RunManifest::header_lines() const {
    const auto& c = config;
    const std::vector<std::pair<std::string, std::string>> entries = {
        {"schema", "1"},
        {"command", command},
        {"config", config_path},
        {"out", output_path},
        {"theta_deg", format_double(c.theta_deg)},
        {"phi_deg", format_double(c.phi_deg)},
        {"phi_start_deg", format_double(c.phi_start_deg)},
        {"phi_stop_deg", format_double(c.phi_stop_deg)},
        {"phi_step_deg", format_double(c.phi_step_deg)},
        {"theta_start_deg", format_double(c.theta_start_deg)},
        {"theta_stop_deg", format_double(c.theta_stop_deg)},
        {"theta_step_deg", format_double(c.theta_step_deg)},
        {"v_hv", format_double(c.v_hv)},
        {"v_pm", format_double(c.v_pm)},
        {"monitor_fraction", format_double(c.monitor_fraction)},
        {"n_photons", std::to_string(c.n_photons)},
        {"seed", std::to_string(c.seed)},
        {"post_select", c.post_select},
        {"analysis", c.analysis},
        {"exact", c.exact ? "true" : "false"},
    };
    std::vector<std::string> lines;
    lines.reserve(entries.size());
    for (const auto& [key, value] : entries) lines.push_back("# " + key + " = " + value);
    return lines;
}

std::string RunManifest::config_text() const {
    std::string text;
    for (const auto& line : header_lines()) text += line.substr(2) + "\n";
    return text;
}

void emit_csv(std::ostream& out, const Table& table, const RunManifest& manifest) {
    for (const auto& line : manifest.header_lines()) out << line << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out << ',';
        out << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw DomainError("table row width does not match the column count");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_double(row[i]);
        }
        out << '\n';
    }
}

namespace {

Table weak_sweep_table(const std::vector<WeakSweepRow>& rows) {
    Table t;
    t.columns = {"phi_deg", "value_est", "std_err", "value_pred",
                 "weak_value", "n_pass", "n_block"};
    for (const auto& r : rows)
        t.rows.push_back({r.phi_deg, r.value_est, r.std_err, r.value_pred,
                          r.weak_value, r.n_pass, r.n_block});
    return t;
}

Table tradeoff_table(const std::vector<TradeoffRow>& rows) {
    Table t;
    t.columns = {"theta_deg", "epsilon_est", "epsilon_err", "backaction_est",
                 "backaction_err", "ellipse_residual"};
    for (const auto& r : rows)
        t.rows.push_back({r.theta_deg, r.epsilon_est, r.epsilon_err,
                          r.backaction_est, r.backaction_err, r.ellipse_residual});
    return t;
}

Table calibrate_table(const ResolvedConfig& rc) {
    const MeasurementSetting setting{Angle::degrees(rc.theta_deg), rc.v_hv, rc.v_pm};
    const double model = rc.v_hv * epsilon_ideal(setting.theta);
    const double est =
        rc.exact ? model : calibrate_epsilon(rc.n_photons, setting, rc.seed);
    Table t;
    t.columns = {"epsilon_est", "epsilon_model", "n_photons"};
    t.rows.push_back({est, model, double(rc.n_photons)});
    return t;
}

Table eval_table(const ResolvedConfig& rc) {
    const ExperimentConfig cfg = to_experiment_config(rc);
    const DensityMatrix rho = DensityMatrix::pure(input_state(cfg.input_phi));
    const auto [p1, p2] = output_probabilities(rho, cfg.setting);
    const double eps_id = epsilon_ideal(cfg.setting.theta);
    const double eps_eff = cfg.setting.v_hv * eps_id;
    const double backaction =
        1.0 - cfg.setting.v_pm * std::cos(4.0 * cfg.setting.theta.rad());

    double value_cond = kNan;
    double value_pred = kNan;
    double wv = kNan;
    if (cfg.post_select) {
        const PureState psi = input_state(cfg.input_phi);
        const auto [c1, c2] = conditional_probabilities(rho, cfg.setting, *cfg.post_select);
        value_cond = experimental_value_from_probs(c1, c2, eps_eff);
        value_pred = predicted_exp_value(psi, *cfg.post_select, cfg.setting.theta);
        wv = weak_value(psi, *cfg.post_select, stokes_pm_op());
    }

    Table t;
    t.columns = {"phi_deg", "theta_deg", "epsilon_ideal", "eta_ideal",
                 "epsilon_eff", "backaction", "p_b1", "p_b2",
                 "value_cond", "value_pred", "weak_value"};
    t.rows.push_back({rc.phi_deg, rc.theta_deg, eps_id, eta_ideal(cfg.setting.theta),
                      eps_eff, backaction, p1, p2, value_cond, value_pred, wv});
    return t;
}

std::uint64_t parse_seed_arg(const std::string& value) {
    std::uint64_t out = 0;
    const char* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw ValidationError("--seed expects a non-negative integer, got '" + value + "'");
    return out;
}

void usage(std::ostream& err) {
    err << "usage: weakmeter <weak-sweep|tradeoff|calibrate|eval> --config <path>"
           " [--out <path>] [--seed <n>] [--exact]\n";
}

}  // namespace

int run(const std::vector<std::string>& args) {
    if (args.empty()) {
        usage(std::cerr);
        return 1;
    }
    const std::string command = args[0];
    if (command != "weak-sweep" && command != "tradeoff" && command != "calibrate" &&
        command != "eval") {
        std::cerr << "unknown command '" << command << "'\n";
        usage(std::cerr);
        return 1;
    }

    std::optional<std::string> config_path;
    std::optional<std::string> out_path;
    std::optional<std::uint64_t> seed_override;
    bool exact_override = false;
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        const auto take_value = [&](const char* flag) -> const std::string& {
            if (i + 1 >= args.size())
                throw ValidationError(std::string(flag) + " needs a value");
            return args[++i];
        };
        try {
            if (arg == "--config") config_path = take_value("--config");
            else if (arg == "--out") out_path = take_value("--out");
            else if (arg == "--seed") seed_override = parse_seed_arg(take_value("--seed"));
            else if (arg == "--exact") exact_override = true;
            else throw ValidationError("unknown argument '" + arg + "'");
        } catch (const Error& e) {
            std::cerr << e.what() << '\n';
            usage(std::cerr);
            return 1;
        }
    }
    if (!config_path) {
        std::cerr << "missing required --config <path>\n";
        usage(std::cerr);
        return 1;
    }

    std::ifstream file(*config_path);
    if (!file) {
        std::cerr << "cannot open config file: " << *config_path << '\n';
        return 1;
    }
    std::ostringstream slurp;
    slurp << file.rdbuf();

    ResolvedConfig rc;
    SweepSpec spec;
    try {
        rc = parse_config(slurp.str());
        if (seed_override) rc.seed = *seed_override;
        if (exact_override) rc.exact = true;
        if (command == "weak-sweep") {
            if (rc.post_select == "none")
                throw ValidationError(
                    "weak-sweep requires post_select (H, V, P, M, or phi:<deg>)");
            spec = to_sweep_spec(rc, SweepVariable::phi);
        } else if (command == "tradeoff") {
            spec = to_sweep_spec(rc, SweepVariable::theta);
        } else {
            to_experiment_config(rc);
        }
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }

    const RunManifest manifest{command, *config_path, out_path.value_or("-"), rc};
    Table table;
    try {
        if (command == "weak-sweep") {
            const auto rows = sweep_weak_values(spec);
            const bool all_empty =
                std::all_of(rows.begin(), rows.end(),
                            [](const WeakSweepRow& r) { return r.n_pass <= 0.0; });
            if (all_empty)
                throw NoPostSelectedCounts("post-selection passed nothing on any row");
            table = weak_sweep_table(rows);
        } else if (command == "tradeoff") {
            table = tradeoff_table(sweep_tradeoff(spec));
        } else if (command == "calibrate") {
            table = calibrate_table(rc);
        } else {
            table = eval_table(rc);
        }
    } catch (const Error& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 2;
    }

    if (out_path) {
        std::ofstream out(*out_path, std::ios::binary);
        if (!out) {
            std::cerr << "cannot open output file: " << *out_path << '\n';
            return 2;
        }
        emit_csv(out, table, manifest);
        if (!out) {
            std::cerr << "failed while writing: " << *out_path << '\n';
            return 2;
        }
    } else {
        emit_csv(std::cout, table, manifest);
    }
    return 0;
}

}  // namespace weakmeter
