#include "delaydecay/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaydecay/critical_curves.hpp"
#include "delaydecay/dde_sim.hpp"
#include "delaydecay/dist_spec.hpp"
#include "delaydecay/errors.hpp"
#include "delaydecay/feasibility.hpp"

namespace delaydecay::cli {

namespace {

using nlohmann::json;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& what) {
    std::size_t b = text.find_first_not_of(" \t");
    std::size_t e = text.find_last_not_of(" \t");
    if (b == std::string::npos)
        throw usage_error("empty number in " + what);
    double v = 0.0;
    const char* first = text.data() + b;
    const char* last = text.data() + e + 1;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw usage_error("malformed number '" + text + "' in " + what);
    return v;
}

// "lo:hi:step" with inclusive endpoints.
std::vector<double> parse_grid(const std::string& text,
                               const std::string& flag) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t colon = text.find(':', pos);
        parts.push_back(text.substr(pos, colon == std::string::npos
                                             ? std::string::npos
                                             : colon - pos));
        if (colon == std::string::npos) break;
        pos = colon + 1;
    }
    if (parts.size() != 3)
        throw usage_error(flag + " expects lo:hi:step");
    const double lo = parse_double(parts[0], flag);
    const double hi = parse_double(parts[1], flag);
    const double step = parse_double(parts[2], flag);
    if (!(step > 0.0) || !std::isfinite(step) || !std::isfinite(lo) ||
        !std::isfinite(hi) || hi < lo)
        throw usage_error(flag + " needs finite lo <= hi and step > 0");
    const double count_f = std::floor((hi - lo) / step + 1e-9) + 1.0;
    if (count_f > 100000.0)
        throw usage_error(flag + " expands to more than 100000 points");
    std::vector<double> grid;
    for (long i = 0; i < long(count_f); ++i)
        grid.push_back(lo + double(i) * step);
    return grid;
}

std::vector<double> parse_list(const std::string& text,
                               const std::string& flag) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = text.find(',', pos);
        std::string item = text.substr(pos, comma == std::string::npos
                                                ? std::string::npos
                                                : comma - pos);
        values.push_back(parse_double(item, flag));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

int env_threads() {
    const char* raw = std::getenv("DELAY_DECAY_THREADS");
    if (!raw || !*raw) return 0;
    int v = 0;
    auto [ptr, ec] = std::from_chars(raw, raw + std::strlen(raw), v);
    if (ec != std::errc{} || *ptr != '\0' || v < 0) return 0;
    return v;
}

struct OutputOpts {
    std::string format = "text";
    std::string out_path;
    std::string config_path;
};

void add_output_opts(CLI::App* sub, OutputOpts& opts) {
    sub->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
    sub->add_option("--out", opts.out_path,
                    "Write output to this file instead of stdout");
    sub->add_option("--config", opts.config_path,
                    "Config file with one key=value line per flag");
}

std::string_view trim_ws(std::string_view s) {
    const char* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// Fills in options the command line left at zero count; later validation and
// conversion runs through the option's own callback, so bad values fail the
// same way they would on the command line.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    std::ifstream file(path);
    if (!file) throw usage_error("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(file, line)) {
        ++lineno;
        const std::string_view body = trim_ws(line);
        if (body.empty() || body.front() == '#') continue;
        const auto where = " (line " + std::to_string(lineno) + " of " +
                           path + ")";
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw usage_error("config line is not key=value" + where);
        const std::string key{trim_ws(body.substr(0, eq))};
        const std::string value{trim_ws(body.substr(eq + 1))};
        if (key.empty()) throw usage_error("empty config key" + where);
        if (key == "config")
            throw usage_error("config files cannot nest" + where);
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt)
            throw usage_error("unknown config key \"" + key + "\"" + where);
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

// Replacement for CLI11's required() so that config files can also satisfy
// mandatory options; checked after apply_config.
void require_given(CLI::App* sub, const char* name) {
    if (sub->get_option(name)->count() == 0)
        throw usage_error(std::string(name) + " is required");
}

void add_mu_search_opts(CLI::App* sub, MuSearchConfig& cfg) {
    sub->add_option("--mu-max", cfg.mu_max, "Upper end of the mu scan")
        ->capture_default_str();
    sub->add_option("--grid-n", cfg.grid_n, "Points in the mu scan grid")
        ->capture_default_str();
    sub->add_option("--refine-tol", cfg.refine_tol,
                    "Width tolerance of the mu refinement")
        ->capture_default_str();
}

void add_sim_opts(CLI::App* sub, SimConfig& cfg) {
    sub->add_option("--t-end", cfg.t_end, "Integration horizon")
        ->capture_default_str();
    sub->add_option("--h", cfg.h, "Integration step")
        ->capture_default_str();
    sub->add_option("--eps-tail", cfg.eps_tail,
                    "Kernel tail mass allowed to be truncated")
        ->capture_default_str();
    sub->add_option("--quad-points", cfg.quad_points_per_step,
                    "Gauss-Legendre nodes per history step")
        ->capture_default_str();
}

void write_payload(const OutputOpts& opts, std::ostream& out,
                   const std::string& payload) {
    if (opts.out_path.empty()) {
        out << payload;
        return;
    }
    std::ofstream file(opts.out_path, std::ios::binary);
    if (!file)
        throw domain_error(errc::bad_config,
                           "cannot open output file " + opts.out_path);
    file << payload;
}

json report_to_json(const ConditionReport& rep) {
    json j;
    j["mu"] = rep.mu;
    j["m_mu"] = rep.m_mu;
    j["m_2mu"] = rep.m_2mu;
    j["cond1_ok"] = rep.cond1_ok;
    j["cond2_ok"] = rep.cond2_ok;
    if (rep.rate_bound_y)
        j["rate_bound_y"] = *rep.rate_bound_y;
    else
        j["rate_bound_y"] = nullptr;
    return j;
}

std::string run_check(const std::string& dist_str, double mu,
                      const OutputOpts& opts) {
    const DelayDistribution dist = parse_dist_spec(dist_str);
    const ConditionReport rep = check_conditions(dist, mu);
    if (opts.format == "json") {
        json j = report_to_json(rep);
        j["schema_version"] = "1";
        j["command"] = "check";
        j["dist"] = render_dist_spec(dist);
        return j.dump(2) + "\n";
    }
    if (opts.format == "csv") {
        std::string out = "mu,m_mu,m_2mu,cond1_ok,cond2_ok,rate_bound_y\n";
        out += fmt(rep.mu) + ',' + fmt(rep.m_mu) + ',' + fmt(rep.m_2mu) + ',';
        out += rep.cond1_ok ? '1' : '0';
        out += ',';
        out += rep.cond2_ok ? '1' : '0';
        out += ',';
        if (rep.rate_bound_y) out += fmt(*rep.rate_bound_y);
        out += '\n';
        return out;
    }
    std::string out = "dist: " + render_dist_spec(dist) + "\n";
    out += "mu = " + fmt(rep.mu) + "\n";
    out += "M(mu) = " + fmt(rep.m_mu) + "\n";
    out += "M(2mu) = " + fmt(rep.m_2mu) + "\n";
    out += std::string("cond1 (M(2mu) <= mu^2): ") +
           (rep.cond1_ok ? "ok" : "violated") + "\n";
    out += std::string("cond2 (M(mu)(M(mu)-1) < mu): ") +
           (rep.cond2_ok ? "ok" : "violated") + "\n";
    out += "rate_bound_y = " +
           (rep.rate_bound_y ? fmt(*rep.rate_bound_y)
                             : std::string("undefined")) +
           "\n";
    return out;
}

std::string run_mu_search(const std::string& dist_str,
                          const MuSearchConfig& cfg, const OutputOpts& opts) {
    const DelayDistribution dist = parse_dist_spec(dist_str);
    const FeasibilityResult res = find_feasible_mu(dist, cfg);
    if (opts.format == "json") {
        json j;
        j["schema_version"] = "1";
        j["command"] = "mu-search";
        j["dist"] = render_dist_spec(dist);
        j["feasible"] = res.feasible;
        j["best_mu"] = res.best_mu ? json(*res.best_mu) : json(nullptr);
        j["best_rate_y"] =
            res.best_rate_y ? json(*res.best_rate_y) : json(nullptr);
        j["report_at_best"] = res.report_at_best
                                  ? report_to_json(*res.report_at_best)
                                  : json(nullptr);
        j["diagnostic"] = res.diagnostic;
        json trace = json::array();
        for (const auto& [mu, v] : res.search_trace)
            trace.push_back(json::array({mu, v}));
        j["search_trace"] = trace;
        return j.dump(2) + "\n";
    }
    if (opts.format == "csv") {
        std::string out = "feasible,best_mu,best_rate_y\n";
        out += res.feasible ? '1' : '0';
        out += ',';
        if (res.best_mu) out += fmt(*res.best_mu);
        out += ',';
        if (res.best_rate_y) out += fmt(*res.best_rate_y);
        out += '\n';
        return out;
    }
    std::string out = "dist: " + render_dist_spec(dist) + "\n";
    out += std::string("feasible: ") + (res.feasible ? "yes" : "no") + "\n";
    if (res.best_mu) out += "best_mu = " + fmt(*res.best_mu) + "\n";
    if (res.best_rate_y)
        out += "best_rate_y = " + fmt(*res.best_rate_y) + "\n";
    out += res.diagnostic + "\n";
    return out;
}

struct CriticalSetup {
    std::function<DelayDistribution(double)> builder;
    std::string parameter;
    double lo = 0.0;
    double hi = 0.0;
    double tol = 1e-4;
    FeasibleSide side = FeasibleSide::below;
    std::map<std::string, double> fixed;
};

CriticalSetup critical_setup(const std::string& family, double k, double a,
                             double m) {
    CriticalSetup s;
    if (family == "dirac") {
        s.builder = [](double tau) -> DelayDistribution { return Dirac{tau}; };
        s.parameter = "tau";
        s.lo = 0.2;
        s.hi = 0.5;
        s.tol = 1e-5;
        s.side = FeasibleSide::below;
    } else if (family == "gamma") {
        s.builder = [k](double lambda) -> DelayDistribution {
            return Gamma{k, lambda};
        };
        s.parameter = "lambda";
        s.lo = 3.0;
        s.hi = 8.0;
        s.tol = 1e-4;
        s.side = FeasibleSide::above;
        s.fixed["k"] = k;
    } else if (family == "uniform") {
        s.builder = [a](double len) -> DelayDistribution {
            return Uniform{a, a + len};
        };
        s.parameter = "length";
        s.lo = 1e-6;
        s.hi = 1.0;
        s.tol = 1e-4;
        s.side = FeasibleSide::below;
        s.fixed["a"] = a;
    } else if (family == "truncnormal") {
        s.builder = [m](double sigma) -> DelayDistribution {
            return TruncatedNormal{m, sigma};
        };
        s.parameter = "sigma";
        s.lo = 1e-6;
        s.hi = 2.0;
        s.tol = 1e-4;
        s.side = FeasibleSide::below;
        s.fixed["m"] = m;
    } else {
        throw usage_error("--family must be one of dirac, gamma, uniform, "
                          "truncnormal");
    }
    return s;
}

std::string side_name(const CurvePoint& pt) {
    switch (pt.status) {
    case PointStatus::all_infeasible: return "none";
    case PointStatus::all_feasible: return "all";
    case PointStatus::ok: break;
    }
    return pt.feasible_side == FeasibleSide::below ? "below" : "above";
}

std::string run_critical(const CriticalSetup& setup,
                         const MuSearchConfig& mu_cfg,
                         const std::string& family, const OutputOpts& opts) {
    const CurvePoint pt = critical_scalar(setup.builder, setup.lo, setup.hi,
                                          setup.tol, setup.side, mu_cfg);
    if (opts.format == "json") {
        json j;
        j["schema_version"] = "1";
        j["command"] = "critical";
        j["family"] = family;
        j["parameter"] = setup.parameter;
        j["fixed_params"] = setup.fixed;
        j["critical"] = pt.critical_value;
        j["bracket_width"] = pt.bracket_width;
        j["feasible_side"] = side_name(pt);
        return j.dump(2) + "\n";
    }
    if (opts.format == "csv") {
        std::string out = "parameter,critical,bracket,feasible_side\n";
        out += setup.parameter + ',' + fmt(pt.critical_value) + ',' +
               fmt(pt.bracket_width) + ',' + side_name(pt) + '\n';
        return out;
    }
    std::string out = "critical " + setup.parameter + " = " +
                      fmt(pt.critical_value) + " (bracket " +
                      fmt(pt.bracket_width) + ", feasible side " +
                      side_name(pt) + ")\n";
    return out;
}

std::string curve_payload(const CriticalCurve& curve, const OutputOpts& opts,
                          const std::string& scan_name) {
    if (opts.format == "json") {
        json j;
        j["schema_version"] = "1";
        j["command"] = "sweep";
        j["family"] = curve.family;
        j["scan_parameter"] = scan_name;
        j["fixed_params"] = curve.fixed_params;
        j["tol"] = curve.tol;
        j["mu_search"] = {{"mu_max", curve.mu_search_config.mu_max},
                          {"grid_n", curve.mu_search_config.grid_n},
                          {"refine_tol", curve.mu_search_config.refine_tol}};
        json pts = json::array();
        for (const CurvePoint& pt : curve.points) {
            json p;
            p["scan"] = pt.scan_value;
            p["critical"] = std::isnan(pt.critical_value)
                                ? json(nullptr)
                                : json(pt.critical_value);
            p["bracket"] = pt.bracket_width;
            p["feasible_side"] = side_name(pt);
            pts.push_back(p);
        }
        j["points"] = pts;
        return j.dump(2) + "\n";
    }
    return curve_to_csv(curve);
}

std::string run_classify(const std::string& dist_str, const SimConfig& cfg,
                         const OutputOpts& opts) {
    const DelayDistribution dist = parse_dist_spec(dist_str);
    const Trajectory traj = simulate(dist, cfg);
    const Regime regime = classify(traj);
    const std::vector<double> crossings = detect_sign_changes(traj);
    if (opts.format == "json") {
        json j;
        j["schema_version"] = "1";
        j["command"] = "classify";
        j["dist"] = render_dist_spec(dist);
        j["regime"] = regime_name(regime);
        j["blow_up"] = traj.blow_up;
        j["sign_change_count"] = crossings.size();
        j["sign_changes"] = crossings;
        return j.dump(2) + "\n";
    }
    if (opts.format == "csv") {
        std::string out = "regime,sign_changes,blow_up\n";
        out += regime_name(regime) + ',' + std::to_string(crossings.size()) +
               ',' + (traj.blow_up ? '1' : '0') + '\n';
        return out;
    }
    std::string out = "regime: " + regime_name(regime) + " (" +
                      std::to_string(crossings.size()) + " sign changes";
    if (traj.blow_up) out += ", blow-up";
    out += ")\n";
    return out;
}

struct VerifyOutcome {
    std::string payload;
    bool pass = false;
};

VerifyOutcome run_verify(const std::string& dist_str,
                         const MuSearchConfig& mu_cfg, const SimConfig& sim_cfg,
                         double window, const std::vector<double>& s_grid,
                         double rate_slack, const OutputOpts& opts) {
    const DelayDistribution dist = parse_dist_spec(dist_str);
    const FeasibilityResult fea = find_feasible_mu(dist, mu_cfg);

    bool class_pass = false;
    bool rate_pass = false;
    bool env_pass = false;
    std::string regime = "not-run";
    double fitted = 0.0;
    bool have_fit = false;
    std::size_t env_checks = 0;
    std::size_t env_violations = 0;
    if (fea.feasible) {
        const Trajectory traj = simulate(dist, sim_cfg);
        regime = regime_name(classify(traj));
        class_pass = regime == "monotone_decay";
        if (class_pass) {
            fitted = estimate_decay_rate(traj, window);
            have_fit = true;
            rate_pass = fitted <= *fea.best_rate_y + rate_slack;
        }
        const EnvelopeReport env = check_envelope(traj, *fea.best_mu, s_grid);
        env_checks = env.checks;
        env_violations = env.violations.size();
        env_pass = env.ok();
    }
    const bool all_pass =
        fea.feasible && class_pass && rate_pass && env_pass;

    VerifyOutcome outcome;
    outcome.pass = all_pass;
    if (opts.format == "json") {
        json j;
        j["schema_version"] = "1";
        j["command"] = "verify";
        j["dist"] = render_dist_spec(dist);
        json checks;
        checks["feasibility"] = {
            {"pass", fea.feasible},
            {"best_mu", fea.best_mu ? json(*fea.best_mu) : json(nullptr)},
            {"rate_bound_y",
             fea.best_rate_y ? json(*fea.best_rate_y) : json(nullptr)},
            {"diagnostic", fea.diagnostic}};
        checks["classification"] = {{"pass", class_pass}, {"regime", regime}};
        checks["rate"] = {{"pass", rate_pass},
                          {"fitted_slope", have_fit ? json(fitted)
                                                    : json(nullptr)},
                          {"slack", rate_slack}};
        checks["envelope"] = {{"pass", env_pass},
                              {"checks", env_checks},
                              {"violations", env_violations}};
        j["checks"] = checks;
        j["pass"] = all_pass;
        outcome.payload = j.dump(2) + "\n";
        return outcome;
    }
    if (opts.format == "csv") {
        std::string out = "check,pass\n";
        out += std::string("feasibility,") + (fea.feasible ? '1' : '0') + '\n';
        out += std::string("classification,") + (class_pass ? '1' : '0') + '\n';
        out += std::string("rate,") + (rate_pass ? '1' : '0') + '\n';
        out += std::string("envelope,") + (env_pass ? '1' : '0') + '\n';
        out += std::string("overall,") + (all_pass ? '1' : '0') + '\n';
        outcome.payload = out;
        return outcome;
    }
    std::string out = "dist: " + render_dist_spec(dist) + "\n";
    out += std::string("check feasibility: ") +
           (fea.feasible ? "PASS" : "FAIL");
    if (fea.feasible)
        out += " (mu = " + fmt(*fea.best_mu) +
               ", rate_bound_y = " + fmt(*fea.best_rate_y) + ")";
    else
        out += " (" + fea.diagnostic + ")";
    out += "\n";
    out += std::string("check classification: ") +
           (class_pass ? "PASS" : "FAIL") + " (" + regime + ")\n";
    out += std::string("check rate: ") + (rate_pass ? "PASS" : "FAIL");
    if (have_fit && fea.best_rate_y)
        out += " (fitted " + fmt(fitted) + " vs bound " +
               fmt(*fea.best_rate_y) + " + " + fmt(rate_slack) + ")";
    out += "\n";
    out += std::string("check envelope: ") + (env_pass ? "PASS" : "FAIL") +
           " (" + std::to_string(env_violations) + " violations in " +
           std::to_string(env_checks) + " checks)\n";
    out += std::string("overall: ") + (all_pass ? "PASS" : "FAIL") + "\n";
    outcome.payload = out;
    return outcome;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
    CLI::App app{"Decay analysis for negative feedback with distributed "
                 "delay"};
    app.require_subcommand(1);
    // Long-only help on subcommands keeps -h free for the step option --h.
    auto add_sub = [&app](const char* name, const char* desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->set_help_flag("--help", "Print help and exit");
        return sub;
    };

    // check
    auto* c_check =
        add_sub("check", "Evaluate both moment conditions at a fixed mu");
    std::string check_dist;
    double check_mu = 2.0;
    OutputOpts check_out;
    c_check->add_option("--dist", check_dist, "Delay distribution spec");
    c_check->add_option("--mu", check_mu, "Exponent mu > 1");
    add_output_opts(c_check, check_out);

    // mu-search
    auto* c_search = add_sub(
        "mu-search", "Search for a feasible mu and the best rate bound");
    std::string search_dist;
    MuSearchConfig search_cfg;
    OutputOpts search_out;
    c_search->add_option("--dist", search_dist, "Delay distribution spec");
    add_mu_search_opts(c_search, search_cfg);
    add_output_opts(c_search, search_out);

    // critical
    auto* c_crit = add_sub(
        "critical", "Bisect the critical parameter of one family");
    std::string crit_family;
    double crit_k = 1.0;
    double crit_a = 0.0;
    double crit_m = 0.0;
    double crit_lo = 0.0;
    double crit_hi = 0.0;
    double crit_tol = 0.0;
    MuSearchConfig crit_mu_cfg;
    OutputOpts crit_out;
    c_crit->add_option("--family", crit_family,
                       "dirac, gamma, uniform, or truncnormal");
    c_crit->add_option("--k", crit_k, "Gamma shape (family gamma)")
        ->capture_default_str();
    c_crit->add_option("--a", crit_a, "Interval start (family uniform)")
        ->capture_default_str();
    c_crit->add_option("--m", crit_m, "Location (family truncnormal)")
        ->capture_default_str();
    c_crit->add_option("--lo", crit_lo, "Bracket lower end");
    c_crit->add_option("--hi", crit_hi, "Bracket upper end");
    c_crit->add_option("--tol", crit_tol, "Bisection tolerance");
    add_mu_search_opts(c_crit, crit_mu_cfg);
    add_output_opts(c_crit, crit_out);

    // sweep
    auto* c_sweep = add_sub(
        "sweep", "Critical-curve sweep over a parameter grid");
    std::string sweep_family;
    std::string a_grid_str = "0:0.34:0.02";
    std::string m_grid_str = "-2:0.4:0.2";
    double sigma_hi = 10.0;
    double sweep_tol = 1e-4;
    MuSearchConfig sweep_mu_cfg;
    OutputOpts sweep_out;
    sweep_out.format = "csv";
    c_sweep->add_option("--family", sweep_family, "uniform or truncnormal");
    c_sweep->add_option("--a-grid", a_grid_str,
                        "lo:hi:step grid of interval starts (uniform)")
        ->capture_default_str();
    c_sweep->add_option("--m-grid", m_grid_str,
                        "lo:hi:step grid of locations (truncnormal)")
        ->capture_default_str();
    c_sweep->add_option("--sigma-hi", sigma_hi,
                        "Upper probe for sigma (truncnormal)")
        ->capture_default_str();
    c_sweep->add_option("--tol", sweep_tol, "Bisection tolerance")
        ->capture_default_str();
    add_mu_search_opts(c_sweep, sweep_mu_cfg);
    add_output_opts(c_sweep, sweep_out);

    // simulate
    auto* c_sim = add_sub(
        "simulate", "Integrate the equation and write the trajectory");
    std::string sim_dist;
    SimConfig sim_cfg;
    OutputOpts sim_out;
    sim_out.format = "csv";
    c_sim->add_option("--dist", sim_dist, "Delay distribution spec");
    add_sim_opts(c_sim, sim_cfg);
    add_output_opts(c_sim, sim_out);

    // classify
    auto* c_classify = add_sub(
        "classify", "Simulate and name the decay/oscillation regime");
    std::string classify_dist;
    SimConfig classify_cfg;
    classify_cfg.t_end = 60.0;
    OutputOpts classify_out;
    c_classify->add_option("--dist", classify_dist, "Delay distribution spec");
    add_sim_opts(c_classify, classify_cfg);
    add_output_opts(c_classify, classify_out);

    // verify
    auto* c_verify = add_sub(
        "verify", "Full pipeline: search, simulate, rate and envelope checks");
    std::string verify_dist;
    MuSearchConfig verify_mu_cfg;
    SimConfig verify_cfg;
    verify_cfg.t_end = 30.0;
    verify_cfg.h = 2e-3;
    double verify_window = 0.5;
    std::string verify_s_grid = "0.1,0.3,1.0";
    double verify_rate_slack = 1e-3;
    OutputOpts verify_out;
    c_verify->add_option("--dist", verify_dist, "Delay distribution spec");
    add_mu_search_opts(c_verify, verify_mu_cfg);
    add_sim_opts(c_verify, verify_cfg);
    c_verify->add_option("--window", verify_window,
                         "Trailing fraction used for the rate fit")
        ->capture_default_str();
    c_verify->add_option("--s-grid", verify_s_grid,
                         "Comma-separated lags for the envelope check")
        ->capture_default_str();
    c_verify->add_option("--rate-slack", verify_rate_slack,
                         "Tolerance added to the rate bound")
        ->capture_default_str();
    add_output_opts(c_verify, verify_out);

    std::vector<const char*> argv;
    argv.push_back("delay-decay");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(int(argv.size()), argv.data());

        if (app.got_subcommand(c_check)) {
            apply_config(c_check, check_out.config_path);
            require_given(c_check, "--dist");
            require_given(c_check, "--mu");
            write_payload(check_out, out,
                          run_check(check_dist, check_mu, check_out));
            return 0;
        }
        if (app.got_subcommand(c_search)) {
            apply_config(c_search, search_out.config_path);
            require_given(c_search, "--dist");
            write_payload(search_out, out,
                          run_mu_search(search_dist, search_cfg, search_out));
            return 0;
        }
        if (app.got_subcommand(c_crit)) {
            apply_config(c_crit, crit_out.config_path);
            require_given(c_crit, "--family");
            CriticalSetup setup =
                critical_setup(crit_family, crit_k, crit_a, crit_m);
            if (c_crit->count("--lo")) setup.lo = crit_lo;
            if (c_crit->count("--hi")) setup.hi = crit_hi;
            if (c_crit->count("--tol")) setup.tol = crit_tol;
            write_payload(
                crit_out, out,
                run_critical(setup, crit_mu_cfg, crit_family, crit_out));
            return 0;
        }
        if (app.got_subcommand(c_sweep)) {
            apply_config(c_sweep, sweep_out.config_path);
            require_given(c_sweep, "--family");
            const int threads = env_threads();
            CriticalCurve curve;
            std::string scan_name;
            if (sweep_family == "uniform") {
                if (c_sweep->count("--m-grid") ||
                    c_sweep->count("--sigma-hi"))
                    throw usage_error("--m-grid/--sigma-hi require --family "
                                      "truncnormal");
                curve = sweep_uniform_curve(parse_grid(a_grid_str, "--a-grid"),
                                            sweep_tol, sweep_mu_cfg, threads);
                scan_name = "a";
            } else if (sweep_family == "truncnormal") {
                if (c_sweep->count("--a-grid"))
                    throw usage_error("--a-grid requires --family uniform");
                curve = sweep_truncnormal_curve(
                    parse_grid(m_grid_str, "--m-grid"), sigma_hi, sweep_tol,
                    sweep_mu_cfg, threads);
                scan_name = "m";
            } else {
                throw usage_error(
                    "--family must be uniform or truncnormal for sweep");
            }
            write_payload(sweep_out, out,
                          curve_payload(curve, sweep_out, scan_name));
            return 0;
        }
        if (app.got_subcommand(c_sim)) {
            apply_config(c_sim, sim_out.config_path);
            require_given(c_sim, "--dist");
            const DelayDistribution dist = parse_dist_spec(sim_dist);
            const Trajectory traj = simulate(dist, sim_cfg);
            if (sim_out.format == "json") {
                json j;
                j["schema_version"] = "1";
                j["command"] = "simulate";
                j["dist"] = render_dist_spec(dist);
                j["h"] = sim_cfg.h;
                j["t_end"] = sim_cfg.t_end;
                j["eps_tail"] = sim_cfg.eps_tail;
                j["quad_points_per_step"] = sim_cfg.quad_points_per_step;
                j["blow_up"] = traj.blow_up;
                j["t"] = traj.times;
                j["u"] = traj.values;
                write_payload(sim_out, out, j.dump(2) + "\n");
            } else {
                write_payload(sim_out, out, trajectory_to_csv(traj));
            }
            return 0;
        }
        if (app.got_subcommand(c_classify)) {
            apply_config(c_classify, classify_out.config_path);
            require_given(c_classify, "--dist");
            write_payload(
                classify_out, out,
                run_classify(classify_dist, classify_cfg, classify_out));
            return 0;
        }
        if (app.got_subcommand(c_verify)) {
            apply_config(c_verify, verify_out.config_path);
            require_given(c_verify, "--dist");
            VerifyOutcome outcome = run_verify(
                verify_dist, verify_mu_cfg, verify_cfg, verify_window,
                parse_list(verify_s_grid, "--s-grid"), verify_rate_slack,
                verify_out);
            write_payload(verify_out, out, outcome.payload);
            return outcome.pass ? 0 : 1;
        }
        err << "error: no subcommand given\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const usage_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const spec_parse_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const bracket_error& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const validation_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace delaydecay::cli
