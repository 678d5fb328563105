#include "delaydecay/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "delaydecay/errors.hpp"

namespace delaydecay {

namespace {

struct CondEval {
    double m1 = 0.0;
    double m2 = 0.0;
    double f1 = 0.0; // M(2mu) - mu^2
    double f2 = 0.0; // M(mu)(M(mu) - 1) - mu

    bool ok() const { return f1 <= 0.0 && f2 < 0.0; }
    double violation() const { return std::max(f1, f2); }
};

CondEval eval_conditions(const DelayDistribution& dist, double mu) {
    CondEval e;
    e.m1 = exp_moment(dist, mu);
    e.m2 = exp_moment(dist, 2.0 * mu);
    e.f1 = e.m2 - mu * mu;
    e.f2 = e.m1 * (e.m1 - 1.0) - mu;
    return e;
}

double rate_from(double m1, double mu) {
    return 2.0 * (m1 * (m1 - 1.0) / mu - 1.0);
}

} // namespace

ConditionReport check_conditions(const DelayDistribution& dist, double mu) {
    if (!(mu > 1.0) || !std::isfinite(mu))
        throw domain_error(errc::mu_out_of_range,
                           "check_conditions needs mu > 1");
    CondEval e = eval_conditions(dist, mu);
    ConditionReport rep;
    rep.mu = mu;
    rep.m_mu = e.m1;
    rep.m_2mu = e.m2;
    rep.cond1_ok = std::isfinite(e.m2) && e.f1 <= 0.0;
    rep.cond2_ok = std::isfinite(e.m1) && e.f2 < 0.0;
    if (rep.cond1_ok && rep.cond2_ok) rep.rate_bound_y = rate_from(e.m1, mu);
    return rep;
}

double decay_rate_bound(const DelayDistribution& dist, double mu) {
    ConditionReport rep = check_conditions(dist, mu);
    if (!rep.rate_bound_y)
        throw domain_error(errc::conditions_not_met,
                           "moment conditions do not hold at this mu");
    return *rep.rate_bound_y;
}

FeasibilityResult find_feasible_mu(const DelayDistribution& dist,
                                   const MuSearchConfig& config) {
    if (!(config.mu_max > 1.0) || !std::isfinite(config.mu_max))
        throw domain_error(errc::mu_out_of_range,
                           "find_feasible_mu needs mu_max > 1");
    if (config.grid_n < 8)
        throw domain_error(errc::bad_config, "grid_n must be >= 8");
    if (!(config.refine_tol > 0.0))
        throw domain_error(errc::bad_config, "refine_tol must be > 0");

    FeasibilityResult res;

    double mu_upper = config.mu_max;
    if (const auto* g = std::get_if<Gamma>(&dist))
        mu_upper = std::min(mu_upper, 0.5 * g->lambda - 1e-9 * g->lambda);
    if (mu_upper <= 1.0) {
        res.diagnostic =
            "M(2 mu) is infinite for every mu > 1; no admissible search range";
        return res;
    }

    // Feasible mu (if any) collected with their condition evaluations.
    std::vector<std::pair<double, CondEval>> found;
    double min_v = std::numeric_limits<double>::infinity();
    double min_mu = mu_upper;
    const double mu_lo = 1.0 + 1e-6 * (mu_upper - 1.0);
    const int n = config.grid_n;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : double(i) / double(n - 1);
        grid[i] = std::exp(std::log(mu_lo) +
                           t * (std::log(mu_upper) - std::log(mu_lo)));
    }
    int i_min = 0;
    for (int i = 0; i < n; ++i) {
        CondEval e = eval_conditions(dist, grid[i]);
        double v = e.violation();
        res.search_trace.emplace_back(grid[i], v);
        if (e.ok()) found.emplace_back(grid[i], e);
        if (v < min_v) {
            min_v = v;
            min_mu = grid[i];
            i_min = i;
        }
    }

    // Golden-section refinement of the violation minimum around the grid
    // argmin; any feasible point seen along the way counts.
    if (std::isfinite(min_v)) {
        const double phi = 0.6180339887498949;
        double a = grid[std::max(i_min - 1, 0)];
        double b = grid[std::min(i_min + 1, n - 1)];
        double c = b - phi * (b - a);
        double d = a + phi * (b - a);
        CondEval ec = eval_conditions(dist, c);
        CondEval ed = eval_conditions(dist, d);
        if (ec.ok()) found.emplace_back(c, ec);
        if (ed.ok()) found.emplace_back(d, ed);
        double best_x = min_mu;
        double best_v = min_v;
        auto consider = [&](double x, const CondEval& e) {
            double v = e.violation();
            if (v < best_v || (v == best_v && x < best_x)) {
                best_v = v;
                best_x = x;
            }
        };
        consider(c, ec);
        consider(d, ed);
        for (int it = 0; it < 200 && b - a > config.refine_tol; ++it) {
            if (ec.violation() < ed.violation()) {
                b = d;
                d = c;
                ed = ec;
                c = b - phi * (b - a);
                ec = eval_conditions(dist, c);
                if (ec.ok()) found.emplace_back(c, ec);
                consider(c, ec);
            } else {
                a = c;
                c = d;
                ec = ed;
                d = a + phi * (b - a);
                ed = eval_conditions(dist, d);
                if (ed.ok()) found.emplace_back(d, ed);
                consider(d, ed);
            }
        }
        res.search_trace.emplace_back(best_x, best_v);
    }

    if (found.empty()) {
        std::ostringstream os;
        os << "no mu in (1, " << mu_upper
           << "] satisfies both conditions; minimal violation " << min_v
           << " at mu = " << min_mu;
        res.diagnostic = os.str();
        return res;
    }

    double best_mu = 0.0;
    double best_rate = std::numeric_limits<double>::infinity();
    for (const auto& [mu, e] : found) {
        double rate = rate_from(e.m1, mu);
        if (rate < best_rate || (rate == best_rate && mu < best_mu)) {
            best_rate = rate;
            best_mu = mu;
        }
    }
    res.feasible = true;
    res.best_mu = best_mu;
    res.best_rate_y = best_rate;
    res.report_at_best = check_conditions(dist, best_mu);
    std::ostringstream os;
    os << "feasible; best mu = " << best_mu << " with y-rate bound "
       << best_rate;
    res.diagnostic = os.str();
    return res;
}

bool dirac_sharp_monotone(double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw domain_error(errc::negative_support,
                           "dirac_sharp_monotone needs tau >= 0");
    return tau <= std::exp(-1.0);
}

GammaCriticalResult gamma_analytic_critical(double k) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw domain_error(errc::nonpositive_shape,
                           "gamma_analytic_critical needs k > 0");
    GammaCriticalResult r;
    r.lambda_crit = std::pow(k + 2.0, 0.5 * (k + 2.0)) / std::pow(k, 0.5 * k);
    r.cond2_value = std::pow(k * (k + 2.0), 0.5 * k) /
                    std::pow(k + 1.0, k) *
                    (std::pow((k + 2.0) / (k + 1.0), k) - 1.0);
    r.covered = r.cond2_value < 1.0;
    return r;
}

} // namespace delaydecay
