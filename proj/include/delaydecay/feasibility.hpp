#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "delaydecay/distributions.hpp"

namespace delaydecay {

// Evaluation of the two moment conditions at a fixed mu > 1:
//   cond1:  M(2 mu) <= mu^2          (non-strict)
//   cond2:  M(mu) (M(mu) - 1) < mu   (strict)
// where M is exp_moment. When both hold, y(t) = u(t)^2 / 2 decays at least
// exponentially with the rate bound below.
struct ConditionReport {
    double mu = 0.0;
    double m_mu = 0.0;
    double m_2mu = 0.0;
    bool cond1_ok = false;
    bool cond2_ok = false;
    // 2 (M(mu)(M(mu) - 1) / mu - 1); present iff both conditions hold,
    // negative whenever present.
    std::optional<double> rate_bound_y;
};

struct MuSearchConfig {
    double mu_max = 50.0;
    int grid_n = 512;
    double refine_tol = 1e-6;
};

struct FeasibilityResult {
    bool feasible = false;
    std::optional<double> best_mu;
    std::optional<double> best_rate_y;
    std::optional<ConditionReport> report_at_best;
    // (mu, violation) samples: the scanned grid plus the refined minimum.
    std::vector<std::pair<double, double>> search_trace;
    std::string diagnostic;
};

// Evaluates both conditions at mu. Requires mu > 1.
ConditionReport check_conditions(const DelayDistribution& dist, double mu);

// The y-rate bound at mu; requires both conditions to hold there.
double decay_rate_bound(const DelayDistribution& dist, double mu);

// Scans mu over a log-spaced grid on (1, mu_upper], refines the violation
// minimum by golden-section search, and reports the feasible mu with the most
// negative rate bound. mu_upper is mu_max capped, for Gamma delays, just
// below lambda / 2 where M(2 mu) stays finite. Infeasibility is a normal
// result, not an error.
FeasibilityResult find_feasible_mu(const DelayDistribution& dist,
                                   const MuSearchConfig& config = {});

// Exact monotone-decay criterion for a single fixed delay: true iff
// tau <= 1/e. Requires tau >= 0.
bool dirac_sharp_monotone(double tau);

// Closed-form critical rate for Gamma(k, lambda) delays.
struct GammaCriticalResult {
    // Smallest rate for which the conditions are satisfiable:
    // (k+2)^{(k+2)/2} / k^{k/2}.
    double lambda_crit = 0.0;
    // Left side of cond2 at the boundary choice mu = lambda / (k + 2).
    double cond2_value = 0.0;
    // cond2_value < 1, i.e. the boundary point itself is admissible.
    bool covered = false;
};

// Requires k > 0.
GammaCriticalResult gamma_analytic_critical(double k);

} // namespace delaydecay
