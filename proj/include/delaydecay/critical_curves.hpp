#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "delaydecay/distributions.hpp"
#include "delaydecay/feasibility.hpp"

namespace delaydecay {

enum class FeasibleSide { below, above };

// A sweep point can degenerate: the scanned parameter may be infeasible for
// every probed value, or feasible everywhere up to the probe limit.
enum class PointStatus { ok, all_infeasible, all_feasible };

struct CurvePoint {
    double scan_value = 0.0;
    // Bisection midpoint for status ok; the probe bound for all_feasible;
    // NaN for all_infeasible.
    double critical_value = 0.0;
    double bracket_width = 0.0;
    FeasibleSide feasible_side = FeasibleSide::below;
    PointStatus status = PointStatus::ok;
};

struct CriticalCurve {
    std::string family;
    std::map<std::string, double> fixed_params;
    std::vector<CurvePoint> points;
    double tol = 1e-4;
    MuSearchConfig mu_search_config;
};

// Bisects the boundary of the feasibility predicate
// find_feasible_mu(builder(x)).feasible over x in [lo, hi]. The two ends
// must disagree, with the feasible end on the declared side. After the
// bisection, five interior probes re-check that the predicate is monotone
// across the bracket; a mismatch raises bracket_error rather than returning
// a bogus midpoint.
CurvePoint critical_scalar(
    const std::function<DelayDistribution(double)>& builder, double lo,
    double hi, double tol, FeasibleSide side,
    const MuSearchConfig& mu_config = {});

// Critical interval length L = b - a as a function of the left endpoint a.
// Points with no feasible L are marked all_infeasible. threads <= 0 uses the
// hardware count; points are independent and the result does not depend on
// thread scheduling.
CriticalCurve sweep_uniform_curve(const std::vector<double>& a_grid,
                                  double tol,
                                  const MuSearchConfig& mu_config = {},
                                  int threads = 0);

// Critical sigma as a function of m, probing sigma in [1e-6, sigma_hi].
CriticalCurve sweep_truncnormal_curve(const std::vector<double>& m_grid,
                                      double sigma_hi, double tol,
                                      const MuSearchConfig& mu_config = {},
                                      int threads = 0);

// Columns scan,critical,bracket,feasible_side; one row per point.
// feasible_side is "none" for all_infeasible points and "all" for
// all_feasible ones.
std::string curve_to_csv(const CriticalCurve& curve);

} // namespace delaydecay
