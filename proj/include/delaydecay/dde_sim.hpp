#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "delaydecay/distributions.hpp"

namespace delaydecay {

struct SimConfig {
    double t_end = 50.0;
    double h = 1e-3;
    // Delay-kernel mass allowed to be truncated; must be in (0, 1e-6].
    double eps_tail = 1e-10;
    // Gauss-Legendre nodes per history step for continuous kernels.
    int quad_points_per_step = 4;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> values;
    DelayDistribution dist;
    SimConfig config;
    std::string history_convention = "u(s)=1 for s<=0";
    // Set when |u| exceeded 1e150 and integration stopped early; times and
    // values are truncated at the last finite step.
    bool blow_up = false;
};

enum class Regime {
    monotone_decay,
    damped_oscillation,
    growing_oscillation,
    inconclusive,
};

std::string regime_name(Regime regime);

// Pre-history function u(s) for s <= 0; replaces the default constant 1.
using HistoryFn = std::function<double(double)>;

// Integrates du/dt = -E[u(t - S)] by classical fixed-step RK4 along a
// method-of-steps history. Atomic kernels read the history by cubic
// interpolation at each atom lag; continuous kernels are integrated by
// composite Gauss-Legendre panels of width h aligned to the support, so
// density edges (Uniform endpoints) never fall inside a panel. The panel
// containing the history kink at t - s = 0 is split there on the fly, which
// keeps the quadrature error at the kink from degrading the RK4 order.
// Stops early with blow_up set when |u| exceeds 1e150.
Trajectory simulate(const DelayDistribution& dist, const SimConfig& config,
                    const HistoryFn& history = {});

// Cubic interpolation of the stored trajectory; t must lie in
// [0, times.back()].
double interpolate(const Trajectory& traj, double t);

// Zero crossings, linearly interpolated between grid points; a grid value
// that is exactly zero dates the crossing at that grid point. Touching zero
// and returning with the same sign does not count.
std::vector<double> detect_sign_changes(const Trajectory& traj);

// Trajectory taxonomy. Requires a horizon of at least 20 time units (shorter
// runs return inconclusive); a blow_up trajectory is growing_oscillation.
// monotone_decay needs no sign change, |u| nonincreasing within 1e-12 per
// step, and |u| at the end below half its start. Oscillatory regimes compare
// successive local extrema of |u|, with equal-value plateaus collapsed.
Regime classify(const Trajectory& traj);

// Least-squares slope of ln(u^2 / 2) over the trailing window_fraction of
// the time span. Requires window_fraction in (0, 1), at least 5 grid points
// in the window, and strictly positive u throughout it.
double estimate_decay_rate(const Trajectory& traj, double window_fraction);

struct EnvelopeViolation {
    double t = 0.0;
    double s = 0.0;
    double y_t = 0.0;
    double y_lag = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct EnvelopeReport {
    std::size_t checks = 0;
    std::vector<EnvelopeViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Checks the two-sided bound exp(-2 mu s) y(t) < y(t-s) < exp(2 mu s) y(t)
// with y = u^2 / 2 at every grid t > 0 and each lag s in s_grid, allowing
// 1e-6 relative slack for discretization. y(t-s) uses the constant initial
// datum (y = 1/2) when t - s <= 0. Lags must be strictly positive.
// Violations are returned as data, never thrown.
EnvelopeReport check_envelope(const Trajectory& traj, double mu,
                              const std::vector<double>& s_grid);

// Columns t,u after a '#' header carrying the kernel spec and config;
// 17 significant digits.
std::string trajectory_to_csv(const Trajectory& traj);

} // namespace delaydecay
