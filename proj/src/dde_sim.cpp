#include "delaydecay/dde_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

#include "delaydecay/dist_spec.hpp"
#include "delaydecay/errors.hpp"
#include "delaydecay/quadrature.hpp"

namespace delaydecay {

namespace {

constexpr double blow_up_limit = 1e150;

// Cubic Lagrange weights on nodes {0,1,2,3} at coordinate p.
std::array<double, 4> lagrange4(double p) {
    const double a = p - 1.0;
    const double b = p - 2.0;
    const double c = p - 3.0;
    return {-a * b * c / 6.0, p * b * c / 2.0, -p * a * c / 2.0,
            p * a * b / 6.0};
}

// Interpolates stored values (grid spacing 1) at p in [0, n]; degree 3 where
// possible, lower near the start of short series.
double lagrange_value(const std::vector<double>& u, double p) {
    const std::size_t n = u.size() - 1;
    if (n == 0) return u[0];
    const int deg = int(std::min<std::size_t>(3, n));
    long base = std::lround(std::floor(p)) - 1;
    base = std::clamp<long>(base, 0, long(n) - deg);
    const double local = p - double(base);
    double acc = 0.0;
    for (int i = 0; i <= deg; ++i) {
        double w = 1.0;
        for (int j = 0; j <= deg; ++j)
            if (j != i) w *= (local - j) / double(i - j);
        acc += w * u[std::size_t(base) + i];
    }
    return acc;
}

// Per-stage interpolation plan: for each kernel node, four Lagrange weights
// premultiplied by the node mass, plus the stencil start relative to the
// current step index. Nodes with lag <= c + 1 steps read the newest four
// accepted values (extrapolating past the last one where the lag is shorter
// than the stage offset); deeper nodes read a centered window.
struct StagePlan {
    double c = 0.0;
    std::vector<double> w4;
    std::vector<std::int32_t> base_rel;
};

struct Stencil {
    std::vector<double> x;      // node lags in units of h, ascending
    std::vector<double> w;      // node masses
    std::vector<double> suffix; // suffix[q] = sum of w[q..]
    double w_zero = 0.0;        // atom mass exactly at lag 0
    std::array<StagePlan, 3> stages;
    bool continuous = false;
    double lo = 0.0;            // panel origin (support start)
    double hi = 0.0;            // truncation point
    int qpps = 0;
    GaussLegendre rule;
};

Stencil build_stencil(const DelayDistribution& dist, const SimConfig& cfg) {
    Stencil st;
    const double h = cfg.h;
    if (!has_density(dist)) {
        for (const Atom& at : atom_list(dist)) {
            if (at.s == 0.0) {
                st.w_zero += at.w;
            } else {
                st.x.push_back(at.s / h);
                st.w.push_back(at.w);
            }
        }
    } else {
        st.continuous = true;
        st.lo = support_lower(dist);
        st.hi = tail_cutoff(dist, cfg.eps_tail);
        st.qpps = cfg.quad_points_per_step;
        st.rule = gauss_legendre(st.qpps);
        const long n_panels = std::max<long>(
            1, std::lround(std::ceil((st.hi - st.lo) / h - 1e-12)));
        st.x.reserve(std::size_t(n_panels) * std::size_t(st.qpps));
        st.w.reserve(st.x.capacity());
        for (long j = 0; j < n_panels; ++j) {
            const double pa = st.lo + double(j) * h;
            const double pb = std::min(pa + h, st.hi);
            if (!(pb > pa)) break;
            const double mid = 0.5 * (pa + pb);
            const double half = 0.5 * (pb - pa);
            for (int q = 0; q < st.qpps; ++q) {
                const double s = mid + half * st.rule.nodes[q];
                st.x.push_back(s / h);
                st.w.push_back(half * st.rule.weights[q] * density(dist, s));
            }
        }
    }

    st.suffix.assign(st.x.size() + 1, 0.0);
    for (std::size_t q = st.x.size(); q-- > 0;)
        st.suffix[q] = st.suffix[q + 1] + st.w[q];

    const double cs[3] = {0.0, 0.5, 1.0};
    for (int sidx = 0; sidx < 3; ++sidx) {
        StagePlan& sp = st.stages[sidx];
        sp.c = cs[sidx];
        sp.w4.resize(4 * st.x.size());
        sp.base_rel.resize(st.x.size());
        for (std::size_t q = 0; q < st.x.size(); ++q) {
            const double delta = sp.c - st.x[q];
            std::array<double, 4> wl;
            std::int32_t base;
            if (st.x[q] <= sp.c + 1.0) {
                wl = lagrange4(3.0 + delta);
                base = -3;
            } else {
                const double d = std::floor(delta);
                wl = lagrange4(delta - d + 1.0);
                base = std::int32_t(d) - 1;
            }
            for (int j = 0; j < 4; ++j) sp.w4[4 * q + j] = wl[j] * st.w[q];
            sp.base_rel[q] = base;
        }
    }
    return st;
}

struct Engine {
    const DelayDistribution& dist;
    const HistoryFn& hist;
    const double h;
    const Stencil st;
    std::vector<double> u;
    double k_latest = 0.0;

    Engine(const DelayDistribution& d, const SimConfig& cfg,
           const HistoryFn& history)
        : dist(d), hist(history), h(cfg.h), st(build_stencil(d, cfg)) {}

    // u at grid coordinate p, valid for any p up to slightly past the newest
    // accepted value (provisional linear extension with the latest stage
    // slope).
    double value_at(double p) const {
        if (p <= 0.0) return hist ? hist(p * h) : 1.0;
        const double n_acc = double(u.size() - 1);
        if (p >= n_acc) return u.back() + (p - n_acc) * h * k_latest;
        return lagrange_value(u, p);
    }

    // Replaces the precomputed quadrature of the panel containing the
    // history kink at t - s = 0 with two sub-panels split at the kink.
    // Without this the kink sits at a fixed interior offset of its panel for
    // the half-step stages and the quadrature bias decays only as h^2.
    double kink_correction(const StagePlan& sp, std::size_t n) const {
        const double t_stage = (double(n) + sp.c) * h;
        if (t_stage <= st.lo || t_stage >= st.hi) return 0.0;
        const double r = (t_stage - st.lo) / h;
        const double jf = std::floor(r);
        const double frac = r - jf;
        if (frac < 1e-9 || frac > 1.0 - 1e-9) return 0.0;
        const long j = std::lround(jf);
        const double pa = st.lo + double(j) * h;
        const double pb = std::min(pa + h, st.hi);
        if (!(t_stage > pa && t_stage < pb)) return 0.0;

        double corr = 0.0;
        const std::size_t q0 = std::size_t(j) * std::size_t(st.qpps);
        const std::size_t q1 =
            std::min(q0 + std::size_t(st.qpps), st.x.size());
        for (std::size_t q = q0; q < q1; ++q)
            corr -= st.w[q] * value_at(double(n) + sp.c - st.x[q]);
        const double mids[2] = {0.5 * (pa + t_stage), 0.5 * (t_stage + pb)};
        const double halves[2] = {0.5 * (t_stage - pa), 0.5 * (pb - t_stage)};
        for (int part = 0; part < 2; ++part) {
            for (int q = 0; q < st.qpps; ++q) {
                const double s = mids[part] + halves[part] * st.rule.nodes[q];
                corr += halves[part] * st.rule.weights[q] * density(dist, s) *
                        value_at(double(n) + sp.c - s / h);
            }
        }
        return corr;
    }

    // E[u(t - S)] at stage abscissa c of step n, with the stage's own u
    // estimate supplying the lag-zero atom value.
    double delayed_mean(int sidx, std::size_t n, double y_stage) const {
        const StagePlan& sp = st.stages[sidx];
        double acc = st.w_zero * y_stage;
        const std::size_t count = st.x.size();
        if (count > 0 && n >= 4) {
            const double lim_steady = double(n) + sp.c - 1.0;
            const double lim_tail = double(n) + sp.c;
            const std::size_t q_gen =
                std::upper_bound(st.x.begin(), st.x.end(), lim_steady) -
                st.x.begin();
            const std::size_t q_tail =
                std::lower_bound(st.x.begin(), st.x.end(), lim_tail) -
                st.x.begin();
            const double* U = u.data();
            const double* W = sp.w4.data();
            const std::int32_t* B = sp.base_rel.data();
            for (std::size_t q = 0; q < q_gen; ++q) {
                const double* up = U + (long(n) + B[q]);
                acc += W[4 * q] * up[0] + W[4 * q + 1] * up[1] +
                       W[4 * q + 2] * up[2] + W[4 * q + 3] * up[3];
            }
            for (std::size_t q = q_gen; q < q_tail; ++q) {
                const auto wl = lagrange4(double(n) + sp.c - st.x[q]);
                acc += st.w[q] * (wl[0] * U[0] + wl[1] * U[1] + wl[2] * U[2] +
                                  wl[3] * U[3]);
            }
            if (!hist) {
                acc += st.suffix[q_tail];
            } else {
                for (std::size_t q = q_tail; q < count; ++q)
                    acc += st.w[q] * hist((double(n) + sp.c - st.x[q]) * h);
            }
        } else {
            for (std::size_t q = 0; q < count; ++q)
                acc += st.w[q] * value_at(double(n) + sp.c - st.x[q]);
        }
        if (st.continuous) acc += kink_correction(sp, n);
        if (!st.continuous && !st.x.empty() && n >= 4)
            acc += atom_kink_correction(sp, n);
        return acc;
    }

    // The solution's second derivative jumps at each atom lag. A cubic read
    // whose stencil straddles such a point loses an order, so those few
    // reads are redone with a stencil drawn from the read point's side of
    // the kink. Lags under ~3 steps keep the plain read: there is no room
    // for a one-sided stencil.
    double atom_kink_correction(const StagePlan& sp, std::size_t n) const {
        double corr = 0.0;
        for (std::size_t q = 0; q < st.x.size(); ++q) {
            if (st.x[q] <= sp.c + 1.0) continue;
            const double p = double(n) + sp.c - st.x[q];
            if (p < 1.0 || p > double(n) - 1.0) continue;
            const double f = std::floor(p);
            for (const double kink : st.x) {
                if (kink >= f + 2.0 - 1e-9) break;
                if (kink <= f - 1.0 + 1e-9) continue;
                if (std::fabs(p - kink) <= 1e-12) continue;
                long b;
                if (p > kink) {
                    b = std::lround(std::ceil(kink - 1e-9));
                    if (b + 3 > long(n)) continue;
                } else {
                    b = std::lround(std::floor(kink + 1e-9)) - 3;
                    if (b < 0) continue;
                }
                const auto wl = lagrange4(p - double(b));
                const double* up = u.data() + b;
                const double fresh = wl[0] * up[0] + wl[1] * up[1] +
                                     wl[2] * up[2] + wl[3] * up[3];
                const double* op = u.data() + (long(n) + sp.base_rel[q]);
                const double* wq = &sp.w4[4 * q];
                const double old = wq[0] * op[0] + wq[1] * op[1] +
                                   wq[2] * op[2] + wq[3] * op[3];
                corr += st.w[q] * fresh - old;
                break;
            }
        }
        return corr;
    }
};

void check_config(const SimConfig& cfg) {
    if (!std::isfinite(cfg.t_end) || !(cfg.t_end > 0.0))
        throw domain_error(errc::bad_config, "t_end must be positive");
    if (!std::isfinite(cfg.h) || !(cfg.h > 0.0))
        throw domain_error(errc::bad_config, "h must be positive");
    if (cfg.h > cfg.t_end / 10.0 * (1.0 + 1e-12))
        throw domain_error(errc::bad_config, "h must be at most t_end / 10");
    if (!(cfg.eps_tail > 0.0) || cfg.eps_tail > 1e-6)
        throw domain_error(errc::eps_out_of_range,
                           "eps_tail must be in (0, 1e-6]");
    if (cfg.quad_points_per_step < 1 || cfg.quad_points_per_step > 64)
        throw domain_error(errc::bad_config,
                           "quad_points_per_step must be in [1, 64]");
    const double steps = cfg.t_end / cfg.h;
    if (steps > 2e7)
        throw domain_error(errc::bad_config,
                           "t_end / h exceeds 2e7 steps; coarsen h");
}

} // namespace

std::string regime_name(Regime regime) {
    switch (regime) {
    case Regime::monotone_decay: return "monotone_decay";
    case Regime::damped_oscillation: return "damped_oscillation";
    case Regime::growing_oscillation: return "growing_oscillation";
    case Regime::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Trajectory simulate(const DelayDistribution& dist, const SimConfig& config,
                    const HistoryFn& history) {
    check_config(config);
    const DelayDistribution vdist = validate(dist);
    const std::size_t n_steps =
        std::size_t(std::llround(config.t_end / config.h));

    Engine eng(vdist, config, history);
    eng.u.reserve(n_steps + 1);
    eng.u.push_back(history ? history(0.0) : 1.0);

    const double h = config.h;
    bool blew_up = false;
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double un = eng.u[n];
        eng.k_latest = 0.0;
        const double k1 = -eng.delayed_mean(0, n, un);
        eng.k_latest = k1;
        const double k2 = -eng.delayed_mean(1, n, un + 0.5 * h * k1);
        eng.k_latest = k2;
        const double k3 = -eng.delayed_mean(1, n, un + 0.5 * h * k2);
        eng.k_latest = k3;
        const double k4 = -eng.delayed_mean(2, n, un + h * k3);
        const double next = un + h / 6.0 * (k1 + 2.0 * (k2 + k3) + k4);
        if (!std::isfinite(next) || std::fabs(next) > blow_up_limit) {
            blew_up = true;
            break;
        }
        eng.u.push_back(next);
    }

    Trajectory traj;
    traj.values = std::move(eng.u);
    traj.times.resize(traj.values.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        traj.times[i] = double(i) * h;
    traj.dist = vdist;
    traj.config = config;
    traj.blow_up = blew_up;
    if (history) traj.history_convention = "user-supplied history for s<=0";
    return traj;
}

double interpolate(const Trajectory& traj, double t) {
    if (traj.values.empty())
        throw domain_error(errc::bad_config, "empty trajectory");
    const double T = traj.times.back();
    if (!(t >= 0.0) || t > T * (1.0 + 1e-12) + 1e-300)
        throw domain_error(errc::bad_config,
                           "t outside the stored trajectory range");
    const double p =
        std::clamp(t / traj.config.h, 0.0, double(traj.values.size() - 1));
    return lagrange_value(traj.values, p);
}

std::vector<double> detect_sign_changes(const Trajectory& traj) {
    std::vector<double> out;
    const auto& u = traj.values;
    const auto& tt = traj.times;
    int last_sign = 0;
    double last_val = 0.0;
    double last_t = 0.0;
    bool pending = false;
    double pending_t = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = u[i];
        const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        if (s == 0) {
            // Exact zero: dates a crossing at this grid point if the sign
            // actually flips afterwards.
            if (last_sign != 0 && !pending) {
                pending = true;
                pending_t = tt[i];
            }
            continue;
        }
        if (last_sign == 0) {
            last_sign = s;
        } else if (s != last_sign) {
            out.push_back(pending ? pending_t
                                  : last_t + (tt[i] - last_t) * last_val /
                                                 (last_val - v));
            last_sign = s;
        }
        pending = false;
        last_val = v;
        last_t = tt[i];
    }
    return out;
}

Regime classify(const Trajectory& traj) {
    if (traj.blow_up) return Regime::growing_oscillation;
    if (traj.times.empty() || traj.times.back() < 20.0 - 1e-9)
        return Regime::inconclusive;
    const auto& u = traj.values;
    const std::vector<double> crossings = detect_sign_changes(traj);
    if (crossings.empty()) {
        for (std::size_t i = 0; i + 1 < u.size(); ++i)
            if (std::fabs(u[i + 1]) > std::fabs(u[i]) + 1e-12)
                return Regime::inconclusive;
        if (std::fabs(u.back()) < 0.5 * std::fabs(u.front()))
            return Regime::monotone_decay;
        return Regime::inconclusive;
    }

    double max_abs = 0.0;
    for (double v : u) max_abs = std::max(max_abs, std::fabs(v));
    // |u| with consecutive equal values collapsed, so plateaus count once.
    std::vector<double> comp;
    comp.reserve(u.size());
    for (double v : u) {
        const double a = std::fabs(v);
        if (comp.empty() || a != comp.back()) comp.push_back(a);
    }
    std::vector<double> peaks;
    for (std::size_t j = 1; j + 1 < comp.size(); ++j)
        if (comp[j] > comp[j - 1] && comp[j] > comp[j + 1] &&
            comp[j] >= 1e-12 * max_abs)
            peaks.push_back(comp[j]);
    if (peaks.size() < 2) return Regime::inconclusive;
    bool decreasing = peaks.back() < peaks.front();
    bool increasing = peaks.back() > peaks.front();
    for (std::size_t j = 0; j + 1 < peaks.size(); ++j) {
        if (peaks[j + 1] > peaks[j] * (1.0 + 1e-9)) decreasing = false;
        if (peaks[j + 1] < peaks[j] * (1.0 - 1e-9)) increasing = false;
    }
    if (decreasing) return Regime::damped_oscillation;
    if (increasing) return Regime::growing_oscillation;
    return Regime::inconclusive;
}

double estimate_decay_rate(const Trajectory& traj, double window_fraction) {
    if (!(window_fraction > 0.0) || !(window_fraction < 1.0))
        throw domain_error(errc::bad_config,
                           "window_fraction must be in (0, 1)");
    const auto& u = traj.values;
    const auto& tt = traj.times;
    if (u.size() < 2)
        throw domain_error(errc::bad_config, "trajectory too short to fit");
    const double t0 = tt.back() * (1.0 - window_fraction);
    std::size_t i0 = 0;
    while (i0 < tt.size() && tt[i0] < t0 - 1e-12) ++i0;
    const std::size_t count = tt.size() - i0;
    if (count < 5)
        throw domain_error(errc::bad_config,
                           "fit window has fewer than 5 points");
    for (std::size_t i = i0; i < u.size(); ++i)
        if (!(u[i] > 0.0))
            throw domain_error(errc::nonpositive_window,
                               "u must be strictly positive over the fit "
                               "window");
    double mean_t = 0.0;
    double mean_z = 0.0;
    for (std::size_t i = i0; i < u.size(); ++i) {
        mean_t += tt[i];
        mean_z += 2.0 * std::log(u[i]) - 0.6931471805599453;
    }
    mean_t /= double(count);
    mean_z /= double(count);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = i0; i < u.size(); ++i) {
        const double dt = tt[i] - mean_t;
        num += dt * (2.0 * std::log(u[i]) - 0.6931471805599453 - mean_z);
        den += dt * dt;
    }
    return num / den;
}

EnvelopeReport check_envelope(const Trajectory& traj, double mu,
                              const std::vector<double>& s_grid) {
    if (!std::isfinite(mu) || !(mu > 0.0))
        throw domain_error(errc::mu_out_of_range,
                           "check_envelope needs mu > 0");
    for (double s : s_grid)
        if (!std::isfinite(s) || !(s > 0.0))
            throw domain_error(errc::bad_config,
                               "envelope lags must be strictly positive");
    EnvelopeReport report;
    constexpr double slack = 1e-6;
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        const double ui = traj.values[i];
        const double y_t = 0.5 * ui * ui;
        for (double s : s_grid) {
            const double lag_t = t - s;
            double y_lag;
            if (lag_t <= 0.0) {
                y_lag = 0.5;
            } else {
                const double ul = interpolate(traj, lag_t);
                y_lag = 0.5 * ul * ul;
            }
            const double lower = std::exp(-2.0 * mu * s) * y_t;
            const double upper = std::exp(2.0 * mu * s) * y_t;
            ++report.checks;
            if (!(y_lag > lower * (1.0 - slack)) ||
                !(y_lag < upper * (1.0 + slack))) {
                report.violations.push_back(
                    EnvelopeViolation{t, s, y_t, y_lag, lower, upper});
            }
        }
    }
    return report;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::string out = "# dist=" + render_dist_spec(traj.dist);
    out += " h=" + fmt(traj.config.h);
    out += " t_end=" + fmt(traj.config.t_end);
    out += " eps_tail=" + fmt(traj.config.eps_tail);
    out += " quad_points_per_step=" +
           std::to_string(traj.config.quad_points_per_step);
    out += " blow_up=";
    out += traj.blow_up ? '1' : '0';
    out += "\nt,u\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += fmt(traj.times[i]);
        out += ',';
        out += fmt(traj.values[i]);
        out += '\n';
    }
    return out;
}

} // namespace delaydecay
