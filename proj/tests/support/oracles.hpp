#pragma once

// Reference implementations used only by tests. Everything here is written
// against textbook formulas and the C library, independent of the library's
// own special functions and quadrature.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fm, double fb,
                          double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-13,
                               int depth = 48) {
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole,
                       tol * std::max(1.0, std::fabs(whole)), depth);
}

// Exponential moments of the continuous families by direct quadrature with
// the integration window extended until the remaining tail is negligible.

inline double gamma_density(double k, double lambda, double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(k * std::log(lambda) + (k - 1.0) * std::log(s) -
                    lambda * s - std::lgamma(k));
}

inline double moment_gamma(double k, double lambda, double mu) {
    // Substituting s = v^2 removes the s^(k-1) singularity for k >= 1/2:
    // the integrand becomes 2 lambda^k v^(2k-1) exp((mu-lambda) v^2) / G(k).
    const double scale = 2.0 * std::exp(k * std::log(lambda) - std::lgamma(k));
    auto f = [&](double v) {
        return scale * std::pow(v, 2.0 * k - 1.0) *
               std::exp((mu - lambda) * v * v);
    };
    double hi = std::sqrt((k + 12.0 * std::sqrt(k) + 12.0) / (lambda - mu));
    double total = adaptive_simpson(f, 0.0, hi);
    while (true) {
        const double more = adaptive_simpson(f, hi, hi * 1.4);
        total += more;
        hi *= 1.4;
        if (std::fabs(more) <= 1e-13 * std::fabs(total)) break;
        if (hi > 1e4) throw std::runtime_error("gamma moment tail too fat");
    }
    return total;
}

inline double moment_uniform(double a, double b, double mu) {
    auto f = [&](double s) { return std::exp(mu * s) / (b - a); };
    return adaptive_simpson(f, a, b);
}

inline double moment_truncnormal(double m, double sigma, double mu) {
    const double z0 = normal_cdf(m / sigma);
    auto f = [&](double s) {
        return std::exp(mu * s) * normal_pdf((s - m) / sigma) / (sigma * z0);
    };
    double hi = m + sigma * (10.0 + sigma * mu) + 1.0;
    double total = adaptive_simpson(f, 0.0, hi);
    while (true) {
        const double more = adaptive_simpson(f, hi, hi + 5.0 * sigma);
        total += more;
        hi += 5.0 * sigma;
        if (std::fabs(more) <= 1e-13 * std::fabs(total)) break;
        if (hi > 1e6) throw std::runtime_error("truncnormal tail too fat");
    }
    return total;
}

// Exact solution of u'(t) = -u(t - tau), u = 1 on (-inf, 0], built segment
// by segment: on [n tau, (n+1) tau] the solution is the polynomial
// p_{n+1}(x) = p_n(tau) - integral_0^x p_n, x = t - n tau.
struct DiracExact {
    double tau;
    std::vector<std::vector<double>> segs;

    explicit DiracExact(double tau_, int n_segs) : tau(tau_) {
        std::vector<double> cur{1.0, -1.0};  // u = 1 - t on [0, tau]
        for (int n = 0; n < n_segs; ++n) {
            std::vector<double> next(cur.size() + 1);
            next[0] = eval(cur, tau);
            for (std::size_t j = 0; j < cur.size(); ++j)
                next[j + 1] = -cur[j] / double(j + 1);
            segs.push_back(cur);
            cur = std::move(next);
        }
        segs.push_back(cur);
    }

    static double eval(const std::vector<double>& c, double x) {
        double acc = 0.0;
        for (std::size_t j = c.size(); j-- > 0;) acc = acc * x + c[j];
        return acc;
    }

    double operator()(double t) const {
        if (t <= 0.0) return 1.0;
        auto n = std::size_t(t / tau);
        if (n >= segs.size()) throw std::runtime_error("t beyond segments");
        return eval(segs[n], t - double(n) * tau);
    }
};

// First-order Euler reference for u'(t) = -u(t - tau), constant history 1.
inline std::vector<double> euler_dirac(double tau, double dt,
                                       std::size_t n_steps) {
    const auto lag = std::size_t(std::llround(tau / dt));
    std::vector<double> u;
    u.reserve(n_steps + 1);
    u.push_back(1.0);
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double delayed = n >= lag ? u[n - lag] : 1.0;
        u.push_back(u[n] - dt * delayed);
    }
    return u;
}

} // namespace oracles
