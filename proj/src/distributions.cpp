#include "delaydecay/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "delaydecay/errors.hpp"
#include "delaydecay/special_functions.hpp"

namespace delaydecay {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be finite, got " << v;
        throw validation_error(errc::non_finite_parameter, os.str());
    }
}

FiniteAtoms normalize_atoms(const FiniteAtoms& fa) {
    if (fa.atoms.empty())
        throw validation_error(errc::no_atoms, "atom list is empty");
    double sum = 0.0;
    for (const Atom& at : fa.atoms) {
        require_finite(at.s, "atom position");
        require_finite(at.w, "atom weight");
        if (at.s < 0.0)
            throw validation_error(errc::negative_support,
                                   "atom position must be >= 0");
        if (at.w <= 0.0)
            throw validation_error(errc::nonpositive_weight,
                                   "atom weight must be > 0");
        sum += at.w;
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "atom weights sum to " << sum << ", expected 1 within 1e-12";
        throw validation_error(errc::weight_sum_off, os.str());
    }
    FiniteAtoms out = fa;
    std::sort(out.atoms.begin(), out.atoms.end(),
              [](const Atom& x, const Atom& y) { return x.s < y.s; });
    std::vector<Atom> merged;
    for (const Atom& at : out.atoms) {
        if (!merged.empty() && merged.back().s == at.s)
            merged.back().w += at.w;
        else
            merged.push_back(at);
    }
    for (Atom& at : merged) at.w /= sum;
    out.atoms = std::move(merged);
    return out;
}

double trunc_normal_log_mass(double r) {
    // log P(X > 0) for X ~ N(m, sigma^2) with r = m / sigma.
    return log_std_normal_cdf(r);
}

} // namespace

DelayDistribution validate(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& d) -> DelayDistribution {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) {
                require_finite(d.tau, "tau");
                if (d.tau < 0.0)
                    throw validation_error(errc::negative_support,
                                           "tau must be >= 0");
                return d;
            } else if constexpr (std::is_same_v<T, Gamma>) {
                require_finite(d.k, "k");
                require_finite(d.lambda, "lambda");
                if (d.k <= 0.0)
                    throw validation_error(errc::nonpositive_shape,
                                           "shape k must be > 0");
                if (d.lambda <= 0.0)
                    throw validation_error(errc::nonpositive_rate,
                                           "rate lambda must be > 0");
                return d;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                require_finite(d.a, "a");
                require_finite(d.b, "b");
                if (d.a < 0.0)
                    throw validation_error(errc::negative_support,
                                           "a must be >= 0");
                if (!(d.a < d.b))
                    throw validation_error(errc::empty_interval,
                                           "interval needs a < b");
                return d;
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                require_finite(d.m, "m");
                require_finite(d.sigma, "sigma");
                if (d.sigma <= 0.0)
                    throw validation_error(errc::nonpositive_sigma,
                                           "sigma must be > 0");
                return d;
            } else {
                return normalize_atoms(d);
            }
        },
        dist);
}

double exp_moment(const DelayDistribution& dist, double mu) {
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw domain_error(errc::mu_out_of_range, "exp_moment needs mu >= 0");
    if (mu == 0.0) return 1.0;
    return std::visit(
        [mu](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) {
                return std::exp(mu * d.tau);
            } else if constexpr (std::is_same_v<T, Gamma>) {
                if (mu >= d.lambda * (1.0 - 1e-12)) return inf;
                return std::exp(-d.k * std::log1p(-mu / d.lambda));
            } else if constexpr (std::is_same_v<T, Uniform>) {
                double x = mu * (d.b - d.a);
                double f = std::fabs(x) < 1e-6
                               ? 1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
                               : std::expm1(x) / x;
                return std::exp(mu * d.a) * f;
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                double r = d.m / d.sigma;
                double log_m = trunc_normal_log_mass(r + d.sigma * mu) -
                               trunc_normal_log_mass(r) + d.m * mu +
                               0.5 * d.sigma * d.sigma * mu * mu;
                return std::exp(log_m);
            } else {
                double acc = 0.0;
                for (const Atom& at : d.atoms) acc += at.w * std::exp(mu * at.s);
                return acc;
            }
        },
        dist);
}

double mean_delay(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) {
                return d.tau;
            } else if constexpr (std::is_same_v<T, Gamma>) {
                return d.k / d.lambda;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return 0.5 * (d.a + d.b);
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                return d.m + d.sigma * normal_cdf_ratio(d.m / d.sigma);
            } else {
                double acc = 0.0;
                for (const Atom& at : d.atoms) acc += at.w * at.s;
                return acc;
            }
        },
        dist);
}

double cdf(const DelayDistribution& dist, double s) {
    return std::visit(
        [s](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) {
                return s >= d.tau ? 1.0 : 0.0;
            } else if constexpr (std::is_same_v<T, Gamma>) {
                if (s <= 0.0) return 0.0;
                return boost::math::gamma_p(d.k, d.lambda * s);
            } else if constexpr (std::is_same_v<T, Uniform>) {
                if (s <= d.a) return 0.0;
                if (s >= d.b) return 1.0;
                return (s - d.a) / (d.b - d.a);
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                if (s <= 0.0) return 0.0;
                double r = d.m / d.sigma;
                double z = (s - d.m) / d.sigma;
                // 1 - P(X > s) / P(X > 0), evaluated in log space so deep
                // tails keep full relative accuracy.
                return -std::expm1(log_std_normal_cdf(-z) -
                                   trunc_normal_log_mass(r));
            } else {
                double acc = 0.0;
                for (const Atom& at : d.atoms)
                    if (at.s <= s) acc += at.w;
                return acc;
            }
        },
        dist);
}

double density(const DelayDistribution& dist, double s) {
    return std::visit(
        [s](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Gamma>) {
                if (s < 0.0) return 0.0;
                if (s == 0.0) {
                    if (d.k < 1.0) return inf;
                    return d.k == 1.0 ? d.lambda : 0.0;
                }
                return std::exp(d.k * std::log(d.lambda) +
                                (d.k - 1.0) * std::log(s) - d.lambda * s -
                                std::lgamma(d.k));
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return (s >= d.a && s <= d.b) ? 1.0 / (d.b - d.a) : 0.0;
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                if (s < 0.0) return 0.0;
                double r = d.m / d.sigma;
                double z = (s - d.m) / d.sigma;
                return std::exp(-0.5 * z * z - std::log(d.sigma) -
                                0.91893853320467274178 -
                                trunc_normal_log_mass(r));
            } else {
                throw domain_error(errc::no_density,
                                   "purely atomic distribution has no density");
            }
        },
        dist);
}

double tail_cutoff(const DelayDistribution& dist, double eps) {
    if (!(eps > 0.0) || !(eps < 1.0))
        throw domain_error(errc::eps_out_of_range,
                           "tail_cutoff needs eps in (0, 1)");
    return std::visit(
        [eps](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) {
                return d.tau;
            } else if constexpr (std::is_same_v<T, Gamma>) {
                boost::math::gamma_distribution<double> g(d.k, 1.0 / d.lambda);
                return boost::math::quantile(boost::math::complement(g, eps));
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return d.b;
            } else if constexpr (std::is_same_v<T, TruncatedNormal>) {
                // Solve log P(Z > z) == log(eps) + log P(Z > -r) by bisection;
                // the left side is strictly decreasing in z.
                double r = d.m / d.sigma;
                double target = std::log(eps) + trunc_normal_log_mass(r);
                double lo = -r;
                double hi = std::max(-r, 0.0) + 1.0;
                while (log_std_normal_cdf(-hi) > target) {
                    lo = hi;
                    hi = 2.0 * hi + 1.0;
                }
                for (int i = 0; i < 200 && hi - lo >
                                    1e-14 * std::max(1.0, std::fabs(hi));
                     ++i) {
                    double mid = 0.5 * (lo + hi);
                    if (log_std_normal_cdf(-mid) > target)
                        lo = mid;
                    else
                        hi = mid;
                }
                return d.m + d.sigma * hi;
            } else {
                double s_max = 0.0;
                for (const Atom& at : d.atoms) s_max = std::max(s_max, at.s);
                return s_max;
            }
        },
        dist);
}

bool has_density(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            return std::is_same_v<T, Gamma> || std::is_same_v<T, Uniform> ||
                   std::is_same_v<T, TruncatedNormal>;
        },
        dist);
}

double support_lower(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) {
                return d.tau;
            } else if constexpr (std::is_same_v<T, Uniform>) {
                return d.a;
            } else if constexpr (std::is_same_v<T, FiniteAtoms>) {
                double s_min = inf;
                for (const Atom& at : d.atoms) s_min = std::min(s_min, at.s);
                return s_min;
            } else {
                return 0.0;
            }
        },
        dist);
}

std::vector<Atom> atom_list(const DelayDistribution& dist) {
    if (const auto* di = std::get_if<Dirac>(&dist))
        return {Atom{di->tau, 1.0}};
    if (const auto* fa = std::get_if<FiniteAtoms>(&dist)) return fa->atoms;
    throw domain_error(errc::no_atoms, "distribution is not purely atomic");
}

std::string family_name(const DelayDistribution& dist) {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Dirac>) return "dirac";
            else if constexpr (std::is_same_v<T, Gamma>) return "gamma";
            else if constexpr (std::is_same_v<T, Uniform>) return "uniform";
            else if constexpr (std::is_same_v<T, TruncatedNormal>)
                return "truncnormal";
            else return "atoms";
        },
        dist);
}

} // namespace delaydecay
