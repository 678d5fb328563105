#include "delaydecay/critical_curves.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "delaydecay/errors.hpp"

namespace delaydecay {

namespace {

constexpr double sigma_min = 1e-6;
constexpr double length_min = 1e-6;

bool feasible_at(const std::function<DelayDistribution(double)>& builder,
                 double x, const MuSearchConfig& mu_config) {
    return find_feasible_mu(builder(x), mu_config).feasible;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

// Runs fn(0..n-1) on up to `threads` workers; exceptions from workers are
// rethrown on the caller after all joins.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    unsigned hw = std::thread::hardware_concurrency();
    std::size_t workers = threads > 0 ? std::size_t(threads)
                                      : std::size_t(hw > 0 ? hw : 1);
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto work = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> checked_grid(const std::vector<double>& grid,
                                 const char* name) {
    if (grid.empty())
        throw domain_error(errc::bad_config,
                           std::string(name) + " grid is empty");
    std::vector<double> sorted = grid;
    for (double v : sorted)
        if (!std::isfinite(v))
            throw domain_error(errc::non_finite_parameter,
                               std::string(name) + " grid has a non-finite entry");
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw domain_error(errc::bad_config,
                           std::string(name) + " grid has duplicate entries");
    return sorted;
}

// Shared sweep-point logic: probe the scan bounds, mark degenerate points,
// otherwise bisect.
CurvePoint sweep_point(const std::function<DelayDistribution(double)>& builder,
                       double scan_value, double lo, double hi, double tol,
                       const MuSearchConfig& mu_config) {
    CurvePoint pt;
    pt.scan_value = scan_value;
    pt.feasible_side = FeasibleSide::below;
    if (!feasible_at(builder, lo, mu_config)) {
        pt.status = PointStatus::all_infeasible;
        pt.critical_value = std::numeric_limits<double>::quiet_NaN();
        return pt;
    }
    if (feasible_at(builder, hi, mu_config)) {
        pt.status = PointStatus::all_feasible;
        pt.critical_value = hi;
        return pt;
    }
    CurvePoint found =
        critical_scalar(builder, lo, hi, tol, FeasibleSide::below, mu_config);
    found.scan_value = scan_value;
    return found;
}

} // namespace

CurvePoint critical_scalar(
    const std::function<DelayDistribution(double)>& builder, double lo,
    double hi, double tol, FeasibleSide side,
    const MuSearchConfig& mu_config) {
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw domain_error(errc::non_finite_parameter,
                           "bracket endpoints must be finite");
    if (!(lo < hi))
        throw domain_error(errc::bad_bracket, "bracket needs lo < hi");
    if (!(tol > 0.0))
        throw domain_error(errc::bad_config, "tol must be > 0");

    const bool f_lo = feasible_at(builder, lo, mu_config);
    const bool f_hi = feasible_at(builder, hi, mu_config);
    if (f_lo == f_hi) {
        std::ostringstream os;
        os << "feasibility is " << (f_lo ? "true" : "false")
           << " at both bracket endpoints " << lo << " and " << hi;
        throw bracket_error(errc::bad_bracket, os.str());
    }
    const bool lo_should_be_feasible = side == FeasibleSide::below;
    if (f_lo != lo_should_be_feasible)
        throw bracket_error(errc::bad_bracket,
                            "declared feasible side does not match the "
                            "bracket endpoints");

    double a = lo;
    double b = hi;
    for (int it = 0; it < 200 && b - a > tol; ++it) {
        double mid = 0.5 * (a + b);
        if (feasible_at(builder, mid, mu_config) == f_lo)
            a = mid;
        else
            b = mid;
    }

    CurvePoint pt;
    pt.scan_value = std::numeric_limits<double>::quiet_NaN();
    pt.critical_value = 0.5 * (a + b);
    pt.bracket_width = b - a;
    pt.feasible_side = side;
    pt.status = PointStatus::ok;

    // Monotonicity guard: the bisection above is only meaningful if the
    // predicate flips once. Probe interior points away from the critical
    // value and compare with the side they fall on.
    for (int j = 1; j <= 5; ++j) {
        double x = lo + j * (hi - lo) / 6.0;
        bool expected;
        if (x < pt.critical_value - 2.0 * tol)
            expected = f_lo;
        else if (x > pt.critical_value + 2.0 * tol)
            expected = f_hi;
        else
            continue;
        if (feasible_at(builder, x, mu_config) != expected) {
            std::ostringstream os;
            os << "feasibility is not monotone across [" << lo << ", " << hi
               << "]: unexpected value at " << x;
            throw bracket_error(errc::non_monotone_predicate, os.str());
        }
    }
    return pt;
}

CriticalCurve sweep_uniform_curve(const std::vector<double>& a_grid,
                                  double tol,
                                  const MuSearchConfig& mu_config,
                                  int threads) {
    if (!(tol > 0.0))
        throw domain_error(errc::bad_config, "tol must be > 0");
    std::vector<double> grid = checked_grid(a_grid, "a");
    for (double a : grid)
        if (a < 0.0)
            throw domain_error(errc::negative_support,
                               "interval start a must be >= 0");

    CriticalCurve curve;
    curve.family = "uniform";
    curve.tol = tol;
    curve.mu_search_config = mu_config;
    curve.points.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        double a = grid[i];
        auto builder = [a](double len) -> DelayDistribution {
            return Uniform{a, a + len};
        };
        // Expand the probe ceiling while everything stays feasible; with
        // support reaching past s = 16 the exponential moments overflow any
        // mu > 1 budget, so growth always terminates.
        double hi = 1.0;
        if (feasible_at(builder, length_min, mu_config)) {
            while (hi < 16.1 && feasible_at(builder, hi, mu_config)) hi *= 2.0;
        }
        curve.points[i] =
            sweep_point(builder, a, length_min, hi, tol, mu_config);
    });
    return curve;
}

CriticalCurve sweep_truncnormal_curve(const std::vector<double>& m_grid,
                                      double sigma_hi, double tol,
                                      const MuSearchConfig& mu_config,
                                      int threads) {
    if (!(tol > 0.0))
        throw domain_error(errc::bad_config, "tol must be > 0");
    if (!std::isfinite(sigma_hi) || !(sigma_hi > sigma_min))
        throw domain_error(errc::bad_config,
                           "sigma_hi must be finite and > 1e-6");
    std::vector<double> grid = checked_grid(m_grid, "m");

    CriticalCurve curve;
    curve.family = "truncnormal";
    curve.fixed_params["sigma_hi"] = sigma_hi;
    curve.tol = tol;
    curve.mu_search_config = mu_config;
    curve.points.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        double m = grid[i];
        auto builder = [m](double sigma) -> DelayDistribution {
            return TruncatedNormal{m, sigma};
        };
        curve.points[i] =
            sweep_point(builder, m, sigma_min, sigma_hi, tol, mu_config);
    });
    return curve;
}

std::string curve_to_csv(const CriticalCurve& curve) {
    std::string out = "scan,critical,bracket,feasible_side\n";
    for (const CurvePoint& pt : curve.points) {
        out += format_double(pt.scan_value);
        out += ',';
        out += format_double(pt.critical_value);
        out += ',';
        out += format_double(pt.bracket_width);
        out += ',';
        switch (pt.status) {
        case PointStatus::all_infeasible: out += "none"; break;
        case PointStatus::all_feasible: out += "all"; break;
        case PointStatus::ok:
            out += pt.feasible_side == FeasibleSide::below ? "below" : "above";
            break;
        }
        out += '\n';
    }
    return out;
}

} // namespace delaydecay
