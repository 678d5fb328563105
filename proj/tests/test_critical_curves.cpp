#include <doctest.h>

#include <cmath>
#include <limits>

#include "delaydecay/critical_curves.hpp"
#include "delaydecay/errors.hpp"

using namespace delaydecay;

namespace {
DelayDistribution dirac_builder(double tau) { return Dirac{tau}; }

bool abs_close(double got, double want, double tol) {
    return std::fabs(got - want) <= tol;
}
} // namespace

TEST_CASE("bisection recovers the sharp dirac moment threshold") {
    const CurvePoint pt = critical_scalar(dirac_builder, 0.2, 0.5, 1e-5,
                                          FeasibleSide::below);
    CHECK(pt.status == PointStatus::ok);
    CHECK(pt.feasible_side == FeasibleSide::below);
    CHECK(pt.bracket_width <= 1e-5);
    CHECK(abs_close(pt.critical_value, 0.34657359027997265471, 2e-5));
}

TEST_CASE("bisection with the feasible region above") {
    auto builder = [](double lambda) -> DelayDistribution {
        return Gamma{1.0, lambda};
    };
    const CurvePoint pt =
        critical_scalar(builder, 3.0, 8.0, 1e-4, FeasibleSide::above);
    CHECK(pt.feasible_side == FeasibleSide::above);
    CHECK(abs_close(pt.critical_value, 5.1961524227066318806, 1e-3));
    CHECK(pt.bracket_width <= 1e-4);
}

TEST_CASE("bad brackets are rejected up front") {
    // Both ends infeasible.
    CHECK_THROWS_AS(critical_scalar(dirac_builder, 0.4, 0.5, 1e-5,
                                    FeasibleSide::below),
                    bracket_error);
    // Both ends feasible.
    CHECK_THROWS_AS(critical_scalar(dirac_builder, 0.1, 0.3, 1e-5,
                                    FeasibleSide::below),
                    bracket_error);
    // Feasible end on the wrong side.
    CHECK_THROWS_AS(critical_scalar(dirac_builder, 0.2, 0.5, 1e-5,
                                    FeasibleSide::above),
                    bracket_error);
    // Malformed interval and tolerance.
    CHECK_THROWS_AS(critical_scalar(dirac_builder, 0.5, 0.2, 1e-5,
                                    FeasibleSide::below),
                    domain_error);
    CHECK_THROWS_AS(critical_scalar(dirac_builder, 0.2, 0.5, 0.0,
                                    FeasibleSide::below),
                    domain_error);
}

TEST_CASE("uniform sweep matches reference critical lengths") {
    const CriticalCurve curve =
        sweep_uniform_curve({0.0, 0.1, 0.2, 0.3, 0.34}, 1e-4);
    CHECK(curve.family == "uniform");
    CHECK(curve.tol == 1e-4);
    REQUIRE(curve.points.size() == 5);
    const double want[] = {0.59421, 0.44089, 0.27359, 0.09103, 0.01309};
    for (std::size_t i = 0; i < 5; ++i) {
        const CurvePoint& pt = curve.points[i];
        CHECK(pt.status == PointStatus::ok);
        CHECK(abs_close(pt.critical_value, want[i], 1e-3));
        CHECK(pt.bracket_width <= 1e-4);
    }
    // The critical length shrinks as the interval start grows.
    for (std::size_t i = 0; i + 1 < 5; ++i)
        CHECK(curve.points[i].critical_value >
              curve.points[i + 1].critical_value);
}

TEST_CASE("uniform sweep marks starts beyond the dirac threshold") {
    const CriticalCurve curve = sweep_uniform_curve({0.35, 0.36, 0.5}, 1e-4);
    for (const CurvePoint& pt : curve.points) {
        CHECK(pt.status == PointStatus::all_infeasible);
        CHECK(std::isnan(pt.critical_value));
        CHECK(pt.bracket_width == 0.0);
    }
}

TEST_CASE("truncated normal sweep matches references and orders by m") {
    const CriticalCurve curve =
        sweep_truncnormal_curve({-2.0, 0.0, 0.3}, 10.0, 1e-4);
    CHECK(curve.family == "truncnormal");
    CHECK(curve.fixed_params.at("sigma_hi") == 10.0);
    REQUIRE(curve.points.size() == 3);
    CHECK(abs_close(curve.points[0].critical_value, 0.71323, 1e-3));
    CHECK(abs_close(curve.points[1].critical_value, 0.31704, 1e-3));
    CHECK(abs_close(curve.points[2].critical_value, 0.15446, 1e-3));
    CHECK(curve.points[0].critical_value > curve.points[1].critical_value);

    const CriticalCurve blocked =
        sweep_truncnormal_curve({0.4, 0.8}, 10.0, 1e-4);
    for (const CurvePoint& pt : blocked.points) {
        CHECK(pt.status == PointStatus::all_infeasible);
        CHECK(std::isnan(pt.critical_value));
    }
}

TEST_CASE("sweep validates its inputs") {
    CHECK_THROWS_AS(sweep_uniform_curve({}, 1e-4), domain_error);
    CHECK_THROWS_AS(sweep_uniform_curve({0.1, 0.1}, 1e-4), domain_error);
    CHECK_THROWS_AS(sweep_uniform_curve({-0.1}, 1e-4), domain_error);
    CHECK_THROWS_AS(sweep_uniform_curve({0.1}, 0.0), domain_error);
    CHECK_THROWS_AS(
        sweep_uniform_curve({0.0, std::numeric_limits<double>::infinity()},
                            1e-4),
        domain_error);
    CHECK_THROWS_AS(sweep_truncnormal_curve({0.0}, 0.0, 1e-4), domain_error);
    CHECK_THROWS_AS(sweep_truncnormal_curve({}, 10.0, 1e-4), domain_error);
}

TEST_CASE("an unsorted grid is swept in ascending order") {
    const CriticalCurve curve = sweep_uniform_curve({0.2, 0.0, 0.1}, 1e-4);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[0].scan_value == 0.0);
    CHECK(curve.points[1].scan_value == 0.1);
    CHECK(curve.points[2].scan_value == 0.2);
}

TEST_CASE("results do not depend on the thread count") {
    const CriticalCurve one =
        sweep_uniform_curve({0.0, 0.1, 0.2, 0.36}, 1e-4, {}, 1);
    const CriticalCurve four =
        sweep_uniform_curve({0.0, 0.1, 0.2, 0.36}, 1e-4, {}, 4);
    REQUIRE(one.points.size() == four.points.size());
    for (std::size_t i = 0; i < one.points.size(); ++i) {
        const CurvePoint& p1 = one.points[i];
        const CurvePoint& p4 = four.points[i];
        CHECK(p1.scan_value == p4.scan_value);
        CHECK((std::isnan(p1.critical_value)
                   ? std::isnan(p4.critical_value)
                   : p1.critical_value == p4.critical_value));
        CHECK(p1.status == p4.status);
    }
}

TEST_CASE("curve csv has one row per point and named sides") {
    const CriticalCurve curve = sweep_uniform_curve({0.0, 0.36}, 1e-4);
    const std::string csv = curve_to_csv(curve);
    CHECK(csv.rfind("scan,critical,bracket,feasible_side\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    CHECK(rows == 3);
    CHECK(csv.find("below") != std::string::npos);
    CHECK(csv.find("none") != std::string::npos);
    CHECK(csv.find("nan") != std::string::npos);
}
