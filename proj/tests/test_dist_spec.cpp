#include <doctest.h>

#include <random>
#include <variant>

#include "delaydecay/dist_spec.hpp"
#include "delaydecay/errors.hpp"

using namespace delaydecay;

TEST_CASE("parses every family") {
    const auto d1 = parse_dist_spec("dirac:tau=0.3");
    CHECK(std::get<Dirac>(d1).tau == 0.3);

    const auto d2 = parse_dist_spec("gamma:k=1,lambda=4.5");
    CHECK(std::get<Gamma>(d2).k == 1.0);
    CHECK(std::get<Gamma>(d2).lambda == 4.5);

    const auto d3 = parse_dist_spec("uniform:a=0,b=0.3");
    CHECK(std::get<Uniform>(d3).a == 0.0);
    CHECK(std::get<Uniform>(d3).b == 0.3);

    const auto d4 = parse_dist_spec("truncnormal:m=0.1,sigma=0.05");
    CHECK(std::get<TruncatedNormal>(d4).m == 0.1);
    CHECK(std::get<TruncatedNormal>(d4).sigma == 0.05);

    const auto d5 = parse_dist_spec("atoms:s=0.1;w=0.5|s=0.4;w=0.5");
    const auto& atoms = std::get<FiniteAtoms>(d5).atoms;
    REQUIRE(atoms.size() == 2);
    CHECK(atoms[0].s == 0.1);
    CHECK(atoms[0].w == 0.5);
    CHECK(atoms[1].s == 0.4);
    CHECK(atoms[1].w == 0.5);
}

TEST_CASE("key order does not matter") {
    const auto d = parse_dist_spec("gamma:lambda=4.5,k=1");
    CHECK(std::get<Gamma>(d).k == 1.0);
    CHECK(std::get<Gamma>(d).lambda == 4.5);
}

TEST_CASE("scientific notation and signs are accepted") {
    const auto d = parse_dist_spec("truncnormal:m=-2e0,sigma=6.5e-1");
    CHECK(std::get<TruncatedNormal>(d).m == -2.0);
    CHECK(std::get<TruncatedNormal>(d).sigma == 0.65);
}

TEST_CASE("render produces canonical round-trippable specs") {
    CHECK(render_dist_spec(Dirac{0.3}) == "dirac:tau=0.3");
    CHECK(render_dist_spec(Gamma{1.0, 4.5}) == "gamma:k=1,lambda=4.5");
    CHECK(render_dist_spec(Uniform{0.0, 0.3}) == "uniform:a=0,b=0.3");
    CHECK(render_dist_spec(TruncatedNormal{0.1, 0.05}) ==
          "truncnormal:m=0.1,sigma=0.05");
    CHECK(render_dist_spec(FiniteAtoms{{{0.1, 0.5}, {0.4, 0.5}}}) ==
          "atoms:s=0.1;w=0.5|s=0.4;w=0.5");
}

TEST_CASE("parse then render is the identity on random parameters") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> unif(1e-3, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = unif(rng);
        const double y = x + unif(rng);
        const DelayDistribution d =
            trial % 2 ? DelayDistribution(Gamma{x, 10.0 * y})
                      : DelayDistribution(Uniform{x, y});
        const std::string text = render_dist_spec(d);
        CHECK(render_dist_spec(parse_dist_spec(text)) == text);
    }
}

TEST_CASE("syntax errors carry the offending position") {
    try {
        parse_dist_spec("gauss:m=1");
        CHECK(false);
    } catch (const spec_parse_error& e) {
        CHECK(e.offset() == 0);
    }
    try {
        parse_dist_spec("dirac");
        CHECK(false);
    } catch (const spec_parse_error& e) {
        CHECK(e.offset() == 5);
    }
    try {
        parse_dist_spec("dirac:tau=zz");
        CHECK(false);
    } catch (const spec_parse_error& e) {
        CHECK(e.offset() == 10);
    }
    try {
        parse_dist_spec("gamma:k=1,k=2,lambda=3");
        CHECK(false);
    } catch (const spec_parse_error& e) {
        CHECK(e.offset() == 10);
    }
    CHECK_THROWS_AS(parse_dist_spec(""), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("dirac:"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("dirac:tau"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("dirac:=0.3"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("dirac:tau=0.3,x=1"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("gamma:k=1"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("gamma:k=1;lambda=2"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("atoms:s=0.1"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("atoms:s=0.1,w=1"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("atoms:"), spec_parse_error);
    CHECK_THROWS_AS(parse_dist_spec("dirac:tau=0.3 "), spec_parse_error);
}

TEST_CASE("well-formed specs with invalid values fail validation") {
    CHECK_THROWS_AS(parse_dist_spec("uniform:a=0.5,b=0.2"), validation_error);
    CHECK_THROWS_AS(parse_dist_spec("gamma:k=0,lambda=2"), validation_error);
    CHECK_THROWS_AS(parse_dist_spec("dirac:tau=-1"), validation_error);
    CHECK_THROWS_AS(parse_dist_spec("truncnormal:m=0,sigma=0"),
                    validation_error);
    CHECK_THROWS_AS(parse_dist_spec("atoms:s=0.1;w=0.3|s=0.2;w=0.3"),
                    validation_error);
}

TEST_CASE("atoms are normalized during parse") {
    const auto d = parse_dist_spec("atoms:s=0.4;w=0.5|s=0.1;w=0.25|s=0.1;w=0.25");
    const auto& atoms = std::get<FiniteAtoms>(d).atoms;
    REQUIRE(atoms.size() == 2);
    CHECK(atoms[0].s == 0.1);
    CHECK(atoms[0].w == 0.5);
    CHECK(atoms[1].s == 0.4);
    CHECK(atoms[1].w == 0.5);
}
