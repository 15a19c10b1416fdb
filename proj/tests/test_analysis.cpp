#include "doctest.h"

#include "support/oracles.hpp"
#include "trimap/analysis.hpp"

#include <cmath>

using namespace trimap;

namespace {

TriangularSystem logistic_1d(double mu) {
    return scalar_system([mu](double x) { return mu * x * (1.0 - x); }, {0.0, 1.0});
}

// The same scalar map declared with period n.
TriangularSystem repeated(const TriangularSystem& base, std::size_t n) {
    std::vector<TriangularMap> maps(n, base.map(0));
    return TriangularSystem(std::move(maps), {n});
}

LowerTriangular diagonal(std::initializer_list<double> d) {
    LowerTriangular m(d.size());
    std::size_t i = 0;
    for (double v : d) {
        m.at(i, i) = v;
        ++i;
    }
    return m;
}

}  // namespace

TEST_CASE("spectrum verdicts") {
    CHECK(classify_spectrum(diagonal({0.5, -0.9})).verdict == Verdict::Sink);
    CHECK(classify_spectrum(diagonal({1.5, -2.0})).verdict == Verdict::Source);
    CHECK(classify_spectrum(diagonal({0.5, 3.0})).verdict == Verdict::Saddle);
    const auto c = classify_spectrum(diagonal({0.5, -1.0 + 1e-9}));
    CHECK(c.verdict == Verdict::NonHyperbolic);
    CHECK(c.center == 1);
    CHECK(c.requires_manual_analysis());
    CHECK(classify_spectrum(diagonal({0.5, -1.0 + 1e-9}), 1e-10).verdict == Verdict::Sink);
    CHECK(to_string(Verdict::Saddle) == "saddle");
}

TEST_CASE("scalar fixed points of the logistic map") {
    const auto op = compose(logistic_1d(3.3), 0, 1);
    const auto fps = find_fixed_points(op, {{0.0, 1.0}});
    REQUIRE(fps.records.size() == 2);
    CHECK(fps.records[0].points[0][0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(fps.records[1].points[0][0] == doctest::Approx(1.0 - 1.0 / 3.3).epsilon(1e-14));
    CHECK(fps.records[0].spectrum.verdict == Verdict::Source);
    CHECK(fps.records[1].spectrum.verdict == Verdict::Source);
    CHECK(fps.records[1].scenario == Scenario::CommonFixedPoint);
}

TEST_CASE("two roots inside one grid cell are separated") {
    // g(x) = x^2 - 1e-4 has roots at +-0.01 and no sign change over [-1, 1] with 2 cells.
    const auto sys = scalar_system([](double x) { return x + x * x - 1e-4; }, {-1.0, 1.0});
    SolverOptions opt;
    opt.grid = {3};
    const auto roots = coordinate_roots(compose(sys, 0, 1), {}, {-1.0, 1.0}, 3, opt);
    REQUIRE(roots.roots.size() == 2);
    CHECK(roots.roots[0] == doctest::Approx(-0.01));
    CHECK(roots.roots[1] == doctest::Approx(0.01));
}

TEST_CASE("continua of fixed points are flagged as degenerate") {
    const auto sys = scalar_system([](double x) { return x; }, {0.0, 1.0});
    const auto fps = find_fixed_points(compose(sys, 0, 1), {{0.0, 1.0}}, SolverOptions{{8}});
    CHECK(fps.degenerate);
    CHECK(fps.records.size() == 9);
}

TEST_CASE("solver input validation") {
    const auto op = compose(logistic_1d(2.0), 0, 1);
    CHECK_THROWS_AS((void)find_fixed_points(op, {{0.0, 1.0}}, SolverOptions{{1}}), std::invalid_argument);
    CHECK_THROWS_AS((void)find_fixed_points(op, {{0.0, INFINITY}}), std::invalid_argument);
    CHECK_THROWS_AS((void)find_fixed_points(op, {{0.0, 1.0}, {0.0, 1.0}}), DimensionError);
}

TEST_CASE("scenario taxonomy") {
    const auto base = logistic_1d(3.3);
    const Box box{{0.0, 1.0}};

    SUBCASE("cycle with period dividing p") {
        const auto sys = repeated(base, 4);
        // the two phase alignments of the 2-cycle are different solutions
        const auto orbits = find_periodic_orbits(sys, 0, 2, box);
        REQUIRE(orbits.records.size() == 2);
        CHECK(orbits.records[0].period == 2);
        CHECK(orbits.records[0].scenario == Scenario::Cycle);
    }
    SUBCASE("period equal to p") {
        const auto sys = repeated(base, 2);
        const auto orbits = find_periodic_orbits(sys, 0, 2, box);
        REQUIRE(orbits.records.size() == 2);
        CHECK(orbits.records[0].scenario == Scenario::GeometricCycle);
    }
    SUBCASE("period above p") {
        const auto orbits = find_periodic_orbits(base, 0, 2, box);
        REQUIRE(orbits.records.size() == 1);
        CHECK(orbits.records[0].scenario == Scenario::SuperPeriod);
        const auto p2 = oracle::logistic_period2_points(3.3);
        CHECK(orbits.records[0].points[0][0] == doctest::Approx(p2[0]).epsilon(1e-12));
    }
    SUBCASE("period not dividing p") {
        const auto sys = repeated(base, 3);
        const auto orbits = find_periodic_orbits(sys, 0, 2, box);
        REQUIRE(orbits.records.size() == 1);
        CHECK(orbits.records[0].scenario == Scenario::SuperPeriod);
    }
    SUBCASE("points that are not an orbit") {
        CycleRecord fake;
        fake.period = 2;
        fake.points = {Point{0.1}, Point{0.2}};
        CHECK(scenario_classify(base, fake) == Scenario::Irregular);
    }
}

TEST_CASE("period-2 test separates witnesses from unlisted fixed points") {
    const auto op = compose(logistic_1d(3.3), 0, 1);
    const std::vector<Point> only_origin{Point{0.0}};
    const auto r = period2_absence_test(op, only_origin, {{0.0, 1.0}});
    CHECK_FALSE(r.absent);
    REQUIRE(r.witnesses.size() == 2);
    REQUIRE(r.unlisted_fixed.size() == 1);
    CHECK(r.unlisted_fixed[0][0] == doctest::Approx(1.0 - 1.0 / 3.3));

    const auto op2 = compose(logistic_1d(2.8), 0, 1);
    const std::vector<Point> known{Point{0.0}, Point{1.0 - 1.0 / 2.8}};
    CHECK(period2_absence_test(op2, known, {{0.0, 1.0}}).absent);
}

TEST_CASE("one-dimensional global convergence test") {
    const auto ok = coppel_1d_test([](double x) { return 2.8 * x * (1.0 - x); }, {0.0, 1.0});
    CHECK(ok.verdict == CoppelVerdict::ConvergesGlobally);
    CHECK(ok.fixed_points.size() == 2);

    const auto cyc = coppel_1d_test([](double x) { return 3.3 * x * (1.0 - x); }, {0.0, 1.0});
    CHECK(cyc.verdict == CoppelVerdict::Period2Exists);
    CHECK(cyc.witnesses.size() == 2);

    const auto out = coppel_1d_test([](double x) { return 4.5 * x * (1.0 - x); }, {0.0, 1.0});
    CHECK(out.verdict == CoppelVerdict::NotSelfMap);
    REQUIRE(out.self_map_violation);
    CHECK(4.5 * *out.self_map_violation * (1.0 - *out.self_map_violation) > 1.0);
}

TEST_CASE("omega-limit clusters of a converged two-cycle") {
    const auto sys = logistic_1d(3.3);
    const Orbit o = iterate_orbit(sys, Point{0.3}, 0, 2000, ConvergenceRule{1e-12, false});
    const auto om = omega_limit_estimate(o, 1, 1e-6);
    REQUIRE(om.clusters.size() == 2);
    CHECK(om.tail_length >= 10);
    const auto p2 = oracle::logistic_period2_points(3.3);
    for (const auto& c : om.clusters) {
        CHECK(std::min(std::abs(c[0] - p2[0]), std::abs(c[0] - p2[1])) < 1e-6);
    }
}

TEST_CASE("sample grids") {
    SampleGrid g{Box{{0.0, 1.0}, {0.0, 2.0}}, {2, 3}};
    const auto pts = g.points();
    REQUIRE(pts.size() == 6);
    CHECK(pts[0] == Point{0.25, 1.0 / 3.0});
    CHECK(pts[1][1] == doctest::Approx(1.0));
    g.interior = false;
    CHECK(g.points().size() == 6);
    CHECK(g.points().front() == Point{0.0, 0.0});
    CHECK(g.points().back() == Point{1.0, 2.0});
    g.interior = true;
    g.jitter = 0.5;
    g.seed = 7;
    const auto a = g.points(), b = g.points();
    CHECK(a == b);
    CHECK(a != pts);
}

TEST_CASE("global convergence to a sink and to a two-cycle") {
    const auto sys = logistic_1d(2.8);
    const auto fps = find_fixed_points(compose(sys, 0, 1), {{0.0, 1.0}});
    std::vector<CycleRecord> sinks;
    for (const auto& r : fps.records) {
        if (r.spectrum.verdict == Verdict::Sink) sinks.push_back(r);
    }
    REQUIRE(sinks.size() == 1);
    const auto rep = verify_global_convergence(sys, sinks, SampleGrid{{{0.0, 1.0}}, {100}}, 5000, 1e-8);
    CHECK(rep.fraction == 1.0);
    CHECK(rep.non_convergent().empty());

    const auto sys2 = logistic_1d(3.3);
    const auto cycles = find_periodic_orbits(sys2, 0, 2, {{0.0, 1.0}});
    const auto rep2 = verify_global_convergence(sys2, cycles.records, SampleGrid{{{0.0, 1.0}}, {100}}, 5000, 1e-8);
    CHECK(rep2.fraction == 1.0);
    const auto rep3 = verify_global_convergence(sys2, fps.records, SampleGrid{{{0.0, 1.0}}, {100}}, 5000, 1e-8);
    CHECK(rep3.fraction < 1.0);
    CHECK_FALSE(rep3.non_convergent().empty());
}
