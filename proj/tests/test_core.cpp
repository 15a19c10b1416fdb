#include "doctest.h"

#include "trimap/analysis.hpp"
#include "trimap/core.hpp"

#include <cmath>

using namespace trimap;

namespace {

// F_n(x, y) = (a_n x, x + b y) with a = {0.5, 2}, constant b.
TriangularSystem affine_system(double b = 0.25) {
    std::vector<TriangularMap> maps;
    for (double a : {0.5, 2.0}) {
        maps.emplace_back(std::vector<CoordinateMap>{
                              CoordinateMap(1, [a](std::span<const double> x) { return a * x[0]; }),
                              CoordinateMap(2, [b](std::span<const double> x) { return x[0] + b * x[1]; }),
                          },
                          Box{{-10.0, 10.0}, {-10.0, 10.0}});
    }
    return TriangularSystem(std::move(maps), {2, 1});
}

}  // namespace

TEST_CASE("lower-triangular storage and product") {
    LowerTriangular a(2), b(2);
    a.at(0, 0) = 2.0;
    a.at(1, 0) = 3.0;
    a.at(1, 1) = 4.0;
    b.at(0, 0) = 5.0;
    b.at(1, 0) = 6.0;
    b.at(1, 1) = 7.0;
    CHECK(a(0, 1) == 0.0);
    CHECK_THROWS_AS(a.at(0, 1), std::out_of_range);
    const LowerTriangular c = a * b;
    CHECK(c(0, 0) == 10.0);
    CHECK(c(1, 0) == 3.0 * 5.0 + 4.0 * 6.0);
    CHECK(c(1, 1) == 28.0);
    CHECK(c.diagonal() == std::vector<double>{10.0, 28.0});
    CHECK(LowerTriangular::identity(3).diagonal() == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("coordinate maps only see their own prefix") {
    CoordinateMap f(1, [](std::span<const double> x) {
        REQUIRE(x.size() == 1);
        return 2.0 * x[0];
    });
    const std::vector<double> x{1.5, 99.0};
    CHECK(f(x) == 3.0);
    CHECK(f.finite_difference(x, 0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(CoordinateMap(0, [](std::span<const double>) { return 0.0; }), std::invalid_argument);
}

TEST_CASE("system period is the lcm of coordinate periods") {
    CHECK(system_period(std::vector<std::size_t>{2, 3}) == 6);
    CHECK(system_period(std::vector<std::size_t>{4, 6, 1}) == 12);
    CHECK_THROWS((void)system_period(std::vector<std::size_t>{}));
    const auto sys = affine_system();
    CHECK(sys.period() == 2);
    CHECK(sys.dim() == 2);
    CHECK(&sys.map(3) == &sys.map(1));
}

TEST_CASE("mismatched period declarations are rejected") {
    auto sys = affine_system();
    std::vector<TriangularMap> maps{sys.map(0), sys.map(1)};
    CHECK_THROWS_AS(TriangularSystem(maps, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(TriangularSystem(maps, {3, 1}), std::invalid_argument);
}

TEST_CASE("orbits follow the phase and stop on convergence") {
    const auto sys = affine_system();
    const Point x0{1.0, 0.0};
    const Orbit o = iterate_orbit(sys, x0, 1, 4, ConvergenceRule{1e-12, false});
    REQUIRE(o.trajectory.size() == 5);
    CHECK(o.trajectory[1][0] == 2.0);
    CHECK(o.trajectory[2][0] == 1.0);
    CHECK(o.trajectory[1][1] == 1.0);
    CHECK_FALSE(o.converged);

    const Orbit still = iterate_orbit(sys, Point{0.0, 0.0}, 0, 10);
    CHECK(still.converged);
    CHECK(*still.converged_at == 0);
    CHECK(still.trajectory.size() == 3);

    const Orbit e = iterate_orbit(sys, Point{8.0, 0.0}, 1, 4);
    CHECK(e.escaped);
    CHECK_FALSE(e.non_finite);
    CHECK_THROWS_AS((void)iterate_orbit(sys, Point{20.0, 0.0}, 0, 1), std::domain_error);
}

TEST_CASE("non-finite values stop the orbit and name the coordinate") {
    std::vector<TriangularMap> maps{TriangularMap(
        {CoordinateMap(1, [](std::span<const double> x) { return x[0]; }),
         CoordinateMap(2, [](std::span<const double> x) { return 1.0 / x[1]; })},
        Box{{-1.0, 1.0}, {-1.0, 1.0}})};
    const TriangularSystem sys(maps, {1, 1});
    const Orbit o = iterate_orbit(sys, Point{0.5, 0.0}, 0, 3);
    CHECK(o.non_finite);
    CHECK(o.escaped);
    CHECK(*o.failed_coordinate == 2);
    CHECK(o.trajectory.size() == 1);
}

TEST_CASE("window compositions apply maps in order") {
    const auto sys = affine_system();
    const auto op = compose(sys, 1, 2);
    const Point y = op(Point{1.0, 1.0});
    // F_0(F_1(1, 1)) = F_0(2, 1.25) = (1, 2 + 0.3125)
    CHECK(y[0] == 1.0);
    CHECK(y[1] == doctest::Approx(2.3125));
    CHECK(op.partial_orbit(Point{1.0, 1.0}).size() == 3);
    CHECK(op.iterated(3).steps() == 6);
    CHECK_THROWS_AS((void)compose(sys, 2, 1), std::out_of_range);
    CHECK_THROWS_AS((void)compose(sys, 0, 0), std::out_of_range);
}

TEST_CASE("chain-rule Jacobian is exactly lower triangular") {
    const auto sys = affine_system();
    const auto j = jacobian(compose(sys, 0, 2), Point{0.3, 0.7});
    CHECK(j(0, 1) == 0.0);
    CHECK(j(0, 0) == doctest::Approx(1.0));
    CHECK(j(1, 1) == doctest::Approx(0.0625));
    CHECK(j(1, 0) == doctest::Approx(0.25 * 1.0 + 1.0 * 0.5));
}

TEST_CASE("max-norm distance and box membership") {
    CHECK(max_norm_distance(Point{0.0, 1.0}, Point{0.5, -1.0}) == 2.0);
    const Box box{{0.0, 1.0}, {0.0, 2.0}};
    CHECK(box_contains(box, Point{1.0, 2.0}));
    CHECK_FALSE(box_contains(box, Point{1.1, 2.0}));
    CHECK(box_contains(box, Point{1.1, 2.0}, 0.2));
}
