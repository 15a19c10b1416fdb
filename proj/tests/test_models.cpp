#include "doctest.h"

#include "support/oracles.hpp"
#include "trimap/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace trimap;
namespace md = trimap::models;

TEST_CASE("leslie-gower parameter validation") {
    md::LeslieGowerParams p;
    CHECK_NOTHROW(p.validate());
    p.beta = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.mu = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = {};
    p.K[1] = 0.0;
    CHECK_THROWS_AS((void)md::leslie_gower_system(p), std::invalid_argument);
}

TEST_CASE("leslie-gower closed forms are fixed points of the composition") {
    for (const auto& p : oracle::leslie_gower_draws(25, 11)) {
        const auto sys = md::leslie_gower_system(p);
        const auto op = compose(sys, 0, 2);
        const auto c = md::leslie_gower_cycles(p);
        CHECK(c.coexistence_admissible);
        for (const Point& x : {c.origin, c.exclusion_x[0], c.exclusion_y[0], c.coexistence[0]}) {
            CHECK(max_norm_distance(op(x), x) < 1e-13);
        }
        CHECK(max_norm_distance(sys.map(0)(c.coexistence[0]), c.coexistence[1]) < 1e-13);
        const auto newton = oracle::newton_fixed_point([&](const Point& x) { return op(x); },
                                                       Point{1.02 * c.coexistence[0][0], 0.98 * c.coexistence[0][1]});
        REQUIRE(newton);
        CHECK(max_norm_distance(*newton, c.coexistence[0]) < 1e-10);
        CHECK(md::leslie_gower_exclusion_quotient(p) > 1.0);
    }
}

TEST_CASE("exclusion quotient above one matches the coexistence condition") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int agree = 0;
    for (int i = 0; i < 500; ++i) {
        md::LeslieGowerParams p;
        p.mu = 1.2 + 2.8 * u(rng);
        p.alpha = 1.2 + 2.8 * u(rng);
        p.beta = 0.05 + 0.9 * u(rng);
        p.K = {0.5 + 2.5 * u(rng), 0.5 + 2.5 * u(rng)};
        p.L = {0.5 + 2.5 * u(rng), 0.5 + 2.5 * u(rng)};
        const bool coexist = oracle::leslie_gower_coexists(p);
        agree += (md::leslie_gower_exclusion_quotient(p) > 1.0) == coexist &&
                 md::leslie_gower_cycles(p).coexistence_admissible == coexist;
    }
    CHECK(agree == 500);
}

TEST_CASE("leslie-gower origin spectrum and autonomous collapse") {
    md::LeslieGowerParams p;
    const auto s = md::leslie_gower_spectra(p);
    CHECK(s.origin.eigenvalues == std::vector<double>{4.0, 4.0});
    CHECK(s.origin.verdict == Verdict::Source);
    CHECK(s.coexistence.verdict == Verdict::Sink);
    CHECK(md::leslie_gower_system(p).period() == 2);
    p.K = {1.5, 1.5};
    p.L = {1.0, 1.0};
    const auto sys = md::leslie_gower_system(p);
    CHECK(sys.period() == 1);
    CHECK_FALSE(sys.warnings().empty());
}

TEST_CASE("analytic and finite-difference partials agree") {
    md::LeslieGowerParams p;
    const auto a = md::leslie_gower_system(p, true);
    const auto f = md::leslie_gower_system(p, false);
    const Point x{0.7, 0.4};
    for (std::size_t n = 0; n < 2; ++n) {
        const auto ja = a.map(n).jacobian(x), jf = f.map(n).jacobian(x);
        for (std::size_t r = 0; r < 2; ++r) {
            for (std::size_t c = 0; c <= r; ++c) CHECK(ja(r, c) == doctest::Approx(jf(r, c)).epsilon(1e-7));
        }
    }
}

TEST_CASE("logistic x-star solves the composed cubic") {
    for (double mu0 : {0.6, 1.5, 2.5, 3.2}) {
        for (double mu1 : {0.8, 1.2, 2.0, 3.9}) {
            const auto xs = md::logistic_x_star(mu0, mu1);
            if (!xs) {
                CHECK(md::logistic_delta2(mu0, mu1) < 0.0);
                continue;
            }
            const double x = *xs;
            const double y = mu0 * x * (1.0 - x);
            CHECK(std::abs(mu1 * y * (1.0 - y) - x) < 1e-12);
            CHECK(std::abs(x) > 1e-9);
        }
    }
    // the stable branch is exact at the double root
    CHECK(md::logistic_x_star(3.0, 3.0).value() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("logistic reality polynomial sign matches the cubic discriminant") {
    for (int a = 1; a <= 100; a += 3) {
        for (int b = 1; b <= 100; b += 7) {
            const double poly = md::logistic_reality_polynomial(a / 25.0, b / 25.0);
            const int disc = oracle::logistic_cubic_discriminant_sign(a, b);
            if (disc != 0) CHECK((poly > 0.0) == (disc < 0));
        }
    }
    CHECK(oracle::logistic_cubic_discriminant_sign(75, 75) == 0);
}

TEST_CASE("logistic composition fixed points and spectra") {
    md::LogisticParams p;
    p.mu = {2.5, 1.2};
    p.nu = {3.0, 3.5};
    const auto reg = md::logistic_spectra_and_regions(p);
    REQUIRE(reg.points.e1);
    REQUIRE(reg.points.e2);
    const auto op = compose(md::logistic_system(p), 0, 2);
    CHECK(max_norm_distance(op(*reg.points.e2), *reg.points.e2) < 1e-12);
    const auto fd = oracle::eigenvalues(oracle::fd_jacobian([&](const Point& x) { return op(x); }, *reg.points.e1));
    CHECK(fd[0].real() == doctest::Approx(std::min(reg.lambda_x, reg.e1_lambda_y)).epsilon(1e-8));
    CHECK(fd[1].real() == doctest::Approx(std::max(reg.lambda_x, reg.e1_lambda_y)).epsilon(1e-8));
    const auto fd2 = oracle::eigenvalues(oracle::fd_jacobian([&](const Point& x) { return op(x); }, *reg.points.e2));
    std::vector<double> ev{reg.lambda_x, reg.e2_lambda_y};
    std::sort(ev.begin(), ev.end());
    CHECK(fd2[0].real() == doctest::Approx(ev[0]).epsilon(1e-8));
    CHECK(fd2[1].real() == doctest::Approx(ev[1]).epsilon(1e-8));
}

TEST_CASE("individual logistic fixed points") {
    md::LogisticParams p;
    p.mu = {2.5, 1.2};
    p.nu = {3.0, 0.5};
    const auto reg = md::logistic_spectra_and_regions(p);
    const auto sys = md::logistic_system(p);
    for (std::size_t n = 0; n < 2; ++n) {
        const auto& ind = reg.individual[n];
        CHECK(max_norm_distance(sys.map(n)(ind.e1), ind.e1) < 1e-14);
        if (std::isfinite(ind.e2[1])) CHECK(max_norm_distance(sys.map(n)(ind.e2), ind.e2) < 1e-12);
    }
    // mu = 2.5, nu = 3: x = 0.6, nu x = 1.8 lies in (1, 3]
    CHECK(reg.individual[0].e2_stable);
    CHECK_FALSE(reg.individual[0].e1_stable);
    CHECK(reg.individual[1].e1_stable);
}

TEST_CASE("logistic system flags") {
    md::LogisticParams p;
    CHECK(p.self_maps_unit_square());
    p.mu = {4.5, 1.0};
    CHECK_FALSE(p.self_maps_unit_square());
    CHECK_FALSE(md::logistic_system(p).warnings().empty());
    p.mu = {2.0, 2.0};
    CHECK(md::logistic_system(p).period() == 1);
    p.nu = {0.0, 1.0};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("ricker system shape and common fixed points") {
    const md::RickerParams p;
    const auto sys = md::ricker_system(p);
    CHECK(sys.period() == 6);
    CHECK(sys.coordinate_periods() == std::vector<std::size_t>{3, 2});
    const Point c{1.0, 1.0 - p.mu};
    for (std::size_t n = 0; n < 6; ++n) CHECK(max_norm_distance(sys.map(n)(c), c) < 1e-15);

    const auto g = md::to_general(p);
    CHECK(g.dim() == 2);
    CHECK(md::ricker_coexistence_point(std::vector<double>{0.5, 0.5}) == Point{1.0, 0.5, 0.25});
    const Box box = md::ricker_sampling_box(g);
    CHECK(box[0].hi == doctest::Approx(std::exp(0.8) / 1.8));

    md::RickerParams bad;
    bad.r[0] = 2.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    md::RickerGeneralParams gb{{{1.0}, {1.0}}, {}};
    CHECK_THROWS_AS(gb.validate(), std::invalid_argument);
}

TEST_CASE("ricker stability factors") {
    md::RickerGeneralParams g{{{1.5, 0.5}, {1.0, 2.0, 1.2}}, {0.25}};
    const auto st = md::ricker_stability_and_generalization(g);
    CHECK(st.condition);
    CHECK(st.factors[1][1] == doctest::Approx(1.5));
    REQUIRE(st.per_map.size() == 6);
    for (std::size_t n = 0; n < 6; ++n) {
        const double fx = g.rates[0][n % 2], fy = g.rates[1][n % 3] * 0.75;
        CHECK(st.per_map[n].eigenvalues[0] == doctest::Approx(1.0 - fx));
        CHECK(st.per_map[n].eigenvalues[1] == doctest::Approx(1.0 - fy));
    }
}
