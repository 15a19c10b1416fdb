#include "doctest.h"

#include "support/acceptance_checks.hpp"

// Smaller runs of the randomized suites; the acceptance binary runs the full counts.

TEST_CASE("triangularity closure") {
    const auto o = acceptance::triangularity_closure(200);
    INFO(o.detail);
    CHECK(o.pass);
}

TEST_CASE("cycle rotation") {
    const auto o = acceptance::cycle_rotation(200);
    INFO(o.detail);
    CHECK(o.pass);
}

TEST_CASE("phase equivalence") {
    const auto o = acceptance::phase_equivalence(200);
    INFO(o.detail);
    CHECK(o.pass);
}

TEST_CASE("deflation soundness") {
    const auto o = acceptance::deflation_soundness(200);
    INFO(o.detail);
    CHECK(o.pass);
}

TEST_CASE("output determinism") {
    const auto o = acceptance::output_determinism(100);
    INFO(o.detail);
    CHECK(o.pass);
}
