#include "support/acceptance_checks.hpp"

#include <chrono>
#include <cstdio>
#include <exception>

int main() {
    int failed = 0;
    for (const auto& c : acceptance::all_criteria()) {
        const auto t0 = std::chrono::steady_clock::now();
        acceptance::Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(), s);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
