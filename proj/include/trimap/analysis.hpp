#pragma once

// Fixed points, cycles, spectra and global-convergence checks for
// compositions of periodic triangular maps.

#include "trimap/core.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace trimap {

/// Chain-rule Jacobian of the composition at x. Exactly lower-triangular.
[[nodiscard]] LowerTriangular jacobian(const CompositionOperator& op, std::span<const double> x);

enum class Verdict { Sink, Source, Saddle, NonHyperbolic };

[[nodiscard]] std::string_view to_string(Verdict v) noexcept;

struct SpectrumClassification {
    std::vector<double> eigenvalues;  // diagonal of a triangular Jacobian, all real
    std::size_t stable = 0;
    std::size_t center = 0;
    std::size_t unstable = 0;
    Verdict verdict = Verdict::NonHyperbolic;
    double center_tolerance = 1e-8;

    /// Center directions present: stability cannot be decided from the
    /// spectrum alone.
    [[nodiscard]] bool requires_manual_analysis() const noexcept { return center > 0; }
};

[[nodiscard]] SpectrumClassification classify_spectrum(const LowerTriangular& jac, double center_tol = 1e-8);

enum class Scenario {
    CommonFixedPoint,
    Cycle,           // q < p, q | p
    GeometricCycle,  // q == p
    SuperPeriod,     // q > p, or q < p without dividing p
    Irregular,       // the points do not form an orbit of the system
};

[[nodiscard]] std::string_view to_string(Scenario s) noexcept;

struct CycleRecord {
    std::size_t phase = 0;
    std::size_t period = 1;           // prime period under the system
    std::vector<Point> points;        // X_phase .. X_{phase+period-1}
    std::vector<double> residuals;    // per point, max-norm of window(X) - X
    Scenario scenario = Scenario::Irregular;
    SpectrumClassification spectrum;  // of the composition the point was found with
};

struct SolverOptions {
    std::vector<std::size_t> grid{64};  // cells per axis; a single entry is used for every axis
    double newton_tol = 1e-12;
    double dedup_tol = 1e-7;
    double center_tol = 1e-8;
    std::size_t max_newton_iters = 100;
    double degenerate_fraction = 0.5;
};

struct FixedPointSet {
    std::vector<CycleRecord> records;
    bool degenerate = false;  // a continuum of roots was hit; records are the grid-node roots only
    std::vector<std::size_t> grid;
};

/// Real roots t in `range` of phi_j(prefix, t) = t where j = prefix.size() + 1.
/// Roots are returned sorted and merged within dedup_tol. `degenerate` is set
/// when more than options.degenerate_fraction of the cells carry a root.
struct ScalarRoots {
    std::vector<double> roots;
    bool degenerate = false;
};
[[nodiscard]] ScalarRoots coordinate_roots(const CompositionOperator& op, std::span<const double> prefix,
                                           Interval range, std::size_t cells, const SolverOptions& options);

/// Cascade solver: roots of coordinate 1 first, then coordinate 2 with x_1
/// substituted, and so on down the triangle.
[[nodiscard]] FixedPointSet find_fixed_points(const CompositionOperator& op, const Box& search_box,
                                              const SolverOptions& options = {});

/// Orbits of prime period `period` through `phase`, located as fixed points of
/// the window of length lcm(period, p). One record per distinct orbit.
[[nodiscard]] FixedPointSet find_periodic_orbits(const TriangularSystem& system, std::size_t phase,
                                                 std::size_t period, const Box& search_box,
                                                 const SolverOptions& options = {});

[[nodiscard]] Scenario scenario_classify(const TriangularSystem& system, const CycleRecord& record,
                                         double tol = 1e-7);

struct Period2Result {
    bool absent = true;
    std::vector<Point> witnesses;       // genuine prime-period-2 points of op
    std::vector<Point> unlisted_fixed;  // fixed by op but missing from known_fixed
    std::vector<std::size_t> grid;
    bool degenerate = false;
};

/// Searches the fixed points of op o op and keeps those that are not fixed
/// points of op. Absence verdicts are only as good as the grid density.
[[nodiscard]] Period2Result period2_absence_test(const CompositionOperator& op, std::span<const Point> known_fixed,
                                                 const Box& search_box, const SolverOptions& options = {});

enum class CoppelVerdict { ConvergesGlobally, Period2Exists, NotSelfMap };

[[nodiscard]] std::string_view to_string(CoppelVerdict v) noexcept;

struct CoppelResult {
    CoppelVerdict verdict = CoppelVerdict::ConvergesGlobally;
    std::vector<double> fixed_points;
    std::vector<double> witnesses;
    std::optional<double> self_map_violation;  // sample x with f(x) outside [a, b]
};

[[nodiscard]] CoppelResult coppel_1d_test(const std::function<double(double)>& f, Interval interval,
                                          const SolverOptions& options = {}, std::size_t self_map_samples = 1001);

/// Wraps a scalar map as a one-dimensional autonomous system on `interval`.
[[nodiscard]] TriangularSystem scalar_system(std::function<double(double)> f, Interval interval,
                                             std::function<double(double)> derivative = {});

struct OmegaLimit {
    std::vector<Point> clusters;
    std::size_t tail_length = 0;
    bool unresolved = false;  // unconverged tail with more clusters than the period
};

[[nodiscard]] OmegaLimit omega_limit_estimate(const Orbit& orbit, std::size_t period, double cluster_tol);

struct SampleGrid {
    Box box;
    std::vector<std::size_t> density{50};
    bool interior = true;  // cell centres; false places samples on the nodes including the boundary
    double jitter = 0.0;   // fraction of a cell, uniform, seeded
    std::uint64_t seed = 0;

    [[nodiscard]] std::vector<Point> points() const;
};

struct SampleOutcome {
    Point start;
    std::optional<std::size_t> target;  // index into the target list
    Point final_state;
    std::size_t iterations = 0;
    bool in_domain = true;
    bool escaped = false;
};

struct ConvergenceReport {
    SampleGrid grid;
    std::size_t phase = 0;
    std::vector<SampleOutcome> samples;
    std::size_t in_domain = 0;
    std::size_t assigned = 0;
    double fraction = 0.0;
    std::size_t max_iterations_used = 0;
    std::size_t max_iterations = 0;
    double tolerance = 0.0;

    [[nodiscard]] std::vector<std::size_t> non_convergent() const;
};

/// Iterates every grid sample from `phase`; a sample is assigned to the
/// nearest target once it stays within `tol` of a phase-matched point of that
/// target over one full period.
[[nodiscard]] ConvergenceReport verify_global_convergence(const TriangularSystem& system,
                                                          std::span<const CycleRecord> targets,
                                                          const SampleGrid& grid, std::size_t max_iters,
                                                          double tol, std::size_t phase = 0);

}  // namespace trimap
