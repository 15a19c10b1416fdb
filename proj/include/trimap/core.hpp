#pragma once

// Triangular maps, periodic sequences of them, orbits and window compositions.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace trimap {

using Point = std::vector<double>;

struct Interval {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();

    [[nodiscard]] bool contains(double v, double slack = 0.0) const noexcept {
        return v >= lo - slack && v <= hi + slack;
    }
    [[nodiscard]] bool bounded() const noexcept {
        return std::isfinite(lo) && std::isfinite(hi);
    }
};

using Box = std::vector<Interval>;

[[nodiscard]] bool box_contains(const Box& box, std::span<const double> x, double slack = 0.0) noexcept;

/// Max-norm distance between two points of equal dimension.
[[nodiscard]] double max_norm_distance(std::span<const double> a, std::span<const double> b) noexcept;

class DimensionError : public std::invalid_argument {
public:
    DimensionError(std::size_t expected, std::size_t got);
};

/// Raised when a coordinate function produces NaN or an infinity.
/// `coordinate()` is 1-based, matching the coordinate index of the map.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(std::size_t coordinate, double value);
    [[nodiscard]] std::size_t coordinate() const noexcept { return coordinate_; }

private:
    std::size_t coordinate_;
};

// Packed k x k lower-triangular matrix. Entries above the diagonal are not
// stored and read back as exact zeros.
class LowerTriangular {
public:
    explicit LowerTriangular(std::size_t k = 0);
    static LowerTriangular identity(std::size_t k);

    [[nodiscard]] std::size_t dim() const noexcept { return k_; }
    [[nodiscard]] double operator()(std::size_t row, std::size_t col) const noexcept;
    /// Writable access; throws std::out_of_range for col > row.
    double& at(std::size_t row, std::size_t col);
    [[nodiscard]] std::vector<double> diagonal() const;

    friend LowerTriangular operator*(const LowerTriangular& a, const LowerTriangular& b);

private:
    [[nodiscard]] static std::size_t offset(std::size_t row, std::size_t col) noexcept {
        return row * (row + 1) / 2 + col;
    }
    std::size_t k_;
    std::vector<double> data_;
};

using CoordinateFn = std::function<double(std::span<const double>)>;
/// Fills out[m] = d f_j / d x_{m+1} for m < j.
using PartialsFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Coordinate function f_j(x_1..x_j). The evaluator only ever receives the
/// first j coordinates, so triangularity holds by construction.
class CoordinateMap {
public:
    CoordinateMap(std::size_t index, CoordinateFn value, PartialsFn partials = {});

    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] bool has_partials() const noexcept { return static_cast<bool>(partials_); }

    /// Evaluate on x.first(index()). x may carry more coordinates.
    [[nodiscard]] double operator()(std::span<const double> x) const;

    /// Analytic partials when available, central differences otherwise.
    void partials(std::span<const double> x, std::span<double> out) const;
    [[nodiscard]] double diagonal_partial(std::span<const double> x) const;

    /// Central difference with step max(1e-7, 1e-7 |x_m|); m is 0-based, m < index().
    [[nodiscard]] double finite_difference(std::span<const double> x, std::size_t m) const;

private:
    std::size_t index_;
    CoordinateFn value_;
    PartialsFn partials_;
};

enum class DomainCheck { Strict, Permissive };

class TriangularMap {
public:
    TriangularMap(std::vector<CoordinateMap> coordinates, Box domain);

    [[nodiscard]] std::size_t dim() const noexcept { return coordinates_.size(); }
    [[nodiscard]] const Box& domain() const noexcept { return domain_; }
    /// 0-based slot; the map at slot j has index j + 1.
    [[nodiscard]] const CoordinateMap& coordinate(std::size_t slot) const { return coordinates_.at(slot); }

    [[nodiscard]] Point operator()(std::span<const double> x, DomainCheck check = DomainCheck::Permissive) const;

    // Writes the first out.size() output coordinates; reads only as many inputs.
    void evaluate_prefix(std::span<const double> x, std::span<double> out) const;

    [[nodiscard]] LowerTriangular jacobian(std::span<const double> x) const;

private:
    std::vector<CoordinateMap> coordinates_;
    Box domain_;
};

/// Direct application of the map; see TriangularMap::operator().
[[nodiscard]] Point evaluate(const TriangularMap& map, std::span<const double> x,
                             DomainCheck check = DomainCheck::Strict);

/// Least common multiple of the per-coordinate periods.
[[nodiscard]] std::size_t system_period(std::span<const std::size_t> periods);

/// A p-periodic sequence F_0..F_{p-1} of triangular maps sharing one domain.
///
/// Construction validates p = lcm(p_1..p_k) against the number of maps and
/// that coordinate slice j repeats with period p_j. A coordinate whose
/// sampled slice repeats with a proper divisor of p_j is accepted but
/// reported through warnings().
class TriangularSystem {
public:
    TriangularSystem(std::vector<TriangularMap> maps, std::vector<std::size_t> coordinate_periods);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t period() const noexcept { return maps_->size(); }
    [[nodiscard]] const std::vector<std::size_t>& coordinate_periods() const noexcept { return periods_; }
    [[nodiscard]] const TriangularMap& map(std::size_t n) const { return (*maps_)[n % maps_->size()]; }
    [[nodiscard]] const Box& domain() const { return maps_->front().domain(); }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Returns a copy carrying an extra warning (used by model constructors).
    [[nodiscard]] TriangularSystem with_warning(std::string message) const;

private:
    void check_periods();

    std::shared_ptr<const std::vector<TriangularMap>> maps_;
    std::vector<std::size_t> periods_;
    std::size_t dim_ = 0;
    std::vector<std::string> warnings_;
};

struct ConvergenceRule {
    double tolerance = 1e-10;  // max-norm between X_n and X_{n+p}
    bool stop_on_convergence = true;
};

struct Orbit {
    Point start;
    std::size_t phase = 0;
    std::vector<Point> trajectory;  // X_0 .. X_N
    bool converged = false;
    std::optional<std::size_t> converged_at;  // n with |X_n - X_{n+p}| < tol
    bool escaped = false;                     // left the domain box or went non-finite
    bool non_finite = false;
    std::optional<std::size_t> failed_coordinate;  // 1-based, set when non_finite
};

/// X_{n+1} = F_{(phase+n) mod p}(X_n) for at most `steps` steps.
///
/// Leaving the box through a finite bound stores the offending point as the
/// last entry and sets `escaped`. A non-finite value truncates the trajectory
/// before the bad point and sets both `escaped` and `non_finite`.
[[nodiscard]] Orbit iterate_orbit(const TriangularSystem& system, std::span<const double> x0,
                                  std::size_t phase, std::size_t steps, const ConvergenceRule& rule = {});

// Window composition F_{i+L-1} o ... o F_i, optionally applied `repeats`
// times in a row. Holds the system by value; the map storage is shared.
class CompositionOperator {
public:
    CompositionOperator(TriangularSystem system, std::size_t phase, std::size_t length,
                        std::size_t repeats = 1);

    [[nodiscard]] const TriangularSystem& system() const noexcept { return system_; }
    [[nodiscard]] std::size_t phase() const noexcept { return phase_; }
    [[nodiscard]] std::size_t length() const noexcept { return length_; }
    [[nodiscard]] std::size_t repeats() const noexcept { return repeats_; }
    [[nodiscard]] std::size_t steps() const noexcept { return length_ * repeats_; }
    [[nodiscard]] std::size_t dim() const noexcept { return system_.dim(); }

    /// Map applied at step t of the fold, t < steps().
    [[nodiscard]] const TriangularMap& step_map(std::size_t t) const {
        return system_.map(phase_ + t % length_);
    }

    [[nodiscard]] Point operator()(std::span<const double> x) const;
    void evaluate_prefix(std::span<const double> x, std::span<double> out) const;

    /// States X_0 = x, X_1, ..., X_steps() along the fold.
    [[nodiscard]] std::vector<Point> partial_orbit(std::span<const double> x) const;

    /// d phi_j / d x_j for j = prefix.size(), from the product of per-map
    /// diagonal partials along the prefix orbit.
    [[nodiscard]] double diagonal_derivative(std::span<const double> prefix) const;

    [[nodiscard]] CompositionOperator iterated(std::size_t times) const;

private:
    TriangularSystem system_;
    std::size_t phase_;
    std::size_t length_;
    std::size_t repeats_;
};

/// Phi_{L,i}; throws std::out_of_range for phase >= p or length == 0.
[[nodiscard]] CompositionOperator compose(const TriangularSystem& system, std::size_t phase, std::size_t length);

}  // namespace trimap
