#include "trimap/core.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>

namespace trimap {

namespace {

double domain_slack(double bound) { return 1e-12 * (1.0 + std::abs(bound)); }

bool in_domain(std::span<const Interval> box, std::span<const double> x) {
    for (std::size_t m = 0; m < x.size(); ++m) {
        const Interval& iv = box[m];
        const double slack = std::isfinite(iv.hi) ? domain_slack(iv.hi) : domain_slack(iv.lo);
        if (!iv.contains(x[m], slack)) return false;
    }
    return true;
}

void require_dim(std::size_t expected, std::size_t got) {
    if (expected != got) throw DimensionError(expected, got);
}

std::string describe_non_finite(std::size_t coordinate, double value) {
    std::ostringstream os;
    os << "coordinate " << coordinate << " evaluated to non-finite value " << value;
    return os.str();
}

std::vector<std::size_t> proper_divisors(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t d = 1; d < n; ++d) {
        if (n % d == 0) out.push_back(d);
    }
    return out;
}

// Deterministic probe points spread over the domain box.
std::vector<Point> probe_points(const Box& box) {
    static constexpr std::array<double, 5> kFractions{0.1371, 0.4629, 0.7913, 0.2857, 0.6180};
    static constexpr std::array<double, 5> kOffsets{0.37, 1.13, 2.71, 0.61, 1.79};
    std::vector<Point> pts;
    for (std::size_t s = 0; s < kFractions.size(); ++s) {
        Point x(box.size());
        for (std::size_t m = 0; m < box.size(); ++m) {
            const std::size_t r = (s + m) % kFractions.size();
            const Interval& iv = box[m];
            if (iv.bounded()) {
                x[m] = iv.lo + kFractions[r] * (iv.hi - iv.lo);
            } else if (std::isfinite(iv.lo)) {
                x[m] = iv.lo + kOffsets[r] * (1.0 + std::abs(iv.lo));
            } else if (std::isfinite(iv.hi)) {
                x[m] = iv.hi - kOffsets[r] * (1.0 + std::abs(iv.hi));
            } else {
                x[m] = kOffsets[r] - 1.0;
            }
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

}  // namespace

bool box_contains(const Box& box, std::span<const double> x, double slack) noexcept {
    if (box.size() != x.size()) return false;
    for (std::size_t m = 0; m < x.size(); ++m) {
        const double s = slack > 0.0 ? slack : 0.0;
        if (!box[m].contains(x[m], s)) return false;
    }
    return true;
}

double max_norm_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double d = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t m = 0; m < n; ++m) d = std::max(d, std::abs(a[m] - b[m]));
    return d;
}

DimensionError::DimensionError(std::size_t expected, std::size_t got)
    : std::invalid_argument("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                            std::to_string(got)) {}

EvaluationError::EvaluationError(std::size_t coordinate, double value)
    : std::runtime_error(describe_non_finite(coordinate, value)), coordinate_(coordinate) {}

// ---------------------------------------------------------------------------
// LowerTriangular

LowerTriangular::LowerTriangular(std::size_t k) : k_(k), data_(k * (k + 1) / 2, 0.0) {}

LowerTriangular LowerTriangular::identity(std::size_t k) {
    LowerTriangular m(k);
    for (std::size_t i = 0; i < k; ++i) m.at(i, i) = 1.0;
    return m;
}

double LowerTriangular::operator()(std::size_t row, std::size_t col) const noexcept {
    return col > row ? 0.0 : data_[offset(row, col)];
}

double& LowerTriangular::at(std::size_t row, std::size_t col) {
    if (row >= k_ || col > row) throw std::out_of_range("LowerTriangular::at: upper-triangular or out-of-range entry");
    return data_[offset(row, col)];
}

std::vector<double> LowerTriangular::diagonal() const {
    std::vector<double> d(k_);
    for (std::size_t i = 0; i < k_; ++i) d[i] = data_[offset(i, i)];
    return d;
}

LowerTriangular operator*(const LowerTriangular& a, const LowerTriangular& b) {
    require_dim(a.k_, b.k_);
    LowerTriangular c(a.k_);
    for (std::size_t i = 0; i < a.k_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t m = j; m <= i; ++m) s += a(i, m) * b(m, j);
            c.data_[LowerTriangular::offset(i, j)] = s;
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// CoordinateMap

CoordinateMap::CoordinateMap(std::size_t index, CoordinateFn value, PartialsFn partials)
    : index_(index), value_(std::move(value)), partials_(std::move(partials)) {
    if (index_ == 0) throw std::invalid_argument("CoordinateMap: index is 1-based");
    if (!value_) throw std::invalid_argument("CoordinateMap: empty evaluator");
}

double CoordinateMap::operator()(std::span<const double> x) const {
    if (x.size() < index_) throw DimensionError(index_, x.size());
    return value_(x.first(index_));
}

double CoordinateMap::finite_difference(std::span<const double> x, std::size_t m) const {
    std::array<double, 16> small{};
    std::vector<double> large;
    std::span<double> buf;
    if (index_ <= small.size()) {
        buf = std::span<double>(small.data(), index_);
    } else {
        large.resize(index_);
        buf = large;
    }
    std::copy_n(x.begin(), index_, buf.begin());
    const double h = std::max(1e-7, 1e-7 * std::abs(x[m]));
    buf[m] = x[m] + h;
    const double up = value_(buf);
    buf[m] = x[m] - h;
    const double down = value_(buf);
    return (up - down) / (2.0 * h);
}

void CoordinateMap::partials(std::span<const double> x, std::span<double> out) const {
    if (x.size() < index_) throw DimensionError(index_, x.size());
    if (out.size() < index_) throw DimensionError(index_, out.size());
    if (partials_) {
        partials_(x.first(index_), out.first(index_));
        return;
    }
    for (std::size_t m = 0; m < index_; ++m) out[m] = finite_difference(x, m);
}

double CoordinateMap::diagonal_partial(std::span<const double> x) const {
    if (x.size() < index_) throw DimensionError(index_, x.size());
    if (!partials_) return finite_difference(x, index_ - 1);
    std::array<double, 16> small{};
    if (index_ <= small.size()) {
        partials_(x.first(index_), std::span<double>(small.data(), index_));
        return small[index_ - 1];
    }
    std::vector<double> all(index_);
    partials_(x.first(index_), all);
    return all.back();
}

// ---------------------------------------------------------------------------
// TriangularMap

TriangularMap::TriangularMap(std::vector<CoordinateMap> coordinates, Box domain)
    : coordinates_(std::move(coordinates)), domain_(std::move(domain)) {
    if (coordinates_.empty()) throw std::invalid_argument("TriangularMap: dimension must be positive");
    require_dim(coordinates_.size(), domain_.size());
    for (std::size_t j = 0; j < coordinates_.size(); ++j) {
        if (coordinates_[j].index() != j + 1) {
            throw std::invalid_argument("TriangularMap: coordinate at slot " + std::to_string(j + 1) +
                                        " has index " + std::to_string(coordinates_[j].index()));
        }
    }
}

Point TriangularMap::operator()(std::span<const double> x, DomainCheck check) const {
    require_dim(dim(), x.size());
    if (check == DomainCheck::Strict) {
        for (std::size_t m = 0; m < x.size(); ++m) {
            if (!in_domain(std::span<const Interval>(domain_).subspan(m, 1), x.subspan(m, 1))) {
                throw std::domain_error("point outside domain box at coordinate " + std::to_string(m + 1));
            }
        }
    }
    Point out(dim());
    evaluate_prefix(x, out);
    return out;
}

void TriangularMap::evaluate_prefix(std::span<const double> x, std::span<double> out) const {
    const std::size_t m = out.size();
    if (m > dim() || x.size() < m) throw DimensionError(m, x.size());
    for (std::size_t j = 0; j < m; ++j) {
        const double v = coordinates_[j](x);
        if (!std::isfinite(v)) throw EvaluationError(j + 1, v);
        out[j] = v;
    }
}

LowerTriangular TriangularMap::jacobian(std::span<const double> x) const {
    require_dim(dim(), x.size());
    LowerTriangular jac(dim());
    std::vector<double> row(dim());
    for (std::size_t j = 0; j < dim(); ++j) {
        coordinates_[j].partials(x, row);
        for (std::size_t m = 0; m <= j; ++m) jac.at(j, m) = row[m];
    }
    return jac;
}

Point evaluate(const TriangularMap& map, std::span<const double> x, DomainCheck check) {
    return map(x, check);
}

std::size_t system_period(std::span<const std::size_t> periods) {
    if (periods.empty()) throw std::invalid_argument("system_period: empty period list");
    std::size_t p = 1;
    for (std::size_t q : periods) {
        if (q == 0) throw std::invalid_argument("system_period: periods must be >= 1");
        p = std::lcm(p, q);
    }
    return p;
}

// ---------------------------------------------------------------------------
// TriangularSystem

TriangularSystem::TriangularSystem(std::vector<TriangularMap> maps, std::vector<std::size_t> coordinate_periods)
    : periods_(std::move(coordinate_periods)) {
    if (maps.empty()) throw std::invalid_argument("TriangularSystem: no maps");
    dim_ = maps.front().dim();
    require_dim(dim_, periods_.size());
    for (const auto& f : maps) require_dim(dim_, f.dim());
    const std::size_t p = system_period(periods_);
    if (p != maps.size()) {
        throw std::invalid_argument("TriangularSystem: lcm of coordinate periods is " + std::to_string(p) +
                                    " but " + std::to_string(maps.size()) + " maps were given");
    }
    maps_ = std::make_shared<const std::vector<TriangularMap>>(std::move(maps));
    check_periods();
}

void TriangularSystem::check_periods() {
    const std::size_t p = period();
    if (p == 1) return;
    const auto probes = probe_points(domain());
    // values[n][s] for one coordinate slot, NaN where evaluation failed
    auto slice = [&](std::size_t slot) {
        std::vector<std::vector<double>> values(p, std::vector<double>(probes.size()));
        for (std::size_t n = 0; n < p; ++n) {
            for (std::size_t s = 0; s < probes.size(); ++s) {
                double v = std::numeric_limits<double>::quiet_NaN();
                try {
                    v = (*maps_)[n].coordinate(slot)(probes[s]);
                } catch (const std::exception&) {
                }
                values[n][s] = v;
            }
        }
        return values;
    };
    auto repeats_with = [&](const std::vector<std::vector<double>>& values, std::size_t d) {
        for (std::size_t n = 0; n < p; ++n) {
            const auto& a = values[n];
            const auto& b = values[(n + d) % p];
            for (std::size_t s = 0; s < a.size(); ++s) {
                if (std::isnan(a[s]) || std::isnan(b[s])) continue;
                if (a[s] != b[s]) return false;
            }
        }
        return true;
    };
    for (std::size_t slot = 0; slot < dim_; ++slot) {
        const std::size_t pj = periods_[slot];
        const auto values = slice(slot);
        if (!repeats_with(values, pj)) {
            throw std::invalid_argument("TriangularSystem: coordinate " + std::to_string(slot + 1) +
                                        " does not repeat with declared period " + std::to_string(pj));
        }
        for (std::size_t d : proper_divisors(pj)) {
            if (repeats_with(values, d)) {
                warnings_.push_back("coordinate " + std::to_string(slot + 1) + " declared period " +
                                    std::to_string(pj) + " but repeats with period " + std::to_string(d));
                break;
            }
        }
    }
}

TriangularSystem TriangularSystem::with_warning(std::string message) const {
    TriangularSystem copy = *this;
    copy.warnings_.push_back(std::move(message));
    return copy;
}

// ---------------------------------------------------------------------------
// Orbits

Orbit iterate_orbit(const TriangularSystem& system, std::span<const double> x0, std::size_t phase,
                    std::size_t steps, const ConvergenceRule& rule) {
    require_dim(system.dim(), x0.size());
    const Box& box = system.domain();
    if (!in_domain(box, x0)) throw std::domain_error("iterate_orbit: start point outside domain box");

    const std::size_t p = system.period();
    Orbit orbit;
    orbit.start.assign(x0.begin(), x0.end());
    orbit.phase = phase % p;
    orbit.trajectory.reserve(std::min<std::size_t>(steps + 1, 1u << 16));
    orbit.trajectory.push_back(orbit.start);

    Point next(system.dim());
    for (std::size_t n = 0; n < steps; ++n) {
        const Point& cur = orbit.trajectory.back();
        try {
            system.map(orbit.phase + n).evaluate_prefix(cur, next);
        } catch (const EvaluationError& e) {
            orbit.escaped = true;
            orbit.non_finite = true;
            orbit.failed_coordinate = e.coordinate();
            break;
        }
        orbit.trajectory.push_back(next);
        if (!in_domain(box, next)) {
            orbit.escaped = true;
            break;
        }
        const std::size_t len = orbit.trajectory.size();
        if (!orbit.converged && len > p) {
            const std::size_t earlier = len - 1 - p;
            if (max_norm_distance(orbit.trajectory[earlier], orbit.trajectory.back()) < rule.tolerance) {
                orbit.converged = true;
                orbit.converged_at = earlier;
                if (rule.stop_on_convergence) break;
            }
        }
    }
    return orbit;
}

// ---------------------------------------------------------------------------
// CompositionOperator

CompositionOperator::CompositionOperator(TriangularSystem system, std::size_t phase, std::size_t length,
                                         std::size_t repeats)
    : system_(std::move(system)), phase_(phase), length_(length), repeats_(repeats) {
    if (phase_ >= system_.period()) throw std::out_of_range("compose: phase must be below the system period");
    if (length_ == 0 || repeats_ == 0) throw std::out_of_range("compose: window length must be positive");
}

Point CompositionOperator::operator()(std::span<const double> x) const {
    require_dim(dim(), x.size());
    Point out(dim());
    evaluate_prefix(x, out);
    return out;
}

void CompositionOperator::evaluate_prefix(std::span<const double> x, std::span<double> out) const {
    const std::size_t m = out.size();
    if (m > dim() || x.size() < m) throw DimensionError(m, x.size());
    std::array<double, 16> a{};
    std::array<double, 16> b{};
    std::vector<double> va;
    std::vector<double> vb;
    std::span<double> cur;
    std::span<double> nxt;
    if (m <= a.size()) {
        cur = std::span<double>(a.data(), m);
        nxt = std::span<double>(b.data(), m);
    } else {
        va.resize(m);
        vb.resize(m);
        cur = va;
        nxt = vb;
    }
    std::copy_n(x.begin(), m, cur.begin());
    for (std::size_t t = 0; t < steps(); ++t) {
        step_map(t).evaluate_prefix(cur, nxt);
        std::swap(cur, nxt);
    }
    std::copy(cur.begin(), cur.end(), out.begin());
}

std::vector<Point> CompositionOperator::partial_orbit(std::span<const double> x) const {
    require_dim(dim(), x.size());
    std::vector<Point> states;
    states.reserve(steps() + 1);
    states.emplace_back(x.begin(), x.end());
    for (std::size_t t = 0; t < steps(); ++t) {
        Point next(dim());
        step_map(t).evaluate_prefix(states.back(), next);
        states.push_back(std::move(next));
    }
    return states;
}

double CompositionOperator::diagonal_derivative(std::span<const double> prefix) const {
    const std::size_t m = prefix.size();
    if (m == 0 || m > dim()) throw DimensionError(dim(), m);
    Point cur(prefix.begin(), prefix.end());
    Point next(m);
    double d = 1.0;
    for (std::size_t t = 0; t < steps(); ++t) {
        const TriangularMap& f = step_map(t);
        d *= f.coordinate(m - 1).diagonal_partial(cur);
        f.evaluate_prefix(cur, next);
        std::swap(cur, next);
    }
    return d;
}

CompositionOperator CompositionOperator::iterated(std::size_t times) const {
    return CompositionOperator(system_, phase_, length_, repeats_ * times);
}

CompositionOperator compose(const TriangularSystem& system, std::size_t phase, std::size_t length) {
    return CompositionOperator(system, phase, length);
}

}  // namespace trimap
