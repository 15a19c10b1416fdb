#include "trimap/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace trimap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> expand_grid(const std::vector<std::size_t>& grid, std::size_t k) {
    if (grid.size() == 1) return std::vector<std::size_t>(k, grid.front());
    if (grid.size() != k) throw std::invalid_argument("grid density must have one entry or one per axis");
    return grid;
}

double scale_of(std::span<const double> x) {
    double s = 1.0;
    for (double v : x) s = std::max(s, std::abs(v));
    return s;
}

// Scalar fixed-point residual g(t) = phi_m(prefix, t) - t for one cascade level.
class LevelFunction {
public:
    LevelFunction(const CompositionOperator& op, std::span<const double> prefix)
        : op_(op), x_(prefix.begin(), prefix.end()), out_(prefix.size() + 1) {
        x_.push_back(0.0);
    }

    double value(double t) {
        x_.back() = t;
        try {
            op_.evaluate_prefix(x_, out_);
        } catch (const EvaluationError&) {
            return kNaN;
        }
        return out_.back() - t;
    }

    double derivative(double t) {
        x_.back() = t;
        try {
            return op_.diagonal_derivative(x_) - 1.0;
        } catch (const EvaluationError&) {
            return kNaN;
        }
    }

private:
    const CompositionOperator& op_;
    Point x_;
    Point out_;
};

double zero_tol(double newton_tol, double t) { return newton_tol * std::max(1.0, std::abs(t)); }

// Newton safeguarded by bisection on [lo, hi] where g(lo) and g(hi) have opposite signs.
std::optional<double> bracketed_root(LevelFunction& g, double lo, double hi, double glo, const SolverOptions& opt) {
    const bool rising = glo < 0.0;
    double t = 0.5 * (lo + hi);
    for (std::size_t it = 0; it < opt.max_newton_iters; ++it) {
        const double gt = g.value(t);
        if (std::isnan(gt)) return std::nullopt;
        if (gt == 0.0) return t;
        if ((gt < 0.0) == rising) {
            lo = t;
        } else {
            hi = t;
        }
        const double d = g.derivative(t);
        double next = t - gt / d;
        if (!std::isfinite(next) || d == 0.0 || next <= lo || next >= hi) next = 0.5 * (lo + hi);
        const double step = std::abs(next - t);
        t = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
            break;
        }
    }
    const double gt = g.value(t);
    if (!std::isfinite(gt) || std::abs(gt) > zero_tol(opt.newton_tol, t)) return std::nullopt;
    return t;
}

// Plain Newton from t; used for tangential roots that produce no sign change.
std::optional<double> newton_root(LevelFunction& g, double t, double lo, double hi, const SolverOptions& opt) {
    const std::size_t iters = std::min<std::size_t>(opt.max_newton_iters, 40);
    for (std::size_t it = 0; it < iters; ++it) {
        const double gt = g.value(t);
        const double d = g.derivative(t);
        if (!std::isfinite(gt) || !std::isfinite(d) || d == 0.0) return std::nullopt;
        const double next = t - gt / d;
        if (!std::isfinite(next)) return std::nullopt;
        const double step = std::abs(next - t);
        t = next;
        if (t < lo || t > hi) return std::nullopt;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) break;
    }
    const double gt = g.value(t);
    if (!std::isfinite(gt) || std::abs(gt) > zero_tol(opt.newton_tol, t)) return std::nullopt;
    return t;
}

// Zero of g' in [lo, hi] when g' changes sign across the cell.
std::optional<double> interior_extremum(LevelFunction& g, double lo, double hi) {
    double dlo = g.derivative(lo);
    const double dhi = g.derivative(hi);
    if (!std::isfinite(dlo) || !std::isfinite(dhi) || (dlo < 0.0) == (dhi < 0.0)) return std::nullopt;
    for (int it = 0; it < 100 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo)); ++it) {
        const double m = 0.5 * (lo + hi);
        const double dm = g.derivative(m);
        if (!std::isfinite(dm)) return std::nullopt;
        if ((dm < 0.0) == (dlo < 0.0)) {
            lo = m;
            dlo = dm;
        } else {
            hi = m;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> merge_sorted(std::vector<double> roots, double tol) {
    std::sort(roots.begin(), roots.end());
    std::vector<double> out;
    for (double r : roots) {
        if (out.empty() || std::abs(r - out.back()) >= tol) out.push_back(r);
    }
    return out;
}

// Smallest divisor d of L such that the L-periodic state sequence repeats with period d.
std::size_t minimal_period(const std::vector<Point>& states, std::size_t L, double tol) {
    for (std::size_t d = 1; d < L; ++d) {
        if (L % d != 0) continue;
        bool ok = true;
        for (std::size_t n = 0; n < L && ok; ++n) {
            ok = max_norm_distance(states[n], states[(n + d) % L]) <= tol;
        }
        if (ok) return d;
    }
    return L;
}

CycleRecord make_record(const CompositionOperator& op, const Point& x, const SolverOptions& opt) {
    const std::size_t L = op.steps();
    std::vector<Point> states = op.partial_orbit(x);
    CycleRecord rec;
    rec.phase = op.phase();
    rec.period = minimal_period(states, L, opt.dedup_tol);
    // extend the fold by `period` steps so every cycle point gets its own window residual
    for (std::size_t t = L; t < L + rec.period; ++t) {
        Point next(op.dim());
        op.step_map(t).evaluate_prefix(states.back(), next);
        states.push_back(std::move(next));
    }
    for (std::size_t m = 0; m < rec.period; ++m) {
        rec.points.push_back(states[m]);
        rec.residuals.push_back(max_norm_distance(states[m + L], states[m]));
    }
    rec.spectrum = classify_spectrum(jacobian(op, x), opt.center_tol);
    rec.scenario = scenario_classify(op.system(), rec);
    return rec;
}

}  // namespace

// ---------------------------------------------------------------------------

LowerTriangular jacobian(const CompositionOperator& op, std::span<const double> x) {
    if (x.size() != op.dim()) throw DimensionError(op.dim(), x.size());
    LowerTriangular jac = LowerTriangular::identity(op.dim());
    Point cur(x.begin(), x.end());
    Point next(op.dim());
    for (std::size_t t = 0; t < op.steps(); ++t) {
        const TriangularMap& f = op.step_map(t);
        jac = f.jacobian(cur) * jac;
        f.evaluate_prefix(cur, next);
        std::swap(cur, next);
    }
    return jac;
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Sink: return "sink";
        case Verdict::Source: return "source";
        case Verdict::Saddle: return "saddle";
        case Verdict::NonHyperbolic: return "non-hyperbolic";
    }
    return "unknown";
}

std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::CommonFixedPoint: return "common-fixed-point";
        case Scenario::Cycle: return "cycle";
        case Scenario::GeometricCycle: return "geometric-cycle";
        case Scenario::SuperPeriod: return "super-period";
        case Scenario::Irregular: return "irregular";
    }
    return "unknown";
}

std::string_view to_string(CoppelVerdict v) noexcept {
    switch (v) {
        case CoppelVerdict::ConvergesGlobally: return "converges-globally";
        case CoppelVerdict::Period2Exists: return "period-2-exists";
        case CoppelVerdict::NotSelfMap: return "not-self-map";
    }
    return "unknown";
}

SpectrumClassification classify_spectrum(const LowerTriangular& jac, double center_tol) {
    SpectrumClassification sc;
    sc.center_tolerance = center_tol;
    sc.eigenvalues = jac.diagonal();
    for (double lambda : sc.eigenvalues) {
        const double mod = std::abs(lambda);
        if (mod < 1.0 - center_tol) {
            ++sc.stable;
        } else if (mod > 1.0 + center_tol) {
            ++sc.unstable;
        } else {
            ++sc.center;
        }
    }
    if (sc.center > 0) {
        sc.verdict = Verdict::NonHyperbolic;
    } else if (sc.unstable == 0) {
        sc.verdict = Verdict::Sink;
    } else if (sc.stable == 0) {
        sc.verdict = Verdict::Source;
    } else {
        sc.verdict = Verdict::Saddle;
    }
    return sc;
}

ScalarRoots coordinate_roots(const CompositionOperator& op, std::span<const double> prefix, Interval range,
                             std::size_t cells, const SolverOptions& options) {
    if (!range.bounded() || range.hi < range.lo) throw std::invalid_argument("coordinate_roots: search range must be bounded");
    LevelFunction g(op, prefix);
    ScalarRoots result;
    if (range.hi == range.lo) {
        const double v = g.value(range.lo);
        if (std::isfinite(v) && std::abs(v) <= zero_tol(options.newton_tol, range.lo)) result.roots.push_back(range.lo);
        return result;
    }
    cells = std::max<std::size_t>(cells, 1);
    const double width = (range.hi - range.lo) / static_cast<double>(cells);
    std::vector<double> nodes(cells + 1);
    std::vector<double> values(cells + 1);
    for (std::size_t c = 0; c <= cells; ++c) {
        nodes[c] = c == cells ? range.hi : range.lo + width * static_cast<double>(c);
        values[c] = g.value(nodes[c]);
    }
    auto node_root = [&](std::size_t c) {
        return std::isfinite(values[c]) && std::abs(values[c]) <= zero_tol(options.newton_tol, nodes[c]);
    };

    std::vector<double> found;
    std::vector<double> at_nodes;
    std::size_t cells_with_root = 0;
    for (std::size_t c = 0; c <= cells; ++c) {
        if (node_root(c)) at_nodes.push_back(nodes[c]);
    }
    for (std::size_t c = 0; c < cells; ++c) {
        const double a = nodes[c];
        const double b = nodes[c + 1];
        bool has_root = node_root(c) || node_root(c + 1);
        // Step just inside the cell when an endpoint is itself a root so an
        // interior root next to it still shows up as a sign change.
        const double inset = 1e-6 * (b - a);
        const double lo = node_root(c) ? a + inset : a;
        const double hi = node_root(c + 1) ? b - inset : b;
        const double glo = lo == a ? values[c] : g.value(lo);
        const double ghi = hi == b ? values[c + 1] : g.value(hi);
        if (std::isfinite(glo) && std::isfinite(ghi) && glo != 0.0 && ghi != 0.0 && ((glo < 0.0) != (ghi < 0.0))) {
            if (auto r = bracketed_root(g, lo, hi, glo, options)) {
                found.push_back(*r);
                has_root = true;
            }
        } else if (!has_root) {
            if (auto e = interior_extremum(g, lo, hi)) {
                // An extremum across the zero line hides a pair of roots.
                const double ge = g.value(*e);
                if (std::isfinite(ge) && std::abs(ge) <= zero_tol(options.newton_tol, *e)) {
                    found.push_back(*e);
                    has_root = true;
                } else if (std::isfinite(ge) && std::isfinite(glo) && (ge < 0.0) != (glo < 0.0)) {
                    for (auto r : {bracketed_root(g, lo, *e, glo, options), bracketed_root(g, *e, hi, ge, options)}) {
                        if (r) {
                            found.push_back(*r);
                            has_root = true;
                        }
                    }
                }
            }
            if (!has_root) {
                if (auto r = newton_root(g, 0.5 * (a + b), a, b, options)) {
                    found.push_back(*r);
                    has_root = true;
                }
            }
        }
        if (has_root) ++cells_with_root;
    }
    result.degenerate =
        static_cast<double>(cells_with_root) > options.degenerate_fraction * static_cast<double>(cells);
    if (result.degenerate) {
        result.roots = std::move(at_nodes);
        return result;
    }
    found.insert(found.end(), at_nodes.begin(), at_nodes.end());
    result.roots = merge_sorted(std::move(found), options.dedup_tol);
    return result;
}

FixedPointSet find_fixed_points(const CompositionOperator& op, const Box& search_box, const SolverOptions& options) {
    const std::size_t k = op.dim();
    if (search_box.size() != k) throw DimensionError(k, search_box.size());
    FixedPointSet out;
    out.grid = expand_grid(options.grid, k);
    for (std::size_t m = 0; m < k; ++m) {
        if (out.grid[m] < 2) throw std::invalid_argument("find_fixed_points: grid density must be at least 2 per axis");
        if (!search_box[m].bounded()) throw std::invalid_argument("find_fixed_points: search box must be bounded");
    }

    std::vector<Point> prefixes{Point{}};
    for (std::size_t m = 0; m < k; ++m) {
        std::vector<Point> next;
        for (const Point& prefix : prefixes) {
            ScalarRoots level = coordinate_roots(op, prefix, search_box[m], out.grid[m], options);
            out.degenerate = out.degenerate || level.degenerate;
            for (double r : level.roots) {
                Point x = prefix;
                x.push_back(r);
                next.push_back(std::move(x));
            }
        }
        prefixes = std::move(next);
    }

    std::vector<Point> accepted;
    for (const Point& x : prefixes) {
        Point image;
        try {
            image = op(x);
        } catch (const EvaluationError&) {
            continue;
        }
        if (max_norm_distance(image, x) > options.newton_tol * scale_of(x)) continue;
        const bool duplicate = std::any_of(accepted.begin(), accepted.end(), [&](const Point& y) {
            return max_norm_distance(x, y) < options.dedup_tol;
        });
        if (!duplicate) accepted.push_back(x);
    }
    out.records.reserve(accepted.size());
    for (const Point& x : accepted) out.records.push_back(make_record(op, x, options));
    return out;
}

Scenario scenario_classify(const TriangularSystem& system, const CycleRecord& record, double tol) {
    const std::size_t p = system.period();
    const std::size_t q = record.period;
    if (record.points.size() != q || q == 0) return Scenario::Irregular;
    double worst_residual = 0.0;
    for (double r : record.residuals) worst_residual = std::max(worst_residual, r);
    const double check_tol = std::max(tol, 10.0 * worst_residual);

    const std::size_t horizon = std::lcm(q, p);
    Point cur = record.points.front();
    Point next(system.dim());
    for (std::size_t n = 1; n <= horizon; ++n) {
        try {
            system.map(record.phase + n - 1).evaluate_prefix(cur, next);
        } catch (const EvaluationError&) {
            return Scenario::Irregular;
        }
        std::swap(cur, next);
        if (max_norm_distance(cur, record.points[n % q]) > check_tol) return Scenario::Irregular;
    }
    if (q == 1) return Scenario::CommonFixedPoint;
    if (q == p) return Scenario::GeometricCycle;
    if (q < p && p % q == 0) return Scenario::Cycle;
    return Scenario::SuperPeriod;
}

FixedPointSet find_periodic_orbits(const TriangularSystem& system, std::size_t phase, std::size_t period,
                                   const Box& search_box, const SolverOptions& options) {
    if (period == 0) throw std::invalid_argument("find_periodic_orbits: period must be >= 1");
    const std::size_t p = system.period();
    const std::size_t L = std::lcm(period, p);
    FixedPointSet all = find_fixed_points(compose(system, phase, L), search_box, options);
    FixedPointSet out;
    out.degenerate = all.degenerate;
    out.grid = all.grid;
    for (CycleRecord& rec : all.records) {
        if (rec.period != period) continue;
        // Another phase-aligned point of an orbit already kept is the same orbit.
        const bool seen = std::any_of(out.records.begin(), out.records.end(), [&](const CycleRecord& kept) {
            for (std::size_t s = 0; s < L; s += p) {
                if (max_norm_distance(rec.points.front(), kept.points[s % kept.period]) < options.dedup_tol) {
                    return true;
                }
            }
            return false;
        });
        if (!seen) out.records.push_back(std::move(rec));
    }
    return out;
}

Period2Result period2_absence_test(const CompositionOperator& op, std::span<const Point> known_fixed,
                                   const Box& search_box, const SolverOptions& options) {
    FixedPointSet twice = find_fixed_points(op.iterated(2), search_box, options);
    Period2Result result;
    result.grid = twice.grid;
    result.degenerate = twice.degenerate;
    for (const CycleRecord& rec : twice.records) {
        const Point& w = rec.points.front();
        const bool known = std::any_of(known_fixed.begin(), known_fixed.end(), [&](const Point& z) {
            return max_norm_distance(w, z) < options.dedup_tol;
        });
        if (known) continue;
        Point image;
        try {
            image = op(w);
        } catch (const EvaluationError&) {
            continue;
        }
        if (max_norm_distance(image, w) < options.dedup_tol) {
            result.unlisted_fixed.push_back(w);
        } else {
            result.witnesses.push_back(w);
        }
    }
    result.absent = result.witnesses.empty();
    return result;
}

TriangularSystem scalar_system(std::function<double(double)> f, Interval interval,
                               std::function<double(double)> derivative) {
    PartialsFn partials;
    if (derivative) {
        partials = [derivative](std::span<const double> x, std::span<double> out) { out[0] = derivative(x[0]); };
    }
    CoordinateMap coord(1, [f = std::move(f)](std::span<const double> x) { return f(x[0]); }, std::move(partials));
    return TriangularSystem({TriangularMap({std::move(coord)}, Box{interval})}, {1});
}

CoppelResult coppel_1d_test(const std::function<double(double)>& f, Interval interval, const SolverOptions& options,
                            std::size_t self_map_samples) {
    if (!interval.bounded() || interval.hi <= interval.lo) throw std::invalid_argument("coppel_1d_test: [a, b] must be a bounded interval");
    CoppelResult result;
    const std::size_t n = std::max<std::size_t>(self_map_samples, 2);
    const double slack = 1e-12 * (1.0 + std::max(std::abs(interval.lo), std::abs(interval.hi)));
    for (std::size_t s = 0; s < n; ++s) {
        const double x = interval.lo + (interval.hi - interval.lo) * static_cast<double>(s) / static_cast<double>(n - 1);
        const double y = f(x);
        if (!std::isfinite(y) || !interval.contains(y, slack)) {
            result.verdict = CoppelVerdict::NotSelfMap;
            result.self_map_violation = x;
            return result;
        }
    }
    const TriangularSystem sys = scalar_system(f, interval);
    const CompositionOperator op = compose(sys, 0, 1);
    const Box box{interval};
    const FixedPointSet fixed = find_fixed_points(op, box, options);
    std::vector<Point> known;
    for (const auto& rec : fixed.records) {
        known.push_back(rec.points.front());
        result.fixed_points.push_back(rec.points.front()[0]);
    }
    const Period2Result p2 = period2_absence_test(op, known, box, options);
    for (const auto& w : p2.witnesses) result.witnesses.push_back(w[0]);
    result.verdict = p2.absent ? CoppelVerdict::ConvergesGlobally : CoppelVerdict::Period2Exists;
    return result;
}

OmegaLimit omega_limit_estimate(const Orbit& orbit, std::size_t period, double cluster_tol) {
    OmegaLimit out;
    const auto& traj = orbit.trajectory;
    if (traj.empty()) return out;
    period = std::max<std::size_t>(period, 1);
    const std::size_t n = traj.size();
    const std::size_t want = std::max<std::size_t>((n + 4) / 5, 10 * period);
    std::size_t start = n > want ? n - want : 0;
    // pre-convergence transients never belong to the limit set
    if (orbit.converged && orbit.converged_at) start = std::max(start, *orbit.converged_at);
    out.tail_length = n - start;

    // single linkage via union-find
    std::vector<std::size_t> parent(out.tail_length);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < out.tail_length; ++i) {
        for (std::size_t j = i + 1; j < out.tail_length; ++j) {
            if (max_norm_distance(traj[start + i], traj[start + j]) <= cluster_tol) {
                parent[find(j)] = find(i);
            }
        }
    }
    std::vector<std::size_t> roots;
    std::vector<std::size_t> latest;
    for (std::size_t i = 0; i < out.tail_length; ++i) {
        const std::size_t r = find(i);
        auto it = std::find(roots.begin(), roots.end(), r);
        if (it == roots.end()) {
            roots.push_back(r);
            latest.push_back(i);
        } else {
            latest[static_cast<std::size_t>(it - roots.begin())] = i;
        }
    }
    for (std::size_t i : latest) out.clusters.push_back(traj[start + i]);
    out.unresolved = !orbit.converged && out.clusters.size() > period;
    return out;
}

std::vector<Point> SampleGrid::points() const {
    const std::size_t k = box.size();
    const auto dens = expand_grid(density, k);
    std::vector<std::vector<double>> axes(k);
    std::vector<double> spacing(k);
    for (std::size_t m = 0; m < k; ++m) {
        if (!box[m].bounded()) throw std::invalid_argument("SampleGrid: box must be bounded");
        const std::size_t n = std::max<std::size_t>(dens[m], 1);
        const double span = box[m].hi - box[m].lo;
        if (interior || n == 1) {
            spacing[m] = span / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) axes[m].push_back(box[m].lo + (static_cast<double>(i) + 0.5) * spacing[m]);
        } else {
            spacing[m] = span / static_cast<double>(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                axes[m].push_back(i + 1 == n ? box[m].hi : box[m].lo + static_cast<double>(i) * spacing[m]);
            }
        }
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    std::vector<Point> pts;
    pts.reserve(total);
    std::vector<std::size_t> idx(k, 0);
    for (std::size_t s = 0; s < total; ++s) {
        Point x(k);
        for (std::size_t m = 0; m < k; ++m) {
            x[m] = axes[m][idx[m]];
            if (jitter > 0.0) x[m] = std::clamp(x[m] + jitter * spacing[m] * unit(rng), box[m].lo, box[m].hi);
        }
        pts.push_back(std::move(x));
        for (std::size_t m = k; m-- > 0;) {
            if (++idx[m] < axes[m].size()) break;
            idx[m] = 0;
        }
    }
    return pts;
}

std::vector<std::size_t> ConvergenceReport::non_convergent() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].in_domain && !samples[i].target) out.push_back(i);
    }
    return out;
}

ConvergenceReport verify_global_convergence(const TriangularSystem& system, std::span<const CycleRecord> targets,
                                            const SampleGrid& grid, std::size_t max_iters, double tol,
                                            std::size_t phase) {
    const std::size_t p = system.period();
    ConvergenceReport report;
    report.grid = grid;
    report.phase = phase % p;
    report.max_iterations = max_iters;
    report.tolerance = tol;

    // by_phase[r] lists (target index, point) pairs the targets visit at phase r
    std::vector<std::vector<std::pair<std::size_t, const Point*>>> by_phase(p);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const CycleRecord& rec = targets[t];
        if (rec.points.empty()) continue;
        const std::size_t q = rec.points.size();
        const std::size_t horizon = std::lcm(q, p);
        for (std::size_t s = 0; s < horizon; ++s) {
            auto& slot = by_phase[(rec.phase + s) % p];
            const Point* pt = &rec.points[s % q];
            const bool dup = std::any_of(slot.begin(), slot.end(), [&](const auto& e) { return e.first == t && e.second == pt; });
            if (!dup) slot.emplace_back(t, pt);
        }
    }

    const Box& domain = system.domain();
    for (const Point& x0 : grid.points()) {
        SampleOutcome outcome;
        outcome.start = x0;
        if (!box_contains(domain, x0)) {
            outcome.in_domain = false;
            outcome.final_state = x0;
            report.samples.push_back(std::move(outcome));
            continue;
        }
        ++report.in_domain;
        Point cur = x0;
        Point next(system.dim());
        std::size_t streak = 0;
        std::size_t streak_target = 0;
        std::size_t n = 0;
        for (;; ++n) {
            const std::size_t r = (report.phase + n) % p;
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_target = 0;
            for (const auto& [t, pt] : by_phase[r]) {
                const double d = max_norm_distance(cur, *pt);
                if (d < best) {
                    best = d;
                    best_target = t;
                }
            }
            if (best < tol) {
                streak = (streak > 0 && best_target == streak_target) ? streak + 1 : 1;
                streak_target = best_target;
                if (streak > p) {
                    outcome.target = best_target;
                    break;
                }
            } else {
                streak = 0;
            }
            if (n == max_iters) break;
            try {
                system.map(r).evaluate_prefix(cur, next);
            } catch (const EvaluationError&) {
                outcome.escaped = true;
                break;
            }
            std::swap(cur, next);
            if (!box_contains(domain, cur, 1e-12)) {
                outcome.escaped = true;
                ++n;
                break;
            }
        }
        outcome.iterations = outcome.target ? n - p : n;
        outcome.final_state = cur;
        report.max_iterations_used = std::max(report.max_iterations_used, n);
        if (outcome.target) ++report.assigned;
        report.samples.push_back(std::move(outcome));
    }
    report.fraction =
        report.in_domain == 0 ? 0.0 : static_cast<double>(report.assigned) / static_cast<double>(report.in_domain);
    return report;
}

}  // namespace trimap
