#include "trimap/commands.hpp"

#include "trimap/analysis.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

namespace trimap::commands {

namespace {

using config::ConfigError;
using config::ModelKind;
using config::RunConfig;
using report::Cell;
using report::Writer;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions opt;
    opt.grid = cfg.search_grid;
    opt.newton_tol = cfg.tol.newton;
    opt.dedup_tol = cfg.tol.dedup;
    opt.center_tol = cfg.tol.center;
    return opt;
}

std::vector<std::string> coordinate_columns(std::string_view prefix, std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t j = 1; j <= k; ++j) out.push_back(std::string(prefix) + std::to_string(j));
    return out;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

void append(std::vector<Cell>& row, std::span<const double> values) {
    for (double v : values) row.emplace_back(v);
}

Cell count(std::size_t n) { return static_cast<long long>(n); }

report::Metadata metadata(Command c, const RunConfig& cfg, const config::ModelInstance& inst) {
    report::Metadata meta{
        {"command", std::string(to_string(c))},
        {"model", std::string(config::to_string(cfg.model))},
        {"dimension", std::to_string(inst.system.dim())},
        {"period", std::to_string(inst.system.period())},
        {"phase", std::to_string(cfg.phase)},
    };
    if (cfg.model == ModelKind::Custom) meta.emplace_back("custom_kind", cfg.custom.kind);
    for (const auto& w : inst.system.warnings()) meta.emplace_back("warning", w);
    return meta;
}

std::string join_grid(const std::vector<std::size_t>& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "x" : "") + std::to_string(g[i]);
    return s;
}

double nearest_reference(const Point& x, const std::vector<Point>& refs) {
    double best = kNaN;
    for (const auto& r : refs) {
        if (r.size() != x.size()) continue;
        const double d = max_norm_distance(x, r);
        if (std::isnan(best) || d < best) best = d;
    }
    return best;
}

struct VerdictCounts {
    std::size_t sinks = 0, saddles = 0, sources = 0, non_hyperbolic = 0;
};

VerdictCounts tally(const std::vector<CycleRecord>& recs) {
    VerdictCounts c;
    for (const auto& r : recs) {
        switch (r.spectrum.verdict) {
            case Verdict::Sink: ++c.sinks; break;
            case Verdict::Saddle: ++c.saddles; break;
            case Verdict::Source: ++c.sources; break;
            case Verdict::NonHyperbolic: ++c.non_hyperbolic; break;
        }
    }
    return c;
}

std::vector<std::string> model_scan_columns(ModelKind m) {
    switch (m) {
        case ModelKind::Logistic:
            return {"delta2", "reality", "lambda_x", "e0_predicate", "e1_predicate", "e2_predicate", "region"};
        case ModelKind::LeslieGower: return {"c", "coexistence"};
        case ModelKind::Ricker: return {"condition"};
        case ModelKind::Custom: return {};
    }
    return {};
}

std::vector<Cell> model_scan_cells(const RunConfig& cfg) {
    switch (cfg.model) {
        case ModelKind::Logistic: {
            SolverOptions opt = solver_options(cfg);
            const auto r = models::logistic_spectra_and_regions(cfg.logistic, opt, cfg.tol.center);
            std::string region;
            for (auto [flag, name] : {std::pair{r.e0_stable, "E0"}, std::pair{r.e1_stable, "E1"}, std::pair{r.e2_stable, "E2"}}) {
                if (flag) region += (region.empty() ? "" : "+") + std::string(name);
            }
            return {r.points.delta2,
                    r.points.real,
                    r.points.x_star ? Cell{r.lambda_x} : Cell{},
                    r.e0_stable,
                    r.e1_stable,
                    r.e2_stable,
                    region.empty() ? std::string("none") : region};
        }
        case ModelKind::LeslieGower: {
            const auto c = models::leslie_gower_cycles(cfg.leslie_gower);
            return {models::leslie_gower_exclusion_quotient(cfg.leslie_gower), c.coexistence_admissible};
        }
        case ModelKind::Ricker: return {models::ricker_stability_and_generalization(cfg.ricker).condition};
        case ModelKind::Custom: return {};
    }
    return {};
}

}  // namespace

std::string_view to_string(Command c) noexcept {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Analyze: return "analyze";
        case Command::RegionScan: return "region-scan";
        case Command::VerifyGlobal: return "verify-global";
    }
    return "unknown";
}

void apply(RunConfig& cfg, const Overrides& o, Command c) {
    if (o.out) cfg.output_path = *o.out;
    if (o.format) cfg.format = *o.format;
    if (o.seed) cfg.seed = *o.seed;
    if (o.max_iters) cfg.max_iters = *o.max_iters;
    if (o.tol) {
        switch (c) {
            case Command::Simulate: cfg.tol.orbit = *o.tol; break;
            case Command::VerifyGlobal: cfg.tol.convergence = *o.tol; break;
            case Command::Analyze:
            case Command::RegionScan: cfg.tol.newton = *o.tol; break;
        }
    }
    if (o.grid) {
        switch (c) {
            case Command::VerifyGlobal: cfg.grid = *o.grid; break;
            case Command::Analyze: cfg.search_grid = *o.grid; break;
            case Command::RegionScan:
                if (o.grid->size() != 1 && o.grid->size() != cfg.scan.size()) throw ConfigError("--grid", "expected one resolution or one per scan axis");
                for (std::size_t i = 0; i < cfg.scan.size(); ++i) cfg.scan[i].n = (*o.grid)[o.grid->size() == 1 ? 0 : i];
                break;
            case Command::Simulate: break;
        }
    }
    cfg.validate();
}

ExitCode run_simulate(const RunConfig& cfg, std::ostream& out) {
    const auto inst = config::instantiate(cfg);
    const std::size_t k = inst.system.dim();
    const std::size_t p = inst.system.period();
    if (!box_contains(inst.system.domain(), inst.x0)) throw ConfigError("x0", "start point lies outside the model domain");
    const Orbit orbit = iterate_orbit(inst.system, inst.x0, cfg.phase, cfg.steps, {cfg.tol.orbit, true});
    const OmegaLimit omega = omega_limit_estimate(orbit, p, cfg.tol.cluster);

    Writer w(out, cfg.format, metadata(Command::Simulate, cfg, inst));
    std::vector<std::string> cols{"step", "phase"};
    append(cols, coordinate_columns("x", k));
    w.begin_table("trajectory", cols);
    for (std::size_t n = 0; n < orbit.trajectory.size(); ++n) {
        std::vector<Cell> row{count(n), count((cfg.phase + n) % p)};
        append(row, orbit.trajectory[n]);
        w.row(row);
    }

    std::string summary;
    if (orbit.converged) {
        summary = "converged step " + std::to_string(*orbit.converged_at);
    } else if (orbit.non_finite) {
        summary = "non-finite value in coordinate " + std::to_string(*orbit.failed_coordinate);
    } else if (orbit.escaped) {
        summary = "escaped at step " + std::to_string(orbit.trajectory.size() - 1);
    } else {
        summary = "not converged";
    }
    w.begin_table("summary", {"summary", "converged", "converged_at", "escaped", "non_finite", "failed_coordinate",
                              "steps_taken", "clusters", "tail_length", "unresolved"});
    w.row({summary, orbit.converged, orbit.converged_at ? count(*orbit.converged_at) : Cell{}, orbit.escaped,
           orbit.non_finite, orbit.failed_coordinate ? count(*orbit.failed_coordinate) : Cell{},
           count(orbit.trajectory.empty() ? 0 : orbit.trajectory.size() - 1), count(omega.clusters.size()),
           count(omega.tail_length), omega.unresolved});

    cols = {"cluster"};
    append(cols, coordinate_columns("x", k));
    w.begin_table("clusters", cols);
    for (std::size_t c = 0; c < omega.clusters.size(); ++c) {
        std::vector<Cell> row{count(c)};
        append(row, omega.clusters[c]);
        w.row(row);
    }
    w.finish();
    return orbit.non_finite ? ExitCode::SolverFailure : ExitCode::Ok;
}

ExitCode run_analyze(const RunConfig& cfg, std::ostream& out) {
    const auto inst = config::instantiate(cfg);
    const std::size_t k = inst.system.dim();
    const std::size_t p = inst.system.period();
    const SolverOptions opt = solver_options(cfg);
    const FixedPointSet found = cfg.period
                                    ? find_periodic_orbits(inst.system, cfg.phase, *cfg.period, inst.search_box, opt)
                                    : find_fixed_points(compose(inst.system, cfg.phase, p), inst.search_box, opt);
    const bool with_refs = !inst.references.empty() && cfg.phase == 0;

    auto meta = metadata(Command::Analyze, cfg, inst);
    meta.emplace_back("search_grid", join_grid(found.grid));
    meta.emplace_back("window", std::to_string(cfg.period ? std::lcm(*cfg.period, p) : p));
    meta.emplace_back("degenerate", found.degenerate ? "true" : "false");
    Writer w(out, cfg.format, std::move(meta));

    std::vector<std::string> cols{"id", "phase", "period", "scenario", "verdict", "stable", "center", "unstable",
                                  "manual_analysis", "max_residual"};
    append(cols, coordinate_columns("x", k));
    append(cols, coordinate_columns("lambda", k));
    cols.push_back("closed_form_delta");
    w.begin_table("cycles", cols);
    for (std::size_t i = 0; i < found.records.size(); ++i) {
        const CycleRecord& r = found.records[i];
        const double resid = r.residuals.empty() ? kNaN : *std::max_element(r.residuals.begin(), r.residuals.end());
        std::vector<Cell> row{count(i), count(r.phase), count(r.period), std::string(to_string(r.scenario)),
                              std::string(to_string(r.spectrum.verdict)), count(r.spectrum.stable),
                              count(r.spectrum.center), count(r.spectrum.unstable),
                              r.spectrum.requires_manual_analysis(), resid};
        append(row, r.points.front());
        append(row, r.spectrum.eigenvalues);
        row.push_back(with_refs ? Cell{nearest_reference(r.points.front(), inst.references)} : Cell{});
        w.row(row);
    }

    cols = {"id", "m"};
    append(cols, coordinate_columns("x", k));
    cols.push_back("residual");
    w.begin_table("points", cols);
    for (std::size_t i = 0; i < found.records.size(); ++i) {
        const CycleRecord& r = found.records[i];
        for (std::size_t m = 0; m < r.points.size(); ++m) {
            std::vector<Cell> row{count(i), count(m)};
            append(row, r.points[m]);
            row.emplace_back(r.residuals[m]);
            w.row(row);
        }
    }
    w.finish();
    return ExitCode::Ok;
}

ExitCode run_region_scan(const RunConfig& cfg, std::ostream& out) {
    if (cfg.scan.size() != 2) throw ConfigError("scan.axes", "region-scan needs exactly two axes");
    const auto base = config::instantiate(cfg);
    auto meta = metadata(Command::RegionScan, cfg, base);
    for (std::size_t a = 0; a < 2; ++a) {
        const auto& ax = cfg.scan[a];
        meta.emplace_back("axis" + std::to_string(a + 1),
                          ax.name + "," + report::format_double(ax.min) + "," + report::format_double(ax.max) + "," +
                              std::to_string(ax.n));
    }
    meta.emplace_back("period2", cfg.scan_period2 ? "true" : "false");
    Writer w(out, cfg.format, std::move(meta));

    std::vector<std::string> cols{cfg.scan[0].name, cfg.scan[1].name, "status", "message", "fixed_points", "sinks",
                                  "saddles", "sources", "non_hyperbolic", "period2_witnesses"};
    const auto extra = model_scan_columns(cfg.model);
    append(cols, extra);
    w.begin_table("cells", cols);

    const SolverOptions opt = solver_options(cfg);
    for (std::size_t i = 0; i < cfg.scan[0].n; ++i) {
        for (std::size_t j = 0; j < cfg.scan[1].n; ++j) {
            const double a = cfg.scan[0].value(i);
            const double b = cfg.scan[1].value(j);
            std::vector<Cell> row{a, b};
            try {
                RunConfig cell = cfg;
                config::set_parameter(cell, cfg.scan[0].name, a);
                config::set_parameter(cell, cfg.scan[1].name, b);
                const auto inst = config::instantiate(cell);
                const CompositionOperator op = compose(inst.system, cell.phase, inst.system.period());
                const FixedPointSet fps = find_fixed_points(op, inst.search_box, opt);
                Cell witnesses{};
                if (cell.scan_period2) {
                    std::vector<Point> known;
                    for (const auto& r : fps.records) known.push_back(r.points.front());
                    witnesses = count(period2_absence_test(op, known, inst.search_box, opt).witnesses.size());
                }
                const VerdictCounts v = tally(fps.records);
                std::vector<Cell> tail{std::string("ok"), std::string(fps.degenerate ? "degenerate root set" : ""),
                                       count(fps.records.size()), count(v.sinks), count(v.saddles), count(v.sources),
                                       count(v.non_hyperbolic), witnesses};
                const auto model_cells = model_scan_cells(cell);
                tail.insert(tail.end(), model_cells.begin(), model_cells.end());
                row.insert(row.end(), tail.begin(), tail.end());
            } catch (const std::exception& e) {
                row.resize(2);
                row.emplace_back(std::string("failed"));
                row.emplace_back(std::string(e.what()));
                row.resize(cols.size());
            }
            w.row(row);
        }
    }
    w.finish();
    return ExitCode::Ok;
}

ExitCode run_verify_global(const RunConfig& cfg, std::ostream& out) {
    const auto inst = config::instantiate(cfg);
    const std::size_t k = inst.system.dim();
    const std::size_t p = inst.system.period();
    const SolverOptions opt = solver_options(cfg);
    const CompositionOperator op = compose(inst.system, cfg.phase, p);
    const FixedPointSet fps = find_fixed_points(op, inst.search_box, opt);
    std::vector<Point> known;
    std::vector<CycleRecord> targets;
    for (const auto& r : fps.records) {
        known.push_back(r.points.front());
        if (cfg.targets_all || r.spectrum.verdict == Verdict::Sink) targets.push_back(r);
    }
    const Period2Result p2 = period2_absence_test(op, known, inst.search_box, opt);
    SampleGrid grid{inst.sample_box, cfg.grid, true, cfg.jitter, cfg.seed};
    const ConvergenceReport rep =
        verify_global_convergence(inst.system, targets, grid, cfg.max_iters, cfg.tol.convergence, cfg.phase);

    ExitCode code = ExitCode::Ok;
    std::string verdict = "criterion-satisfied";
    if (!p2.absent) {
        verdict = "criterion-violated";
        code = ExitCode::CriterionViolated;
    } else if (rep.in_domain == 0 || rep.assigned != rep.in_domain) {
        verdict = "inconclusive";
        code = ExitCode::Inconclusive;
    }

    auto meta = metadata(Command::VerifyGlobal, cfg, inst);
    meta.emplace_back("sample_grid", join_grid(cfg.grid));
    meta.emplace_back("search_grid", join_grid(fps.grid));
    meta.emplace_back("seed", std::to_string(cfg.seed));
    meta.emplace_back("targets", cfg.targets_all ? "all" : "sinks");
    Writer w(out, cfg.format, std::move(meta));

    w.begin_table("summary", {"verdict", "period2_absent", "witnesses", "unlisted_fixed", "degenerate", "samples",
                              "in_domain", "assigned", "fraction", "max_iterations_used", "max_iterations",
                              "tolerance"});
    w.row({verdict, p2.absent, count(p2.witnesses.size()), count(p2.unlisted_fixed.size()),
           fps.degenerate || p2.degenerate, count(rep.samples.size()), count(rep.in_domain), count(rep.assigned),
           rep.fraction, count(rep.max_iterations_used), count(rep.max_iterations), rep.tolerance});

    std::vector<std::string> cols{"target", "period", "scenario", "verdict", "assigned"};
    append(cols, coordinate_columns("x", k));
    w.begin_table("targets", cols);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const auto n = std::count_if(rep.samples.begin(), rep.samples.end(),
                                     [t](const SampleOutcome& s) { return s.target == t; });
        std::vector<Cell> row{count(t), count(targets[t].period), std::string(to_string(targets[t].scenario)),
                              std::string(to_string(targets[t].spectrum.verdict)), count(static_cast<std::size_t>(n))};
        append(row, targets[t].points.front());
        w.row(row);
    }

    cols = {"witness"};
    append(cols, coordinate_columns("x", k));
    w.begin_table("witnesses", cols);
    for (std::size_t i = 0; i < p2.witnesses.size(); ++i) {
        std::vector<Cell> row{count(i)};
        append(row, p2.witnesses[i]);
        w.row(row);
    }

    cols = {"sample", "iterations", "escaped"};
    append(cols, coordinate_columns("start", k));
    append(cols, coordinate_columns("final", k));
    w.begin_table("non_convergent", cols);
    for (std::size_t i : rep.non_convergent()) {
        const auto& s = rep.samples[i];
        std::vector<Cell> row{count(i), count(s.iterations), s.escaped};
        append(row, s.start);
        append(row, s.final_state);
        w.row(row);
    }
    w.finish();
    return code;
}

void print_error(std::ostream& err, std::string_view kind, std::string_view field, std::string_view message) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    if (!field.empty()) j["field"] = field;
    j["message"] = message;
    err << j.dump() << '\n';
}

ExitCode run(Command c, const RunConfig& cfg, std::ostream& err) {
    auto report_error = [&err](std::string_view kind, std::string_view field, std::string_view message) {
        print_error(err, kind, field, message);
    };
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (cfg.output_path) {
        file.open(*cfg.output_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            report_error("io", "output.path", "cannot open " + *cfg.output_path + " for writing");
            return ExitCode::IoError;
        }
        out = &file;
    }
    try {
        ExitCode code = ExitCode::Ok;
        switch (c) {
            case Command::Simulate: code = run_simulate(cfg, *out); break;
            case Command::Analyze: code = run_analyze(cfg, *out); break;
            case Command::RegionScan: code = run_region_scan(cfg, *out); break;
            case Command::VerifyGlobal: code = run_verify_global(cfg, *out); break;
        }
        out->flush();
        if (!*out) {
            report_error("io", "output.path", "write failed");
            return ExitCode::IoError;
        }
        return code;
    } catch (const ConfigError& e) {
        report_error("validation", e.field(), e.what());
        return ExitCode::ValidationError;
    } catch (const EvaluationError& e) {
        report_error("solver", "", e.what());
        return ExitCode::SolverFailure;
    } catch (const std::invalid_argument& e) {
        report_error("validation", "", e.what());
        return ExitCode::ValidationError;
    } catch (const std::ios_base::failure& e) {
        report_error("io", "", e.what());
        return ExitCode::IoError;
    } catch (const std::exception& e) {
        report_error("solver", "", e.what());
        return ExitCode::SolverFailure;
    }
}

}  // namespace trimap::commands
