#include "trimap/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace trimap::config {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string join(const std::string& path, std::size_t index) { return path + "[" + std::to_string(index) + "]"; }

void require_object(const json& j, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(join(path, key), "unknown key");
        }
    }
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "expected a finite number");
    return v;
}

std::size_t get_count(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
    throw ConfigError(path, "expected a non-negative integer");
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
    return j.get<bool>();
}

std::vector<double> get_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], join(path, i)));
    return out;
}

template <std::size_t N>
std::array<double, N> get_fixed(const json& j, const std::string& path) {
    const auto v = get_numbers(j, path);
    if (v.size() != N) throw ConfigError(path, "expected " + std::to_string(N) + " numbers");
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

std::vector<std::size_t> get_grid(const json& j, const std::string& path) {
    std::vector<std::size_t> out;
    if (j.is_array()) {
        if (j.empty()) throw ConfigError(path, "expected at least one density");
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_count(j[i], join(path, i)));
    } else {
        out.push_back(get_count(j, path));
    }
    return out;
}

Box get_box(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected an array of [lo, hi] pairs");
    Box box;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto pair = get_numbers(j[i], join(path, i));
        if (pair.size() != 2) throw ConfigError(join(path, i), "expected [lo, hi]");
        if (pair[0] > pair[1]) throw ConfigError(join(path, i), "lo must not exceed hi");
        box.push_back({pair[0], pair[1]});
    }
    return box;
}

void parse_params(RunConfig& cfg, const json& j, const std::string& path) {
    switch (cfg.model) {
        case ModelKind::LeslieGower: {
            require_object(j, path, {"mu", "alpha", "beta", "K", "L"});
            auto& p = cfg.leslie_gower;
            if (j.contains("mu")) p.mu = get_number(j["mu"], join(path, "mu"));
            if (j.contains("alpha")) p.alpha = get_number(j["alpha"], join(path, "alpha"));
            if (j.contains("beta")) p.beta = get_number(j["beta"], join(path, "beta"));
            if (j.contains("K")) p.K = get_fixed<2>(j["K"], join(path, "K"));
            if (j.contains("L")) p.L = get_fixed<2>(j["L"], join(path, "L"));
            break;
        }
        case ModelKind::Logistic: {
            require_object(j, path, {"mu", "nu"});
            if (j.contains("mu")) cfg.logistic.mu = get_fixed<2>(j["mu"], join(path, "mu"));
            if (j.contains("nu")) cfg.logistic.nu = get_fixed<2>(j["nu"], join(path, "nu"));
            break;
        }
        case ModelKind::Ricker: {
            require_object(j, path, {"r", "s", "mu", "rates", "weights"});
            const bool general = j.contains("rates") || j.contains("weights");
            const bool planar = j.contains("r") || j.contains("s") || j.contains("mu");
            if (general && planar) throw ConfigError(path, "use either r/s/mu or rates/weights, not both");
            if (general) {
                if (!j.contains("rates") || !j.contains("weights")) throw ConfigError(path, "rates and weights go together");
                const json& rates = j["rates"];
                if (!rates.is_array()) throw ConfigError(join(path, "rates"), "expected an array of rate sequences");
                cfg.ricker.rates.clear();
                for (std::size_t i = 0; i < rates.size(); ++i) {
                    cfg.ricker.rates.push_back(get_numbers(rates[i], join(join(path, "rates"), i)));
                }
                cfg.ricker.weights = get_numbers(j["weights"], join(path, "weights"));
            } else {
                models::RickerParams p;
                if (j.contains("r")) p.r = get_fixed<3>(j["r"], join(path, "r"));
                if (j.contains("s")) p.s = get_fixed<2>(j["s"], join(path, "s"));
                if (j.contains("mu")) p.mu = get_number(j["mu"], join(path, "mu"));
                try {
                    cfg.ricker = models::to_general(p);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(path, e.what());
                }
            }
            break;
        }
        case ModelKind::Custom: {
            require_object(j, path, {"kind", "mu", "dim"});
            if (j.contains("kind")) cfg.custom.kind = get_string(j["kind"], join(path, "kind"));
            if (j.contains("mu")) cfg.custom.mu = get_number(j["mu"], join(path, "mu"));
            if (j.contains("dim")) cfg.custom.dim = get_count(j["dim"], join(path, "dim"));
            break;
        }
    }
}

void check_model(const RunConfig& cfg) {
    try {
        switch (cfg.model) {
            case ModelKind::LeslieGower: cfg.leslie_gower.validate(); break;
            case ModelKind::Logistic: cfg.logistic.validate(); break;
            case ModelKind::Ricker: cfg.ricker.validate(); break;
            case ModelKind::Custom:
                if (cfg.custom.kind == "logistic-1d") {
                    if (!(cfg.custom.mu > 0.0)) throw std::invalid_argument("logistic-1d: mu must be > 0");
                } else if (cfg.custom.kind == "identity") {
                    if (cfg.custom.dim == 0) throw std::invalid_argument("identity: dim must be >= 1");
                } else {
                    throw std::invalid_argument("custom kind must be logistic-1d or identity");
                }
                break;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("params", e.what());
    }
}

std::size_t model_dim(const RunConfig& cfg) {
    switch (cfg.model) {
        case ModelKind::LeslieGower:
        case ModelKind::Logistic: return 2;
        case ModelKind::Ricker: return cfg.ricker.dim();
        case ModelKind::Custom: return cfg.custom.kind == "identity" ? cfg.custom.dim : 1;
    }
    return 0;
}

// Common fixed points of the general Ricker maps: each coordinate is either
// extinct or sits at 1 - sum_{i<j} mu_i x_i.
std::vector<Point> ricker_references(const models::RickerGeneralParams& p) {
    const std::size_t k = p.dim();
    std::vector<Point> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        Point x(k, 0.0);
        bool ok = true;
        for (std::size_t j = 0; j < k && ok; ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            double v = 1.0;
            for (std::size_t i = 0; i < j; ++i) v -= p.weights[i] * x[i];
            ok = v > 0.0;
            x[j] = v;
        }
        if (ok) out.push_back(std::move(x));
    }
    return out;
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

std::string_view to_string(ModelKind m) noexcept {
    switch (m) {
        case ModelKind::LeslieGower: return "leslie-gower";
        case ModelKind::Logistic: return "logistic";
        case ModelKind::Ricker: return "ricker";
        case ModelKind::Custom: return "custom";
    }
    return "unknown";
}

double ScanAxis::value(std::size_t i) const noexcept {
    if (n <= 1) return min;
    if (i + 1 == n) return max;
    return min + (max - min) * static_cast<double>(i) / static_cast<double>(n - 1);
}

void RunConfig::validate() const {
    check_model(*this);
    const std::size_t k = model_dim(*this);
    auto check_tol = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("tolerances.") + name, "must be > 0");
    };
    check_tol(tol.newton, "newton");
    check_tol(tol.dedup, "dedup");
    check_tol(tol.orbit, "orbit");
    check_tol(tol.convergence, "convergence");
    check_tol(tol.cluster, "cluster");
    check_tol(tol.center, "center");
    auto check_grid = [k](const std::vector<std::size_t>& g, const char* name) {
        if (g.size() != 1 && g.size() != k) throw ConfigError(name, "expected one density or one per coordinate");
        for (std::size_t d : g) {
            if (d < 2) throw ConfigError(name, "densities must be >= 2");
        }
    };
    check_grid(grid, "grid");
    check_grid(search_grid, "search_grid");
    auto check_box = [k](const std::optional<Box>& b, const char* name) {
        if (b && b->size() != k) throw ConfigError(name, "expected " + std::to_string(k) + " intervals");
    };
    check_box(box, "box");
    check_box(sample_box, "sample_box");
    if (x0 && x0->size() != k) throw ConfigError("x0", "expected " + std::to_string(k) + " coordinates");
    if (max_iters == 0) throw ConfigError("max_iters", "must be >= 1");
    if (period && *period == 0) throw ConfigError("period", "must be >= 1");
    if (!(jitter >= 0.0 && jitter < 1.0)) throw ConfigError("jitter", "must lie in [0, 1)");
    if (!scan.empty()) {
        if (scan.size() != 2) throw ConfigError("scan.axes", "exactly two axes are required");
        for (std::size_t i = 0; i < scan.size(); ++i) {
            const std::string path = "scan.axes[" + std::to_string(i) + "]";
            if (scan[i].n == 0) throw ConfigError(path + ".n", "must be >= 1");
            if (scan[i].min > scan[i].max) throw ConfigError(path, "min must not exceed max");
            RunConfig probe = *this;
            set_parameter(probe, scan[i].name, scan[i].min);
        }
        if (scan[0].name == scan[1].name) throw ConfigError("scan.axes", "axes must name different parameters");
    }
}

RunConfig parse_config_text(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<syntax>", e.what());
    }
    RunConfig cfg;
    require_object(j, "", {"model", "params", "box", "sample_box", "x0", "phase", "steps", "grid", "search_grid",
                           "tolerances", "max_iters", "period", "targets", "scan", "output", "seed", "jitter"});
    if (j.contains("model")) {
        const std::string m = get_string(j["model"], "model");
        if (m == "leslie-gower") {
            cfg.model = ModelKind::LeslieGower;
        } else if (m == "logistic") {
            cfg.model = ModelKind::Logistic;
        } else if (m == "ricker") {
            cfg.model = ModelKind::Ricker;
        } else if (m == "custom") {
            cfg.model = ModelKind::Custom;
        } else {
            throw ConfigError("model", "expected leslie-gower, logistic, ricker or custom");
        }
    }
    if (j.contains("params")) parse_params(cfg, j["params"], "params");
    if (j.contains("box")) cfg.box = get_box(j["box"], "box");
    if (j.contains("sample_box")) cfg.sample_box = get_box(j["sample_box"], "sample_box");
    if (j.contains("x0")) cfg.x0 = get_numbers(j["x0"], "x0");
    if (j.contains("phase")) cfg.phase = get_count(j["phase"], "phase");
    if (j.contains("steps")) cfg.steps = get_count(j["steps"], "steps");
    if (j.contains("grid")) cfg.grid = get_grid(j["grid"], "grid");
    if (j.contains("search_grid")) cfg.search_grid = get_grid(j["search_grid"], "search_grid");
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        require_object(t, "tolerances", {"newton", "dedup", "orbit", "convergence", "cluster", "center"});
        if (t.contains("newton")) cfg.tol.newton = get_number(t["newton"], "tolerances.newton");
        if (t.contains("dedup")) cfg.tol.dedup = get_number(t["dedup"], "tolerances.dedup");
        if (t.contains("orbit")) cfg.tol.orbit = get_number(t["orbit"], "tolerances.orbit");
        if (t.contains("convergence")) cfg.tol.convergence = get_number(t["convergence"], "tolerances.convergence");
        if (t.contains("cluster")) cfg.tol.cluster = get_number(t["cluster"], "tolerances.cluster");
        if (t.contains("center")) cfg.tol.center = get_number(t["center"], "tolerances.center");
    }
    if (j.contains("max_iters")) cfg.max_iters = get_count(j["max_iters"], "max_iters");
    if (j.contains("period")) cfg.period = get_count(j["period"], "period");
    if (j.contains("targets")) {
        const std::string t = get_string(j["targets"], "targets");
        if (t != "sinks" && t != "all") throw ConfigError("targets", "expected sinks or all");
        cfg.targets_all = t == "all";
    }
    if (j.contains("scan")) {
        const json& s = j["scan"];
        require_object(s, "scan", {"axes", "period2"});
        if (s.contains("axes")) {
            const json& axes = s["axes"];
            if (!axes.is_array()) throw ConfigError("scan.axes", "expected an array");
            for (std::size_t i = 0; i < axes.size(); ++i) {
                const std::string path = join("scan.axes", i);
                require_object(axes[i], path, {"name", "min", "max", "n"});
                for (const char* key : {"name", "min", "max", "n"}) {
                    if (!axes[i].contains(key)) throw ConfigError(join(path, key), "missing");
                }
                cfg.scan.push_back({get_string(axes[i]["name"], join(path, "name")),
                                    get_number(axes[i]["min"], join(path, "min")),
                                    get_number(axes[i]["max"], join(path, "max")),
                                    get_count(axes[i]["n"], join(path, "n"))});
            }
        }
        if (s.contains("period2")) cfg.scan_period2 = get_bool(s["period2"], "scan.period2");
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        require_object(o, "output", {"path", "format"});
        if (o.contains("path")) cfg.output_path = get_string(o["path"], "output.path");
        if (o.contains("format")) {
            try {
                cfg.format = report::parse_format(get_string(o["format"], "output.format"));
            } catch (const std::invalid_argument& e) {
                throw ConfigError("output.format", e.what());
            }
        }
    }
    if (j.contains("seed")) cfg.seed = get_count(j["seed"], "seed");
    if (j.contains("jitter")) cfg.jitter = get_number(j["jitter"], "jitter");
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void set_parameter(RunConfig& cfg, std::string_view name, double value) {
    const std::string field = "scan parameter " + std::string(name);
    auto indexed = [&](std::string_view prefix, std::size_t count) -> std::optional<std::size_t> {
        if (name.size() != prefix.size() + 1 || name.substr(0, prefix.size()) != prefix) return std::nullopt;
        const char c = name.back();
        if (c < '0' || c > '9') return std::nullopt;
        const auto i = static_cast<std::size_t>(c - '0');
        if (i >= count) return std::nullopt;
        return i;
    };
    switch (cfg.model) {
        case ModelKind::LeslieGower: {
            auto& p = cfg.leslie_gower;
            if (name == "mu") return void(p.mu = value);
            if (name == "alpha") return void(p.alpha = value);
            if (name == "beta") return void(p.beta = value);
            if (auto i = indexed("K", 2)) return void(p.K[*i] = value);
            if (auto i = indexed("L", 2)) return void(p.L[*i] = value);
            break;
        }
        case ModelKind::Logistic:
            if (auto i = indexed("mu", 2)) return void(cfg.logistic.mu[*i] = value);
            if (auto i = indexed("nu", 2)) return void(cfg.logistic.nu[*i] = value);
            break;
        case ModelKind::Ricker: {
            auto& p = cfg.ricker;
            if (name == "mu" && !p.weights.empty()) return void(p.weights[0] = value);
            if (p.rates.size() >= 1) {
                if (auto i = indexed("r", p.rates[0].size())) return void(p.rates[0][*i] = value);
            }
            if (p.rates.size() >= 2) {
                if (auto i = indexed("s", p.rates[1].size())) return void(p.rates[1][*i] = value);
            }
            if (auto i = indexed("w", p.weights.size() + 1); i && *i >= 1) return void(p.weights[*i - 1] = value);
            break;
        }
        case ModelKind::Custom:
            if (name == "mu" && cfg.custom.kind == "logistic-1d") return void(cfg.custom.mu = value);
            break;
    }
    throw ConfigError(field, "unknown parameter for model " + std::string(to_string(cfg.model)));
}

ModelInstance instantiate(const RunConfig& cfg) {
    check_model(cfg);
    std::optional<TriangularSystem> sys;
    Box search, sample;
    Point x0;
    std::vector<Point> refs;
    try {
        switch (cfg.model) {
            case ModelKind::LeslieGower: {
                const auto& p = cfg.leslie_gower;
                sys = models::leslie_gower_system(p);
                search = sample = models::leslie_gower_sampling_box(p);
                x0 = {0.7, 0.4};
                const auto c = models::leslie_gower_cycles(p);
                refs.push_back(c.origin);
                for (const auto& pts : {c.exclusion_x, c.exclusion_y}) refs.insert(refs.end(), pts.begin(), pts.end());
                if (c.coexistence_admissible) refs.insert(refs.end(), c.coexistence.begin(), c.coexistence.end());
                break;
            }
            case ModelKind::Logistic: {
                sys = models::logistic_system(cfg.logistic);
                search = sample = {{0.0, 1.0}, {0.0, 1.0}};
                x0 = {0.3, 0.4};
                SolverOptions opt;
                opt.newton_tol = cfg.tol.newton;
                opt.dedup_tol = cfg.tol.dedup;
                const auto fp = models::logistic_composition_fixed_points(cfg.logistic, opt);
                refs.push_back(fp.e0);
                if (fp.e1) refs.push_back(*fp.e1);
                if (fp.e2) refs.push_back(*fp.e2);
                break;
            }
            case ModelKind::Ricker: {
                sys = models::ricker_system(cfg.ricker);
                search = sample = models::ricker_sampling_box(cfg.ricker);
                x0.assign(cfg.ricker.dim(), 0.5);
                refs = ricker_references(cfg.ricker);
                break;
            }
            case ModelKind::Custom: {
                if (cfg.custom.kind == "logistic-1d") {
                    const double mu = cfg.custom.mu;
                    sys = scalar_system([mu](double x) { return mu * x * (1.0 - x); }, {0.0, 1.0},
                                        [mu](double x) { return mu * (1.0 - 2.0 * x); });
                    search = sample = {{0.0, 1.0}};
                    x0 = {0.3};
                    refs.push_back({0.0});
                    if (mu > 1.0) refs.push_back({(mu - 1.0) / mu});
                } else {
                    const std::size_t k = cfg.custom.dim;
                    std::vector<CoordinateMap> coords;
                    for (std::size_t j = 0; j < k; ++j) {
                        coords.emplace_back(j + 1, [j](std::span<const double> v) { return v[j]; });
                    }
                    const Box unit(k, Interval{0.0, 1.0});
                    sys = TriangularSystem({TriangularMap(std::move(coords), unit)}, std::vector<std::size_t>(k, 1));
                    search = sample = unit;
                    x0.assign(k, 0.5);
                }
                break;
            }
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("params", e.what());
    }
    if (cfg.box) search = *cfg.box;
    if (cfg.sample_box) sample = *cfg.sample_box;
    if (cfg.x0) x0 = *cfg.x0;
    if (cfg.phase >= sys->period()) throw ConfigError("phase", "must be smaller than the system period " + std::to_string(sys->period()));
    return {std::move(*sys), std::move(search), std::move(sample), std::move(x0), std::move(refs)};
}

}  // namespace trimap::config
