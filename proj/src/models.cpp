#include "trimap/models.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace trimap::models {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

// Neumaier-compensated sum.
double compensated_sum(std::initializer_list<double> terms) {
    double sum = 0.0;
    double carry = 0.0;
    for (double t : terms) {
        const double s = sum + t;
        if (std::abs(sum) >= std::abs(t)) {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    return sum + carry;
}

SpectrumClassification diagonal_spectrum(std::initializer_list<double> diag, double center_tol) {
    LowerTriangular j(diag.size());
    std::size_t i = 0;
    for (double d : diag) {
        j.at(i, i) = d;
        ++i;
    }
    return classify_spectrum(j, center_tol);
}

TriangularSystem finish(std::vector<TriangularMap> maps, std::vector<std::size_t> periods) {
    const bool autonomous = maps.size() == 1;
    TriangularSystem sys(std::move(maps), std::move(periods));
    if (autonomous) return sys.with_warning("the periodic maps coincide; the system is autonomous (p = 1)");
    return sys;
}

}  // namespace

// ---------------------------------------------------------------- Leslie-Gower

void LeslieGowerParams::validate() const {
    require(std::isfinite(mu) && mu > 1.0, "leslie-gower: mu must be > 1");
    require(std::isfinite(alpha) && alpha > 1.0, "leslie-gower: alpha must be > 1");
    require(std::isfinite(beta) && beta > 0.0 && beta < 1.0, "leslie-gower: beta must lie in (0, 1)");
    for (double k : K) require(std::isfinite(k) && k > 0.0, "leslie-gower: K_n must be > 0");
    for (double l : L) require(std::isfinite(l) && l > 0.0, "leslie-gower: L_n must be > 0");
}

TriangularSystem leslie_gower_system(const LeslieGowerParams& p, bool analytic_partials) {
    p.validate();
    const std::size_t px = p.K[0] == p.K[1] ? 1 : 2;
    const std::size_t py = p.L[0] == p.L[1] ? 1 : 2;
    const std::size_t period = std::lcm(px, py);
    const Box domain{{0.0, kInf}, {0.0, kInf}};
    std::vector<TriangularMap> maps;
    for (std::size_t n = 0; n < period; ++n) {
        const double mu = p.mu, alpha = p.alpha, beta = p.beta, K = p.K[n], L = p.L[n];
        CoordinateFn fx = [=](std::span<const double> v) { return mu * K * v[0] / (K + (mu - 1.0) * v[0]); };
        CoordinateFn fy = [=](std::span<const double> v) {
            return alpha * L * v[1] / (L + (alpha - 1.0) * v[1] + beta * v[0]);
        };
        PartialsFn dx, dy;
        if (analytic_partials) {
            dx = [=](std::span<const double> v, std::span<double> out) {
                const double q = K / (K + (mu - 1.0) * v[0]);
                out[0] = mu * q * q;
            };
            dy = [=](std::span<const double> v, std::span<double> out) {
                const double D = L + (alpha - 1.0) * v[1] + beta * v[0];
                out[0] = -alpha * L * beta * v[1] / (D * D);
                out[1] = alpha * (L / D) * ((L + beta * v[0]) / D);
            };
        }
        maps.emplace_back(std::vector<CoordinateMap>{CoordinateMap(1, fx, dx), CoordinateMap(2, fy, dy)}, domain);
    }
    return finish(std::move(maps), {px, py});
}

Box leslie_gower_sampling_box(const LeslieGowerParams& p) {
    p.validate();
    const double kmax = std::max(p.K[0], p.K[1]);
    const double lmax = std::max(p.L[0], p.L[1]);
    return {{0.0, p.mu * kmax / (p.mu - 1.0)}, {0.0, p.alpha * lmax / (p.alpha - 1.0)}};
}

LeslieGowerCycles leslie_gower_cycles(const LeslieGowerParams& p) {
    p.validate();
    const double mu = p.mu, a = p.alpha, b = p.beta;
    const double K0 = p.K[0], K1 = p.K[1], L0 = p.L[0], L1 = p.L[1];
    const double a21 = (a - 1.0) * (a + 1.0);
    LeslieGowerCycles c;
    c.origin = {0.0, 0.0};
    const double x0 = K0 * K1 * (mu + 1.0) / (K0 * mu + K1);
    const double x1 = K0 * K1 * (mu + 1.0) / (K1 * mu + K0);
    c.exclusion_x = {Point{x0, 0.0}, Point{x1, 0.0}};
    const double y0 = (a + 1.0) * L0 * L1 / (a * L0 + L1);
    const double y1 = (a + 1.0) * L0 * L1 / (a * L1 + L0);
    c.exclusion_y = {Point{0.0, y0}, Point{0.0, y1}};

    const double bk = b * K1 * (mu + 1.0);
    c.A = compensated_sum({bk * bk, bk * (mu * L0 + L1), -a21 * mu * L0 * L1});
    c.B = compensated_sum({bk * (mu * L1 + L0), -a21 * (mu * mu + 1.0) * L0 * L1});
    // numerator expanded term by term so the cancellation is compensated
    const double K00 = K0 * K0, K10 = K1 * K0;
    c.coexistence_margin = compensated_sum({
        a21 * K1 * K1 * mu * L0 * L1,
        -bk * bk * K00,
        -bk * (mu * L0 + L1) * K00,
        a21 * mu * L0 * L1 * K00,
        -bk * (mu * L1 + L0) * K10,
        a21 * (mu * mu + 1.0) * L0 * L1 * K10,
    });
    const double den0 = (a - 1.0) * (K0 * mu + K1) * (K0 * (bk + a * L0 + L1) + K1 * mu * (a * L0 + L1));
    const double den1 = (a - 1.0) * (K1 * mu + K0) * (K0 * (bk + mu * (a * L1 + L0)) + K1 * (a * L1 + L0));
    c.coexistence = {Point{x0, c.coexistence_margin / den0}, Point{x1, c.coexistence_margin / den1}};
    c.coexistence_admissible = c.coexistence_margin > 0.0;
    return c;
}

double leslie_gower_exclusion_quotient(const LeslieGowerParams& p) {
    p.validate();
    const double mu = p.mu, a = p.alpha, b = p.beta;
    const double K0 = p.K[0], K1 = p.K[1], L0 = p.L[0], L1 = p.L[1];
    const double num = a * a * (mu * K0 + K1) * (K0 + mu * K1) * L0 * L1;
    const double den = (K1 * L0 + K0 * (b * (mu + 1.0) * K1 + mu * L0)) * (mu * K1 * L1 + K0 * (b * (mu + 1.0) * K1 + L1));
    return num / den;
}

LeslieGowerSpectra leslie_gower_spectra(const LeslieGowerParams& p, double center_tol) {
    LeslieGowerSpectra s;
    s.c = leslie_gower_exclusion_quotient(p);
    const double mu2 = p.mu * p.mu;
    const double a2 = p.alpha * p.alpha;
    s.origin = diagonal_spectrum({mu2, a2}, center_tol);
    s.exclusion_x = diagonal_spectrum({1.0 / mu2, s.c}, center_tol);
    s.exclusion_y = diagonal_spectrum({mu2, 1.0 / a2}, center_tol);
    s.coexistence = diagonal_spectrum({1.0 / mu2, 1.0 / s.c}, center_tol);
    return s;
}

// ---------------------------------------------------------------- logistic

void LogisticParams::validate() const {
    for (double m : mu) require(std::isfinite(m) && m > 0.0, "logistic: mu_n must be > 0");
    for (double n : nu) require(std::isfinite(n) && n > 0.0, "logistic: nu_n must be > 0");
}

bool LogisticParams::self_maps_unit_square() const noexcept {
    return std::all_of(mu.begin(), mu.end(), [](double m) { return m <= 4.0; }) &&
           std::all_of(nu.begin(), nu.end(), [](double n) { return n <= 4.0; });
}

TriangularSystem logistic_system(const LogisticParams& p) {
    p.validate();
    const std::size_t px = p.mu[0] == p.mu[1] ? 1 : 2;
    const std::size_t py = p.nu[0] == p.nu[1] ? 1 : 2;
    const std::size_t period = std::lcm(px, py);
    const Box domain{{0.0, 1.0}, {0.0, 1.0}};
    std::vector<TriangularMap> maps;
    for (std::size_t n = 0; n < period; ++n) {
        const double mu = p.mu[n], nu = p.nu[n];
        CoordinateMap fx(
            1, [=](std::span<const double> v) { return mu * v[0] * (1.0 - v[0]); },
            [=](std::span<const double> v, std::span<double> out) { out[0] = mu * (1.0 - 2.0 * v[0]); });
        CoordinateMap fy(
            2, [=](std::span<const double> v) { return nu * v[1] * (1.0 - v[1]) * v[0]; },
            [=](std::span<const double> v, std::span<double> out) {
                out[0] = nu * v[1] * (1.0 - v[1]);
                out[1] = nu * v[0] * (1.0 - 2.0 * v[1]);
            });
        maps.emplace_back(std::vector<CoordinateMap>{std::move(fx), std::move(fy)}, domain);
    }
    TriangularSystem sys = finish(std::move(maps), {px, py});
    if (!p.self_maps_unit_square()) sys = sys.with_warning("logistic: some mu_n or nu_n exceeds 4; [0,1]^2 is not invariant");
    return sys;
}

double logistic_delta1(double mu0, double mu1) noexcept {
    const double m04 = std::pow(mu0, 4);
    return 2.0 * std::pow(mu1, 3) * m04 * mu0 * mu0 - 9.0 * std::pow(mu1, 3) * m04 * mu0 + 27.0 * mu1 * mu1 * m04;
}

double logistic_reality_polynomial(double mu0, double mu1) noexcept {
    return (4.0 - mu1) * mu1 * mu0 * mu0 - 2.0 * mu1 * (9.0 - 2.0 * mu1) * mu0 + 27.0;
}

double logistic_delta2(double mu0, double mu1) noexcept {
    return std::pow(mu0, 8) * std::pow(mu1, 4) * logistic_reality_polynomial(mu0, mu1);
}

std::optional<double> logistic_x_star(double mu0, double mu1) noexcept {
    const double d2 = logistic_delta2(mu0, mu1);
    if (!(d2 >= 0.0)) return std::nullopt;
    const double d1 = logistic_delta1(mu0, mu1);
    // Both signs of the square root give the same real root; taking the one
    // that matches d1 avoids cancellation in the radicand.
    const double surd = 3.0 * std::sqrt(3.0) * std::sqrt(d2);
    const double S = d1 >= 0.0 ? d1 + surd : d1 - surd;
    if (S == 0.0) return 2.0 / 3.0;
    const double R = std::cbrt(S);
    return 2.0 / 3.0 - std::cbrt(4.0) * R / (6.0 * mu0 * mu0 * mu1) -
           std::cbrt(2.0) * (mu0 - 3.0) * mu0 * mu1 / (3.0 * R);
}

LogisticFixedPoints logistic_composition_fixed_points(const LogisticParams& p, const SolverOptions& options) {
    p.validate();
    LogisticFixedPoints fp;
    const double mu0 = p.mu[0], mu1 = p.mu[1];
    fp.delta1 = logistic_delta1(mu0, mu1);
    fp.delta2 = logistic_delta2(mu0, mu1);
    fp.reality_polynomial = logistic_reality_polynomial(mu0, mu1);
    fp.real = fp.reality_polynomial >= 0.0;
    fp.x_star = logistic_x_star(mu0, mu1);
    if (!fp.x_star) return fp;
    const double xs = *fp.x_star;
    fp.e1 = Point{xs, 0.0};

    const TriangularSystem sys = logistic_system(p);
    const CompositionOperator op = compose(sys, 0, 2);
    const std::array<double, 1> prefix{xs};
    SolverOptions opt = options;
    if (opt.grid.size() != 1) opt.grid = {opt.grid.back()};
    const ScalarRoots ys = coordinate_roots(op, prefix, Interval{0.0, 1.0}, opt.grid.front(), opt);
    for (double y : ys.roots) {
        if (y > opt.dedup_tol) {
            fp.e2 = Point{xs, y};
            break;
        }
    }
    return fp;
}

LogisticRegions logistic_spectra_and_regions(const LogisticParams& p, const SolverOptions& options,
                                             double center_tol) {
    LogisticRegions out;
    out.points = logistic_composition_fixed_points(p, options);
    const double mu0 = p.mu[0], mu1 = p.mu[1], nu0 = p.nu[0], nu1 = p.nu[1];
    const double lambda0 = mu0 * mu1;
    out.e0 = diagonal_spectrum({lambda0, 0.0}, center_tol);
    out.e0_stable = lambda0 < 1.0;
    out.boundary_distance = std::abs(lambda0 - 1.0);

    if (out.points.x_star) {
        const double xs = *out.points.x_star;
        // d/dx f_1(f_0(x)) by the chain rule
        out.lambda_x = mu0 * mu1 * (1.0 - 2.0 * xs) * (1.0 - 2.0 * mu0 * xs * (1.0 - xs));
        out.e1_lambda_y = mu0 * xs * xs * (1.0 - xs) * nu0 * nu1;
        out.e1 = diagonal_spectrum({out.lambda_x, out.e1_lambda_y}, center_tol);
        out.e1_stable = std::abs(out.lambda_x) < 1.0 && std::abs(out.e1_lambda_y) < 1.0;
        out.boundary_distance = std::min({out.boundary_distance, std::abs(std::abs(out.lambda_x) - 1.0),
                                          std::abs(std::abs(out.e1_lambda_y) - 1.0)});
        if (out.points.e2) {
            const double psi = (*out.points.e2)[1];
            out.e2_lambda_y = out.e1_lambda_y * (1.0 - 2.0 * psi) * (1.0 + 2.0 * psi * (psi - 1.0) * xs * nu0);
            out.e2 = diagonal_spectrum({out.lambda_x, out.e2_lambda_y}, center_tol);
            out.e2_stable = std::abs(out.lambda_x) < 1.0 && std::abs(out.e2_lambda_y) < 1.0;
            out.boundary_distance =
                std::min(out.boundary_distance, std::abs(std::abs(out.e2_lambda_y) - 1.0));
        }
    }

    for (std::size_t i = 0; i < 2; ++i) {
        const double mu = p.mu[i], nu = p.nu[i];
        LogisticIndividual& ind = out.individual[i];
        const double x = (mu - 1.0) / mu;
        ind.e1 = {x, 0.0};
        ind.e2 = {x, mu == 1.0 ? std::numeric_limits<double>::quiet_NaN() : (mu + (1.0 - mu) * nu) / ((1.0 - mu) * nu)};
        ind.e0_stable = mu <= 1.0;
        ind.e1_stable = mu > 1.0 && mu <= 3.0 && x * nu <= 1.0;
        ind.e2_stable = mu > 1.0 && mu <= 3.0 && x * nu > 1.0 && x * nu <= 3.0;
    }
    return out;
}

// ---------------------------------------------------------------- Ricker

void RickerParams::validate() const {
    for (double v : r) require(std::isfinite(v) && v > 0.0 && v <= 2.0, "ricker: r_n must lie in (0, 2]");
    for (double v : s) require(std::isfinite(v) && v > 0.0 && v <= 2.0, "ricker: s_n must lie in (0, 2]");
    require(std::isfinite(mu) && mu >= 0.0 && mu < 1.0, "ricker: mu must lie in [0, 1)");
}

void RickerGeneralParams::validate() const {
    require(!rates.empty(), "ricker: at least one coordinate is required");
    for (const auto& seq : rates) {
        require(!seq.empty(), "ricker: every rate sequence needs at least one entry");
        for (double v : seq) require(std::isfinite(v) && v > 0.0 && v <= 2.0, "ricker: rates must lie in (0, 2]");
    }
    require(weights.size() + 1 == rates.size(), "ricker: expected k-1 interaction weights");
    for (double w : weights) require(std::isfinite(w) && w >= 0.0 && w < 1.0, "ricker: weights must lie in [0, 1)");
}

RickerGeneralParams to_general(const RickerParams& p) {
    p.validate();
    return {{{p.r.begin(), p.r.end()}, {p.s.begin(), p.s.end()}}, {p.mu}};
}

TriangularSystem ricker_system(const RickerParams& p, bool analytic_partials) {
    return ricker_system(to_general(p), analytic_partials);
}

TriangularSystem ricker_system(const RickerGeneralParams& p, bool analytic_partials) {
    p.validate();
    const std::size_t k = p.dim();
    std::vector<std::size_t> periods;
    for (const auto& seq : p.rates) periods.push_back(seq.size());
    const std::size_t period = system_period(periods);
    const Box domain(k, Interval{0.0, kInf});
    std::vector<TriangularMap> maps;
    for (std::size_t n = 0; n < period; ++n) {
        std::vector<CoordinateMap> coords;
        for (std::size_t j = 0; j < k; ++j) {
            const double r = p.rates[j][n % p.rates[j].size()];
            const std::vector<double> w(p.weights.begin(), p.weights.begin() + static_cast<std::ptrdiff_t>(j));
            auto exponent = [r, w, j](std::span<const double> v) {
                double e = 1.0 - v[j];
                for (std::size_t i = 0; i < j; ++i) e -= w[i] * v[i];
                return r * e;
            };
            CoordinateFn value = [exponent, j](std::span<const double> v) { return v[j] * std::exp(exponent(v)); };
            PartialsFn partials;
            if (analytic_partials) {
                partials = [exponent, r, w, j](std::span<const double> v, std::span<double> out) {
                    const double e = std::exp(exponent(v));
                    for (std::size_t i = 0; i < j; ++i) out[i] = -r * w[i] * v[j] * e;
                    out[j] = e * (1.0 - r * v[j]);
                };
            }
            coords.emplace_back(j + 1, std::move(value), std::move(partials));
        }
        maps.emplace_back(std::move(coords), domain);
    }
    return TriangularSystem(std::move(maps), std::move(periods));
}

Box ricker_sampling_box(const RickerGeneralParams& p) {
    p.validate();
    Box box;
    for (const auto& seq : p.rates) {
        double hi = 0.0;
        for (double r : seq) hi = std::max(hi, std::exp(r - 1.0) / r);
        box.push_back({0.0, hi});
    }
    return box;
}

Point ricker_coexistence_point(std::span<const double> weights) {
    Point c{1.0};
    double prod = 1.0;
    for (double w : weights) {
        prod *= 1.0 - w;
        c.push_back(prod);
    }
    return c;
}

RickerStability ricker_stability_and_generalization(const RickerGeneralParams& p, double center_tol) {
    p.validate();
    RickerStability out;
    out.c_star = ricker_coexistence_point(p.weights);
    out.condition = true;
    for (std::size_t j = 0; j < p.dim(); ++j) {
        std::vector<double> f;
        for (double r : p.rates[j]) {
            const double v = r * out.c_star[j];
            out.condition = out.condition && v > 0.0 && v <= 2.0;
            f.push_back(v);
        }
        out.factors.push_back(std::move(f));
    }
    const TriangularSystem sys = ricker_system(p);
    for (std::size_t n = 0; n < sys.period(); ++n) {
        const TriangularMap& F = sys.map(n);
        out.max_residual = std::max(out.max_residual, max_norm_distance(F(out.c_star), out.c_star));
        out.per_map.push_back(classify_spectrum(F.jacobian(out.c_star), center_tol));
    }
    return out;
}

}  // namespace trimap::models
