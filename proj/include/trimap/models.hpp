#pragma once

// Bundled periodic triangular models with closed-form cycles, spectra and
// stability-region predicates.

#include "trimap/analysis.hpp"
#include "trimap/core.hpp"

#include <array>
#include <optional>
#include <vector>

namespace trimap::models {

// ---------------------------------------------------------------- Leslie-Gower
//
// F_n(x, y) = ( mu K_n x / (K_n + (mu-1) x),  alpha L_n y / (L_n + (alpha-1) y + beta x) )

struct LeslieGowerParams {
    double mu = 2.0;
    double alpha = 2.0;
    double beta = 0.5;
    std::array<double, 2> K{1.0, 2.0};
    std::array<double, 2> L{1.0, 2.0};

    /// mu, alpha > 1; 0 < beta < 1; K_n, L_n > 0. Throws std::invalid_argument.
    void validate() const;
};

/// 2-periodic system on [0, inf)^2. Collapses to an autonomous system, with a
/// warning, when K_0 == K_1 and L_0 == L_1.
[[nodiscard]] TriangularSystem leslie_gower_system(const LeslieGowerParams& p, bool analytic_partials = true);

/// [0, mu K_max / (mu-1)] x [0, alpha L_max / (alpha-1)]; every orbit enters it.
[[nodiscard]] Box leslie_gower_sampling_box(const LeslieGowerParams& p);

struct LeslieGowerCycles {
    Point origin;
    std::array<Point, 2> exclusion_x;  // (xbar_0, 0), (xbar_1, 0)
    std::array<Point, 2> exclusion_y;  // phase-0 point first
    std::array<Point, 2> coexistence;  // (xbar_0, Ybar_0), (xbar_1, Ybar_1)
    double A = 0.0;
    double B = 0.0;
    double coexistence_margin = 0.0;  // numerator of Ybar; > 0 iff the cycle lies in the open quadrant
    bool coexistence_admissible = false;
};

[[nodiscard]] LeslieGowerCycles leslie_gower_cycles(const LeslieGowerParams& p);

/// y-eigenvalue of Phi_2 at the x-axis fixed point. Exceeds 1 exactly when
/// the coexistence cycle is admissible.
[[nodiscard]] double leslie_gower_exclusion_quotient(const LeslieGowerParams& p);

struct LeslieGowerSpectra {
    SpectrumClassification origin;
    SpectrumClassification exclusion_x;
    SpectrumClassification exclusion_y;
    SpectrumClassification coexistence;
    double c = 0.0;
};

/// Closed-form spectra of Phi_2 = F_1 o F_0 at its four fixed points.
[[nodiscard]] LeslieGowerSpectra leslie_gower_spectra(const LeslieGowerParams& p, double center_tol = 1e-8);

// ---------------------------------------------------------------- logistic
//
// F_n(x, y) = ( mu_n x (1-x),  nu_n y (1-y) x )

struct LogisticParams {
    std::array<double, 2> mu{2.5, 1.2};
    std::array<double, 2> nu{0.5, 0.5};

    /// mu_n, nu_n > 0.
    void validate() const;
    /// [0,1]^2 is mapped into itself: mu_n <= 4 and nu_n <= 4.
    [[nodiscard]] bool self_maps_unit_square() const noexcept;
};

[[nodiscard]] TriangularSystem logistic_system(const LogisticParams& p);

[[nodiscard]] double logistic_delta1(double mu0, double mu1) noexcept;
[[nodiscard]] double logistic_delta2(double mu0, double mu1) noexcept;
/// Sign of delta2 on mu0, mu1 > 0.
[[nodiscard]] double logistic_reality_polynomial(double mu0, double mu1) noexcept;
/// Nonzero fixed point of the composed first coordinate from the Cardano
/// expression. Empty when delta2 < 0.
[[nodiscard]] std::optional<double> logistic_x_star(double mu0, double mu1) noexcept;

struct LogisticFixedPoints {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double reality_polynomial = 0.0;
    bool real = false;
    std::optional<double> x_star;
    Point e0{0.0, 0.0};
    std::optional<Point> e1;
    std::optional<Point> e2;
    bool y_star_numeric = true;  // y* always comes from the root finder, never a formula
};

[[nodiscard]] LogisticFixedPoints logistic_composition_fixed_points(const LogisticParams& p,
                                                                    const SolverOptions& options = {});

struct LogisticIndividual {
    Point e1;                     // ((mu-1)/mu, 0)
    Point e2;                     // ((mu-1)/mu, (mu + (1-mu) nu) / ((1-mu) nu)); NaN y at mu == 1
    bool e0_stable = false;       // mu <= 1
    bool e1_stable = false;       // 1 < mu <= 3 and (mu-1)/mu * nu <= 1
    bool e2_stable = false;       // 1 < mu <= 3 and 1 < (mu-1)/mu * nu <= 3
};

struct LogisticRegions {
    LogisticFixedPoints points;
    SpectrumClassification e0;
    std::optional<SpectrumClassification> e1;
    std::optional<SpectrumClassification> e2;
    double lambda_x = 0.0;    // shared x-eigenvalue of Phi_2 at E1 and E2
    double e1_lambda_y = 0.0;
    double e2_lambda_y = 0.0;
    bool e0_stable = false;   // mu0 mu1 < 1
    bool e1_stable = false;   // |lambda_x| < 1 and |e1_lambda_y| < 1
    bool e2_stable = false;   // |lambda_x| < 1 and |e2_lambda_y| < 1
    /// Smallest | |lambda| - 1 | over the predicates that were evaluated.
    double boundary_distance = 0.0;
    std::array<LogisticIndividual, 2> individual;
};

[[nodiscard]] LogisticRegions logistic_spectra_and_regions(const LogisticParams& p,
                                                           const SolverOptions& options = {},
                                                           double center_tol = 1e-8);

// ---------------------------------------------------------------- Ricker
//
// F_n(x, y) = ( x e^{r_n (1-x)},  y e^{s_n (1 - y - mu x)} ), r period 3, s period 2.
// General form: x_j e^{r_{j,n} (1 - x_j - sum_{i<j} mu_i x_i)}.

struct RickerParams {
    std::array<double, 3> r{1.5, 1.0, 1.8};
    std::array<double, 2> s{2.0, 1.2};
    double mu = 0.5;

    /// 0 < r_n, s_n <= 2; 0 <= mu < 1.
    void validate() const;
};

struct RickerGeneralParams {
    std::vector<std::vector<double>> rates;  // rates[j] holds one period of r_{j+1,n}
    std::vector<double> weights;             // mu_1 .. mu_{k-1}

    /// rates non-empty with entries in (0, 2]; weights.size() == k-1, each in [0, 1).
    void validate() const;
    [[nodiscard]] std::size_t dim() const noexcept { return rates.size(); }
};

[[nodiscard]] RickerGeneralParams to_general(const RickerParams& p);

/// 6-periodic system on [0, inf)^2.
[[nodiscard]] TriangularSystem ricker_system(const RickerParams& p, bool analytic_partials = true);
/// p = lcm of the rate-sequence lengths.
[[nodiscard]] TriangularSystem ricker_system(const RickerGeneralParams& p, bool analytic_partials = true);

/// [0, max_n e^{r_{j,n}-1} / r_{j,n}] per coordinate.
[[nodiscard]] Box ricker_sampling_box(const RickerGeneralParams& p);

/// (1, 1-mu_1, (1-mu_1)(1-mu_2), ...).
[[nodiscard]] Point ricker_coexistence_point(std::span<const double> weights);

struct RickerStability {
    Point c_star;
    std::vector<std::vector<double>> factors;  // r_{j,n} prod_{i<j} (1 - mu_i)
    bool condition = false;                    // every factor in (0, 2]
    double max_residual = 0.0;                 // max over n of |F_n(C*) - C*|
    std::vector<SpectrumClassification> per_map;  // spectrum of F_n at C*
};

[[nodiscard]] RickerStability ricker_stability_and_generalization(const RickerGeneralParams& p,
                                                                  double center_tol = 1e-8);

}  // namespace trimap::models
