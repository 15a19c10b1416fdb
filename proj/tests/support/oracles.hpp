#pragma once

// Independent reference computations used only by the tests.

#include "trimap/analysis.hpp"
#include "trimap/models.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace oracle {

using trimap::Point;
using VectorMap = std::function<Point(const Point&)>;

/// Dense Jacobian from Richardson-extrapolated central differences.
Eigen::MatrixXd fd_jacobian(const VectorMap& f, const Point& x, double h = 1e-3);

/// Eigenvalues of a dense matrix from a general (non-symmetric) solver, sorted by real part.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m);

trimap::Verdict verdict(const std::vector<std::complex<double>>& eig, double center_tol = 1e-8);

/// Coexistence condition evaluated term by term with plain arithmetic.
bool leslie_gower_coexists(const trimap::models::LeslieGowerParams& p);

/// Admissible Leslie-Gower parameters satisfying the coexistence condition:
/// mu, alpha in [1.2, 4], beta in [0.05, 0.95], K, L in [0.5, 3].
std::vector<trimap::models::LeslieGowerParams> leslie_gower_draws(std::size_t n, std::uint64_t seed);

/// Newton on f(x) - x with a finite-difference Jacobian.
std::optional<Point> newton_fixed_point(const VectorMap& f, Point x0, double tol = 1e-13, int max_iter = 100);

/// Sign of the discriminant of mu0^2 mu1 x^3 - 2 mu0^2 mu1 x^2 + (mu0^2 mu1 + mu0 mu1) x + 1 - mu0 mu1
/// for mu0 = a / 25, mu1 = b / 25, in exact integer arithmetic.
int logistic_cubic_discriminant_sign(int a, int b);

/// Roots of f(f(x)) = x for f(x) = mu x (1 - x) that are not fixed by f: the two
/// period-2 points (1 + mu +- sqrt((mu - 3)(mu + 1))) / (2 mu), mu > 3.
std::vector<double> logistic_period2_points(double mu);

}  // namespace oracle
