#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fkmc/domains.hpp"
#include "fkmc/estimators.hpp"

namespace fkmc {

/// Dirichlet eigenpair of -Laplacian on an axis-aligned box:
///   lambda_k = sum_i (k_i pi / L_i)^2,
///   e_k(x)   = prod_i sqrt(2 / L_i) sin(k_i pi (x_i - a_i) / L_i).
struct BoxEigenpair {
    std::vector<int> k;
    double lambda = 0.0;
    Point lower;
    Point lengths;

    double operator()(std::span<const double> x) const;
};

/// The J smallest eigenpairs, ascending in lambda, ties broken
/// lexicographically on k. Throws UnsupportedDomain for non-box domains.
std::vector<BoxEigenpair> box_eigenpairs(const Domain& box, std::size_t count);

/// Truncated eigen-expansion of the fractional heat semigroup
///   w(t, x) = sum_j exp(-t lambda_j^{alpha/2}) c_j e_j(x).
struct SeriesSolution {
    double alpha = 1.0;
    std::vector<BoxEigenpair> modes;
    std::vector<double> coefficients;
    /// lambda_{J+1}, the first neglected eigenvalue.
    double next_lambda = 0.0;
    /// ||w_0||_{L^2}.
    double initial_norm = 0.0;
    /// sum_{j > J} c_j^2 (Parseval remainder).
    double tail_sq = 0.0;

    std::size_t truncation() const { return modes.size(); }
};

/// Series for an initial datum given by finitely many explicit modes.
SeriesSolution series_from_modes(const Domain& box, double alpha,
                                 const std::vector<std::pair<std::vector<int>, double>>& modes);

/// w_0 = value on the whole box; coefficients are analytic.
SeriesSolution constant_initial_series(const Domain& box, double alpha, std::size_t count,
                                       double value = 1.0);

/// Coefficients of an arbitrary w_0 by tensor Gauss-Legendre quadrature
/// with `panels` panels of 20 nodes per coordinate.
SeriesSolution projected_series(const Domain& box, double alpha, std::size_t count,
                                const ScalarField& w0, std::size_t panels = 16);

double heat_series_eval(const SeriesSolution& sol, double t, std::span<const double> x);

/// L^2 bound exp(-t lambda_{J+1}^{alpha/2}) ||w_0|| on the neglected tail.
double series_tail_bound(const SeriesSolution& sol, double t);

/// One of the four unit-square / unit-cube problems with closed-form
/// solutions built from a harmonic lift plus finitely many eigenmodes.
struct Benchmark {
    std::string name;
    /// Exponent as written, e.g. "sqrt(3)".
    std::string alpha_expr;
    ProblemSpec spec;
    ExactSolution exact;
    bool stationary = false;
};

/// square_parabolic, square_elliptic, cube_parabolic, cube_elliptic.
std::vector<std::string> benchmark_names();

/// Throws LookupError for an unknown name.
Benchmark benchmark_catalog(const std::string& name);

}  // namespace fkmc
