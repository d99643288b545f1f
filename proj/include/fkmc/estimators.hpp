#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fkmc/domains.hpp"
#include "fkmc/path_engine.hpp"

namespace fkmc {

using ScalarField = std::function<double(std::span<const double>)>;
using SpaceTimeField = std::function<double(double, std::span<const double>)>;

/// Right-hand side r of the fractional problem. An empty function means
/// r = 0. Time-dependent forcing r(t, x) is only valid for the parabolic
/// estimator and is evaluated at reversed grid times: the path integral at
/// t = m dt uses r((m - n) dt, X_{n dt}).
struct Forcing {
    SpaceTimeField fn;
    bool time_dependent = false;

    static Forcing zero() { return {}; }
    static Forcing stationary(ScalarField r);
    static Forcing transient(SpaceTimeField r);

    bool is_zero() const { return !fn; }
};

/// Dirichlet problem for the fractional Laplacian of order alpha on a
/// bounded domain: initial datum f (parabolic only), boundary datum g,
/// forcing r.
struct ProblemSpec {
    double alpha = 1.0;
    Domain domain = Domain::unit_box(1);
    ScalarField f;
    ScalarField g;
    Forcing r;
    /// Whether f extends continuously to g on the boundary. Recorded only;
    /// the estimator does not need it but convergence does.
    bool compatible = true;

    /// Throws InvalidParameter on alpha outside (0, 2) or missing g.
    void validate() const;
};

struct SimulationOptions {
    std::size_t n_paths = 1000;
    double dt = 1e-4;
    /// Step of the subordinator grid, which is also the grid of query times
    /// and of the path integral. 0 means equal to dt.
    double subordinator_dt = 0.0;
    std::uint64_t seed = 0;
    /// 0 means std::thread::hardware_concurrency().
    unsigned workers = 0;
    std::size_t max_steps = kDefaultMaxSteps;
    /// Paths simulated per batch; bounds the buffer of per-path
    /// contributions held before the ordered reduction.
    std::size_t batch_paths = 8192;

    double time_step() const { return subordinator_dt > 0.0 ? subordinator_dt : dt; }
};

/// Monte Carlo mean of per-path contributions at one query point.
struct PointEstimate {
    double value = 0.0;
    /// sample standard deviation / sqrt(n_paths).
    double std_error = 0.0;
    std::size_t n_paths = 0;
    double dt = 0.0;
    /// Query time; empty for elliptic estimates.
    std::optional<double> t;
    Point x;
};

/// Converts query times to grid step counts. Throws InvalidParameter if a
/// time is negative, not a multiple of dt, or the list is not sorted.
std::vector<std::size_t> time_steps(std::span<const double> times, double dt);

/// u(t, x) for every t in `times` (sorted multiples of dt). A query point
/// on the boundary returns g(x) exactly with zero standard error.
std::vector<PointEstimate> parabolic_estimate(const ProblemSpec& spec, std::span<const double> x,
                                              std::span<const double> times,
                                              const SimulationOptions& options);

/// Stationary solution u(x). f is ignored; r must be time independent.
PointEstimate elliptic_estimate(const ProblemSpec& spec, std::span<const double> x,
                                const SimulationOptions& options);

/// P{X_t stays in the domain}: the parabolic estimator with f = 1, g = 0,
/// r = 0.
std::vector<PointEstimate> survival_estimate(double alpha, const Domain& domain,
                                             std::span<const double> x,
                                             std::span<const double> times,
                                             const SimulationOptions& options);

/// Parabolic curve and elliptic value computed from one set of stored
/// paths. `elliptic` is empty when r is time dependent.
struct SolutionCurve {
    std::vector<PointEstimate> parabolic;
    std::optional<PointEstimate> elliptic;
};

SolutionCurve solve_point(const ProblemSpec& spec, std::span<const double> x,
                          std::span<const double> times, const SimulationOptions& options);

/// Raw per-path contributions, path-major: parabolic[p * times.size() + q].
/// absorption_step[p] is N, the step at which path p is absorbed.
struct PathContributions {
    std::size_t n_times = 0;
    std::vector<double> parabolic;
    std::vector<double> elliptic;
    std::vector<std::size_t> absorption_step;
};

PathContributions path_contributions(const ProblemSpec& spec, std::span<const double> x,
                                     std::span<const double> times,
                                     const SimulationOptions& options);

using ExactSolution = std::function<double(double t, std::span<const double> x)>;

/// A problem with a known reference solution evaluated at a fixed set of
/// query points, optionally over a time grid. An empty `times` selects the
/// elliptic estimator.
struct ConvergenceJob {
    ProblemSpec spec;
    ExactSolution exact;
    std::vector<Point> points;
    std::vector<double> times;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::size_t max_steps = kDefaultMaxSteps;
};

struct ConvergenceRow {
    std::size_t n_paths = 0;
    double dt = 0.0;
    double max_abs_error = 0.0;
    double rms_error = 0.0;
};

/// Error table over the Cartesian product dts x path_counts (dt outer).
/// Each cell draws from its own seed. Throws InvalidParameter when the job
/// has no reference solution.
std::vector<ConvergenceRow> convergence_sweep(const ConvergenceJob& job,
                                              std::span<const std::size_t> path_counts,
                                              std::span<const double> dts);

}  // namespace fkmc
