#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fkmc/rng.hpp"

namespace fkmc {

/// Largest stability index accepted. Above it the scale
/// (cos(pi a / 2))^{1/a} collapses towards zero and the one-sided
/// parametrization degenerates.
inline constexpr double kMaxStabilityIndex = 0.995;

/// Parameters of the totally skewed stable law S_a(scale, 1, 0) in the
/// Samorodnitsky-Taqqu parametrization whose Laplace transform is
/// E[exp(-s S)] = exp(-s^a): the standard a-stable subordinator at unit time.
class StableParams {
public:
    /// Throws InvalidParameter unless 0 < a <= kMaxStabilityIndex.
    explicit StableParams(double a);

    /// Subordinator index a = alpha / 2 for a fractional order alpha in (0, 2).
    static StableParams for_fractional_order(double alpha);

    double a() const { return a_; }
    double skewness() const { return 1.0; }
    double scale() const { return scale_; }
    double center() const { return 0.0; }

private:
    double a_;
    double scale_;
};

/// Draws subordinator increments T(dt) = dt^{1/a} S with the
/// Chambers-Mallows-Stuck construction. Constants depending on (a, dt) are
/// folded once at construction; each draw consumes one uniform and one
/// exponential from the stream.
class StableSampler {
public:
    StableSampler(const StableParams& params, double dt);

    const StableParams& params() const { return params_; }
    double dt() const { return dt_; }

    /// Strictly positive increment.
    double operator()(RngStream& rng) const;

private:
    StableParams params_;
    double dt_;
    double inv_a_;
    double tail_exponent_;  // (1 - a) / a
    double shift_;          // B = atan(tan(pi a / 2)) / a
    double log_prefactor_;  // log(scale * S_{a,1}) + log(dt) / a
};

/// sqrt(2 dt) * Z with Z standard normal in `dim` dimensions: one step of
/// Brownian motion with generator Laplacian (variance 2 dt per coordinate).
std::vector<double> gaussian_increment(std::size_t dim, double dt, RngStream& rng);

/// In-place form used by the path generator: x += sqrt(2 dt) Z.
/// `step_scale` is sqrt(2 dt), precomputed by the caller.
inline void add_gaussian_increment(std::span<double> x, double step_scale, RngStream& rng)
{
    for (double& xi : x) {
        xi += step_scale * rng.normal();
    }
}

/// One increment of the standard subordinator over a step dt.
double stable_increment(const StableParams& params, double dt, RngStream& rng);

}  // namespace fkmc
