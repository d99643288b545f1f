#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fkmc/domains.hpp"
#include "fkmc/rng.hpp"
#include "fkmc/stable_sampling.hpp"

namespace fkmc {

inline constexpr std::size_t kDefaultMaxSteps = 1'000'000'000;

/// Discrete Brownian path (generator Laplacian) sampled every dt and
/// stopped at the first exterior sample, which is replaced by its boundary
/// projection. Positions are stored row-major, `dim` values per sample.
struct StoppedPath {
    double dt = 0.0;
    std::size_t dim = 0;
    std::vector<double> positions;
    /// ceil(tau)_dt = steps() * dt.
    double exit_time_rounded = 0.0;
    bool exited = false;

    std::size_t size() const { return dim == 0 ? 0 : positions.size() / dim; }
    std::size_t steps() const { return size() - 1; }
    std::span<const double> point(std::size_t i) const { return {positions.data() + i * dim, dim}; }
    std::span<const double> exit_point() const { return point(steps()); }
};

/// Standard subordinator sampled every dt from T(0) = 0 and truncated at the
/// Brownian exit time: the first value >= tau is replaced by tau.
struct SubordinatorPath {
    double dt = 0.0;
    std::vector<double> values;

    /// N with ceil(T^{-1}(tau))_dt = N dt.
    std::size_t n_steps() const { return values.empty() ? 0 : values.size() - 1; }
};

/// Stopped path evaluated at the rounded subordinator times:
/// positions[n] = stopped.positions[ceil(T(n h))_dt / dt], with h the
/// subordinator step and dt the Brownian step. `dt` below is h.
struct SubordinatedPath {
    double dt = 0.0;
    std::size_t dim = 0;
    std::vector<std::size_t> indices;
    std::vector<double> positions;
    /// alive_flags[n] = (T(n dt) < tau); false only at the last step.
    std::vector<std::uint8_t> alive_flags;

    std::size_t size() const { return indices.size(); }
    std::span<const double> point(std::size_t n) const { return {positions.data() + n * dim, dim}; }
    /// Steps past the end are absorbed at the exit point.
    bool alive_at(std::size_t n) const { return n < alive_flags.size() && alive_flags[n] != 0; }
};

StoppedPath generate_stopped_path(std::span<const double> x0, const Domain& domain, double dt,
                                  RngStream& rng, std::size_t max_steps = kDefaultMaxSteps);

/// Same as above, reusing the storage of `out`.
void generate_stopped_path(std::span<const double> x0, const Domain& domain, double dt,
                           RngStream& rng, StoppedPath& out,
                           std::size_t max_steps = kDefaultMaxSteps);

SubordinatorPath generate_subordinator(double a, double tau_rounded, double dt, RngStream& rng);

void generate_subordinator(const StableSampler& sampler, double tau_rounded, RngStream& rng,
                           SubordinatorPath& out);

SubordinatedPath subordinate(const StoppedPath& stopped, const SubordinatorPath& sub);

void subordinate(const StoppedPath& stopped, const SubordinatorPath& sub, SubordinatedPath& out);

/// ceil(value / dt), snapping to the nearest integer when the quotient is
/// within 1e-9 (relative) of it, so exact grid times n*dt map to n.
std::size_t grid_ceil(double value, double dt);

/// Debug dump, one row per subordinated step:
/// n,t,T,index,alive,x0..x{d-1}. Not a stable format.
void write_path_csv(std::ostream& os, const StoppedPath& stopped, const SubordinatorPath& sub,
                    const SubordinatedPath& path);

}  // namespace fkmc
