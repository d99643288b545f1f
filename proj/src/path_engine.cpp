#include "fkmc/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "fkmc/error.hpp"

namespace fkmc {

std::size_t grid_ceil(double value, double dt)
{
    const double q = value / dt;
    const double nearest = std::round(q);
    if (std::abs(q - nearest) <= 1e-9 * std::max(1.0, nearest)) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::ceil(q));
}

void generate_stopped_path(std::span<const double> x0, const Domain& domain, double dt,
                           RngStream& rng, StoppedPath& out, std::size_t max_steps)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("dt must be positive, got " + std::to_string(dt));
    }
    if (!domain.contains(x0)) {
        throw InvalidParameter("stopped path must start at an interior point");
    }
    const std::size_t dim = x0.size();
    const double step_scale = std::sqrt(2.0 * dt);

    out.dt = dt;
    out.dim = dim;
    out.exited = false;
    out.positions.clear();
    out.positions.insert(out.positions.end(), x0.begin(), x0.end());

    std::vector<double> x(x0.begin(), x0.end());
    std::size_t steps = 0;
    for (;;) {
        if (steps == max_steps) {
            throw RunawayPath("stopped path exceeded " + std::to_string(max_steps) + " steps");
        }
        add_gaussian_increment(x, step_scale, rng);
        ++steps;
        if (!domain.contains_unchecked(x)) {
            break;
        }
        out.positions.insert(out.positions.end(), x.begin(), x.end());
    }

    const std::size_t last = out.positions.size();
    out.positions.resize(last + dim);
    std::span<const double> previous{out.positions.data() + last - dim, dim};
    domain.project_to_boundary_into(x, previous, {out.positions.data() + last, dim});
    out.exit_time_rounded = static_cast<double>(steps) * dt;
    out.exited = true;
}

StoppedPath generate_stopped_path(std::span<const double> x0, const Domain& domain, double dt,
                                  RngStream& rng, std::size_t max_steps)
{
    StoppedPath path;
    generate_stopped_path(x0, domain, dt, rng, path, max_steps);
    return path;
}

void generate_subordinator(const StableSampler& sampler, double tau_rounded, RngStream& rng,
                           SubordinatorPath& out)
{
    if (!(tau_rounded > 0.0) || !std::isfinite(tau_rounded)) {
        throw InvalidParameter("subordinator truncation time must be positive");
    }
    out.dt = sampler.dt();
    out.values.clear();
    out.values.push_back(0.0);
    double t = 0.0;
    for (;;) {
        t += sampler(rng);
        if (t >= tau_rounded) {
            out.values.push_back(tau_rounded);
            return;
        }
        out.values.push_back(t);
    }
}

SubordinatorPath generate_subordinator(double a, double tau_rounded, double dt, RngStream& rng)
{
    const StableSampler sampler(StableParams(a), dt);
    SubordinatorPath out;
    generate_subordinator(sampler, tau_rounded, rng, out);
    return out;
}

void subordinate(const StoppedPath& stopped, const SubordinatorPath& sub, SubordinatedPath& out)
{
    if (stopped.size() == 0 || sub.values.empty()) {
        throw InvalidParameter("subordinate: empty path");
    }
    const std::size_t last = stopped.steps();
    const std::size_t dim = stopped.dim;
    const std::size_t n = sub.values.size();

    out.dt = sub.dt;
    out.dim = dim;
    out.indices.resize(n);
    out.alive_flags.resize(n);
    out.positions.resize(n * dim);
    for (std::size_t i = 0; i < n; ++i) {
        const double value = sub.values[i];
        const std::size_t index = std::min(grid_ceil(value, stopped.dt), last);
        out.indices[i] = index;
        out.alive_flags[i] = value < stopped.exit_time_rounded ? 1 : 0;
        std::copy_n(stopped.positions.data() + index * dim, dim, out.positions.data() + i * dim);
    }
}

SubordinatedPath subordinate(const StoppedPath& stopped, const SubordinatorPath& sub)
{
    SubordinatedPath out;
    subordinate(stopped, sub, out);
    return out;
}

void write_path_csv(std::ostream& os, const StoppedPath& stopped, const SubordinatorPath& sub,
                    const SubordinatedPath& path)
{
    os << "n,t,T,index,alive";
    for (std::size_t i = 0; i < stopped.dim; ++i) {
        os << ",x" << i;
    }
    os << '\n' << std::setprecision(17);
    for (std::size_t n = 0; n < path.size(); ++n) {
        os << n << ',' << static_cast<double>(n) * path.dt << ',' << sub.values[n] << ','
           << path.indices[n] << ',' << int(path.alive_flags[n]);
        for (const double v : path.point(n)) {
            os << ',' << v;
        }
        os << '\n';
    }
}

}  // namespace fkmc
