#include "fkmc/stable_sampling.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fkmc/error.hpp"

namespace fkmc {

StableParams::StableParams(double a) : a_(a)
{
    if (!(a > 0.0 && a <= kMaxStabilityIndex)) {
        throw InvalidParameter("stability index must lie in (0, " +
                               std::to_string(kMaxStabilityIndex) + "], got " +
                               std::to_string(a));
    }
    scale_ = std::pow(std::cos(std::numbers::pi * a / 2.0), 1.0 / a);
}

StableParams StableParams::for_fractional_order(double alpha)
{
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw InvalidParameter("alpha must lie in (0,2), got " + std::to_string(alpha));
    }
    return StableParams(alpha / 2.0);
}

StableSampler::StableSampler(const StableParams& params, double dt)
    : params_(params), dt_(dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("dt must be positive, got " + std::to_string(dt));
    }
    const double a = params.a();
    const double beta = params.skewness();
    const double t = beta * std::tan(std::numbers::pi * a / 2.0);
    inv_a_ = 1.0 / a;
    tail_exponent_ = (1.0 - a) / a;
    shift_ = std::atan(t) / a;
    const double log_s = std::log1p(t * t) / (2.0 * a);
    log_prefactor_ = std::log(params.scale()) + log_s + std::log(dt) / a;
}

double StableSampler::operator()(RngStream& rng) const
{
    const double a = params_.a();
    for (;;) {
        const double v = std::numbers::pi * (rng.uniform() - 0.5);
        const double w = rng.exponential();
        const double num = std::sin(a * (v + shift_));
        const double cos_v = std::cos(v);
        const double tail = std::cos(v - a * (v + shift_));
        // Rounding can push a factor to zero at the ends of (-pi/2, pi/2).
        if (!(num > 0.0 && cos_v > 0.0 && tail > 0.0 && w > 0.0)) {
            continue;
        }
        const double log_x = log_prefactor_ + std::log(num) - inv_a_ * std::log(cos_v) +
                             tail_exponent_ * (std::log(tail) - std::log(w));
        const double x = std::exp(log_x);
        if (x > 0.0 && std::isfinite(x)) {
            return x;
        }
        if (x == 0.0) {
            return std::numeric_limits<double>::min();
        }
    }
}

std::vector<double> gaussian_increment(std::size_t dim, double dt, RngStream& rng)
{
    if (dim == 0) {
        throw InvalidParameter("dimension must be at least 1");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("dt must be positive, got " + std::to_string(dt));
    }
    std::vector<double> z(dim, 0.0);
    add_gaussian_increment(z, std::sqrt(2.0 * dt), rng);
    return z;
}

double stable_increment(const StableParams& params, double dt, RngStream& rng)
{
    return StableSampler(params, dt)(rng);
}

}  // namespace fkmc
