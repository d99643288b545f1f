#include "fkmc/domains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "fkmc/error.hpp"

namespace fkmc {

std::string to_string(DomainKind kind)
{
    switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::box: return "box";
    case DomainKind::ball: return "ball";
    case DomainKind::predicate: return "predicate";
    }
    return "unknown";
}

namespace {

void check_bounds(const Point& lower, const Point& upper)
{
    if (lower.empty() || lower.size() != upper.size()) {
        throw InvalidParameter("box bounds must be nonempty and of equal dimension");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i]) || !std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
            throw InvalidParameter("box bounds must satisfy lower < upper in every coordinate");
        }
    }
}

}  // namespace

Domain Domain::interval(double lower, double upper)
{
    Domain d = box({lower}, {upper});
    d.kind_ = DomainKind::interval;
    return d;
}

Domain Domain::box(Point lower, Point upper)
{
    check_bounds(lower, upper);
    Domain d;
    d.kind_ = lower.size() == 1 ? DomainKind::interval : DomainKind::box;
    d.center_.resize(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        d.center_[i] = 0.5 * (lower[i] + upper[i]);
    }
    d.lower_ = std::move(lower);
    d.upper_ = std::move(upper);
    return d;
}

Domain Domain::unit_box(std::size_t dim)
{
    return box(Point(dim, 0.0), Point(dim, 1.0));
}

Domain Domain::ball(Point center, double radius)
{
    if (center.empty()) {
        throw InvalidParameter("ball center must have at least one coordinate");
    }
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw InvalidParameter("ball radius must be positive");
    }
    Domain d;
    d.kind_ = DomainKind::ball;
    d.lower_.resize(center.size());
    d.upper_.resize(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        d.lower_[i] = center[i] - radius;
        d.upper_[i] = center[i] + radius;
    }
    d.center_ = std::move(center);
    d.radius_ = radius;
    return d;
}

Domain Domain::predicate(Membership inside, Point lower, Point upper)
{
    if (!inside) {
        throw InvalidParameter("predicate domain needs a membership function");
    }
    check_bounds(lower, upper);
    Domain d;
    d.kind_ = DomainKind::predicate;
    d.center_.resize(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
        d.center_[i] = 0.5 * (lower[i] + upper[i]);
    }
    d.lower_ = std::move(lower);
    d.upper_ = std::move(upper);
    d.inside_ = std::move(inside);
    return d;
}

double Domain::diameter() const
{
    if (kind_ == DomainKind::ball) {
        return 2.0 * radius_;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        const double w = upper_[i] - lower_[i];
        s += w * w;
    }
    return std::sqrt(s);
}

void Domain::check_dim(std::span<const double> x, const char* what) const
{
    if (x.size() != dim()) {
        throw InvalidParameter(std::string(what) + ": point has dimension " +
                               std::to_string(x.size()) + ", domain has " +
                               std::to_string(dim()));
    }
}

bool Domain::contains(std::span<const double> x) const
{
    check_dim(x, "contains");
    return contains_unchecked(x);
}

bool Domain::in_closure(std::span<const double> x) const
{
    check_dim(x, "in_closure");
    switch (kind_) {
    case DomainKind::interval:
    case DomainKind::box:
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) {
                return false;
            }
        }
        return true;
    case DomainKind::ball: {
        double r2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - center_[i];
            r2 += d * d;
        }
        return std::sqrt(r2) <= radius_ * (1.0 + 1e-12);
    }
    case DomainKind::predicate: {
        if (inside_(x)) {
            return true;
        }
        const double h = 1e-9 * diameter();
        Point probe(x.begin(), x.end());
        for (std::size_t i = 0; i < probe.size(); ++i) {
            for (const double sign : {-1.0, 1.0}) {
                probe[i] = x[i] + sign * h;
                if (inside_(probe)) {
                    return true;
                }
            }
            probe[i] = x[i];
        }
        return false;
    }
    }
    return false;
}

void Domain::project_to_boundary_into(std::span<const double> x,
                                      std::span<const double> last_interior,
                                      std::span<double> out) const
{
    switch (kind_) {
    case DomainKind::interval:
    case DomainKind::box:
        for (std::size_t i = 0; i < x.size(); ++i) {
            out[i] = std::clamp(x[i], lower_[i], upper_[i]);
        }
        return;
    case DomainKind::ball: {
        double norm = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - center_[i];
            norm += d * d;
        }
        norm = std::sqrt(norm);
        double factor = radius_ / norm;
        for (;;) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                out[i] = center_[i] + factor * (x[i] - center_[i]);
                const double d = out[i] - center_[i];
                r2 += d * d;
            }
            // Keep the result out of the open ball after rounding.
            if (!(r2 < radius_ * radius_)) {
                return;
            }
            factor = std::nextafter(factor, std::numeric_limits<double>::infinity());
        }
    }
    case DomainKind::predicate: {
        if (last_interior.size() != x.size()) {
            throw InvalidParameter("predicate projection needs the last interior position");
        }
        Point inner(last_interior.begin(), last_interior.end());
        Point outer(x.begin(), x.end());
        Point mid(x.size());
        const double tol = 1e-10 * diameter();
        for (int iter = 0; iter < 200; ++iter) {
            double gap = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = outer[i] - inner[i];
                gap += d * d;
            }
            if (std::sqrt(gap) <= tol) {
                break;
            }
            for (std::size_t i = 0; i < x.size(); ++i) {
                mid[i] = 0.5 * (inner[i] + outer[i]);
            }
            (inside_(mid) ? inner : outer).swap(mid);
        }
        std::copy(outer.begin(), outer.end(), out.begin());
        return;
    }
    }
}

Point Domain::project_to_boundary(std::span<const double> x_exterior,
                                  std::optional<std::span<const double>> last_interior) const
{
    check_dim(x_exterior, "project_to_boundary");
    if (contains_unchecked(x_exterior)) {
        throw ContractViolation("project_to_boundary: point is interior");
    }
    std::span<const double> anchor;
    if (last_interior) {
        check_dim(*last_interior, "project_to_boundary");
        anchor = *last_interior;
    }
    Point out(dim());
    project_to_boundary_into(x_exterior, anchor, out);
    return out;
}

}  // namespace fkmc
