#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fkmc {

using Point = std::vector<double>;

enum class DomainKind { interval, box, ball, predicate };

std::string to_string(DomainKind kind);

/// An open, bounded, nonempty region of R^d.
///
/// Immutable after construction. Boxes and balls project exterior points to
/// their Euclidean nearest boundary point. A predicate domain only knows
/// membership, so its projection bisects the segment between the last
/// interior position and the exterior one.
class Domain {
public:
    using Membership = std::function<bool(std::span<const double>)>;

    static Domain interval(double lower, double upper);
    static Domain box(Point lower, Point upper);
    static Domain unit_box(std::size_t dim);
    static Domain ball(Point center, double radius);
    /// `inside` must describe an open set contained in [lower, upper].
    static Domain predicate(Membership inside, Point lower, Point upper);

    DomainKind kind() const { return kind_; }
    std::size_t dim() const { return lower_.size(); }
    bool is_box() const { return kind_ == DomainKind::interval || kind_ == DomainKind::box; }

    /// Bounding box (exact for interval/box).
    const Point& lower() const { return lower_; }
    const Point& upper() const { return upper_; }
    const Point& center() const { return center_; }
    double radius() const { return radius_; }
    double diameter() const;

    /// True iff x lies in the open set. Throws InvalidParameter on a
    /// dimension mismatch.
    bool contains(std::span<const double> x) const;

    /// Membership without the dimension check, for the path generator.
    bool contains_unchecked(std::span<const double> x) const
    {
        switch (kind_) {
        case DomainKind::interval:
        case DomainKind::box:
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (!(x[i] > lower_[i] && x[i] < upper_[i])) {
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
            return r2 < radius_ * radius_;
        }
        case DomainKind::predicate:
            return inside_(x);
        }
        return false;
    }

    /// Interior or boundary. Exact for box and ball; for predicate domains a
    /// non-member counts as boundary when a member lies within 1e-9 * diam
    /// along some coordinate axis.
    bool in_closure(std::span<const double> x) const;

    bool on_boundary(std::span<const double> x) const { return !contains(x) && in_closure(x); }

    /// Boundary point used to stop a path that has left the domain.
    ///
    /// Box: component-wise clamping (the Euclidean nearest point, ties at
    /// corners resolved deterministically). Ball: radial projection.
    /// Predicate: bisection on [last_interior, x_exterior] to 1e-10 * diam,
    /// returning the exterior end; `last_interior` is required.
    /// Throws ContractViolation if x_exterior is interior.
    Point project_to_boundary(std::span<const double> x_exterior,
                              std::optional<std::span<const double>> last_interior = {}) const;

    /// Writes the projection into `out` (size dim) without allocating.
    void project_to_boundary_into(std::span<const double> x_exterior,
                                  std::span<const double> last_interior,
                                  std::span<double> out) const;

private:
    Domain() = default;
    void check_dim(std::span<const double> x, const char* what) const;

    DomainKind kind_ = DomainKind::box;
    Point lower_;
    Point upper_;
    Point center_;
    double radius_ = 0.0;
    Membership inside_;
};

}  // namespace fkmc
