#include "fkmc/reference_solutions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <tuple>

#include <boost/math/quadrature/gauss.hpp>

#include "fkmc/error.hpp"

namespace fkmc {

namespace {

constexpr double kPi = std::numbers::pi;

void require_box(const Domain& box)
{
    if (!box.is_box()) {
        throw UnsupportedDomain("eigenpairs are available for boxes only, got " +
                                to_string(box.kind()));
    }
}

Point box_lengths(const Domain& box)
{
    Point len(box.dim());
    for (std::size_t i = 0; i < len.size(); ++i) {
        len[i] = box.upper()[i] - box.lower()[i];
    }
    return len;
}

double eigenvalue(std::span<const int> k, const Point& lengths)
{
    double lambda = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double w = k[i] * kPi / lengths[i];
        lambda += w * w;
    }
    return lambda;
}

BoxEigenpair make_pair(std::vector<int> k, const Domain& box, const Point& lengths)
{
    BoxEigenpair e;
    e.lambda = eigenvalue(k, lengths);
    e.k = std::move(k);
    e.lower = box.lower();
    e.lengths = lengths;
    return e;
}

bool lambda_less(const BoxEigenpair& a, const BoxEigenpair& b)
{
    return std::tie(a.lambda, a.k) < std::tie(b.lambda, b.k);
}

double box_volume(const Domain& box)
{
    double v = 1.0;
    for (const double l : box_lengths(box)) {
        v *= l;
    }
    return v;
}

}  // namespace

double BoxEigenpair::operator()(std::span<const double> x) const
{
    double v = 1.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        v *= std::sqrt(2.0 / lengths[i]) * std::sin(k[i] * kPi * (x[i] - lower[i]) / lengths[i]);
    }
    return v;
}

std::vector<BoxEigenpair> box_eigenpairs(const Domain& box, std::size_t count)
{
    require_box(box);
    if (count == 0) {
        throw InvalidParameter("number of eigenpairs must be at least 1");
    }
    const std::size_t d = box.dim();
    const Point lengths = box_lengths(box);

    // Enumerate k in [1, kmax]^d and grow kmax until every index outside the
    // search cube has a strictly larger eigenvalue than the count-th found.
    int kmax = 1;
    for (;;) {
        std::vector<BoxEigenpair> found;
        std::vector<int> k(d, 1);
        for (;;) {
            found.push_back(make_pair(k, box, lengths));
            std::size_t i = d;
            while (i > 0) {
                --i;
                if (++k[i] <= kmax) {
                    break;
                }
                k[i] = 1;
                if (i == 0) {
                    i = d + 1;
                    break;
                }
            }
            if (i == d + 1) {
                break;
            }
        }
        if (found.size() >= count) {
            std::nth_element(found.begin(), found.begin() + static_cast<long>(count - 1),
                             found.end(), lambda_less);
            const double cutoff = found[count - 1].lambda;
            double outside = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < d; ++i) {
                std::vector<int> probe(d, 1);
                probe[i] = kmax + 1;
                outside = std::min(outside, eigenvalue(probe, lengths));
            }
            if (cutoff < outside) {
                std::sort(found.begin(), found.end(), lambda_less);
                found.resize(count);
                return found;
            }
        }
        kmax = std::max(kmax + 1, kmax * 3 / 2);
    }
}

SeriesSolution series_from_modes(const Domain& box, double alpha,
                                 const std::vector<std::pair<std::vector<int>, double>>& modes)
{
    require_box(box);
    const Point lengths = box_lengths(box);
    SeriesSolution sol;
    sol.alpha = alpha;
    double norm_sq = 0.0;
    double max_lambda = 0.0;
    for (const auto& [k, c] : modes) {
        if (k.size() != box.dim() ||
            std::any_of(k.begin(), k.end(), [](int ki) { return ki < 1; })) {
            throw InvalidParameter("mode indices must be positive and match the dimension");
        }
        sol.modes.push_back(make_pair(k, box, lengths));
        sol.coefficients.push_back(c);
        norm_sq += c * c;
        max_lambda = std::max(max_lambda, sol.modes.back().lambda);
    }
    sol.initial_norm = std::sqrt(norm_sq);
    sol.tail_sq = 0.0;
    sol.next_lambda = max_lambda;
    return sol;
}

SeriesSolution constant_initial_series(const Domain& box, double alpha, std::size_t count,
                                       double value)
{
    require_box(box);
    std::vector<BoxEigenpair> pairs = box_eigenpairs(box, count + 1);
    SeriesSolution sol;
    sol.alpha = alpha;
    sol.next_lambda = pairs.back().lambda;
    pairs.pop_back();
    double captured = 0.0;
    for (const BoxEigenpair& e : pairs) {
        // (1, e_k) = prod_i sqrt(2 L_i) (1 - (-1)^{k_i}) / (k_i pi)
        double c = value;
        for (std::size_t i = 0; i < e.k.size(); ++i) {
            c *= e.k[i] % 2 == 0 ? 0.0 : std::sqrt(2.0 * e.lengths[i]) * 2.0 / (e.k[i] * kPi);
        }
        sol.coefficients.push_back(c);
        captured += c * c;
    }
    sol.modes = std::move(pairs);
    const double norm_sq = value * value * box_volume(box);
    sol.initial_norm = std::sqrt(norm_sq);
    sol.tail_sq = std::max(0.0, norm_sq - captured);
    return sol;
}

SeriesSolution projected_series(const Domain& box, double alpha, std::size_t count,
                                const ScalarField& w0, std::size_t panels)
{
    require_box(box);
    if (!w0 || panels == 0) {
        throw InvalidParameter("projection needs an initial datum and at least one panel");
    }
    using Rule = boost::math::quadrature::gauss<double, 20>;
    std::vector<double> ref_nodes;
    std::vector<double> ref_weights;
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        ref_nodes.push_back(abscissa[i]);
        ref_weights.push_back(weights[i]);
        if (abscissa[i] != 0.0) {
            ref_nodes.push_back(-abscissa[i]);
            ref_weights.push_back(weights[i]);
        }
    }

    const std::size_t d = box.dim();
    std::vector<std::vector<double>> nodes(d);
    std::vector<std::vector<double>> node_weights(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double h = (box.upper()[i] - box.lower()[i]) / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double mid = box.lower()[i] + (static_cast<double>(p) + 0.5) * h;
            for (std::size_t j = 0; j < ref_nodes.size(); ++j) {
                nodes[i].push_back(mid + 0.5 * h * ref_nodes[j]);
                node_weights[i].push_back(0.5 * h * ref_weights[j]);
            }
        }
    }

    std::vector<BoxEigenpair> pairs = box_eigenpairs(box, count + 1);
    SeriesSolution sol;
    sol.alpha = alpha;
    sol.next_lambda = pairs.back().lambda;
    pairs.pop_back();
    sol.coefficients.assign(pairs.size(), 0.0);

    // 1-D sine factors per coordinate and mode, evaluated at every node.
    const std::size_t per_dim = nodes[0].size();
    std::vector<std::size_t> idx(d, 0);
    Point x(d);
    double norm_sq = 0.0;
    for (;;) {
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            x[i] = nodes[i][idx[i]];
            w *= node_weights[i][idx[i]];
        }
        const double fx = w0(x);
        norm_sq += w * fx * fx;
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            sol.coefficients[j] += w * fx * pairs[j](x);
        }
        std::size_t i = d;
        while (i > 0) {
            --i;
            if (++idx[i] < per_dim) {
                break;
            }
            idx[i] = 0;
            if (i == 0) {
                i = d + 1;
                break;
            }
        }
        if (i == d + 1) {
            break;
        }
    }
    double captured = 0.0;
    for (const double c : sol.coefficients) {
        captured += c * c;
    }
    sol.modes = std::move(pairs);
    sol.initial_norm = std::sqrt(norm_sq);
    sol.tail_sq = std::max(0.0, norm_sq - captured);
    return sol;
}

double heat_series_eval(const SeriesSolution& sol, double t, std::span<const double> x)
{
    if (!(t >= 0.0)) {
        throw InvalidParameter("series evaluation needs t >= 0");
    }
    const double half_alpha = sol.alpha / 2.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < sol.modes.size(); ++j) {
        const double decay = std::exp(-t * std::pow(sol.modes[j].lambda, half_alpha));
        sum += decay * sol.coefficients[j] * sol.modes[j](x);
    }
    return sum;
}

double series_tail_bound(const SeriesSolution& sol, double t)
{
    if (sol.tail_sq == 0.0) {
        return 0.0;
    }
    return std::exp(-t * std::pow(sol.next_lambda, sol.alpha / 2.0)) * sol.initial_norm;
}

std::vector<std::string> benchmark_names()
{
    return {"square_parabolic", "square_elliptic", "cube_parabolic", "cube_elliptic"};
}

namespace {

double sin_product(std::span<const double> x, double freq)
{
    double v = 1.0;
    for (const double xi : x) {
        v *= std::sin(freq * kPi * xi);
    }
    return v;
}

Benchmark square_parabolic()
{
    const double alpha = std::sqrt(3.0);
    const double steady = 1.0 / std::pow(2.0 * kPi * kPi, alpha / 2.0);
    const double rate = std::pow(8.0 * kPi * kPi, alpha / 2.0);

    Benchmark b;
    b.name = "square_parabolic";
    b.alpha_expr = "sqrt(3)";
    b.spec.alpha = alpha;
    b.spec.domain = Domain::unit_box(2);
    b.spec.g = [](std::span<const double> x) { return x[1]; };
    b.spec.f = [=](std::span<const double> x) {
        return x[1] + steady * sin_product(x, 1.0) + sin_product(x, 2.0);
    };
    b.spec.r = Forcing::stationary([](std::span<const double> x) { return sin_product(x, 1.0); });
    b.exact = [=](double t, std::span<const double> x) {
        return x[1] + steady * sin_product(x, 1.0) + std::exp(-rate * t) * sin_product(x, 2.0);
    };
    return b;
}

Benchmark square_elliptic()
{
    const double alpha = std::sqrt(3.0);
    const double lambda = 4.0 * kPi * kPi + 9.0 * kPi * kPi;
    const double amplitude = 137.0 / std::pow(lambda, alpha / 2.0);
    auto mode = [](std::span<const double> x) {
        return std::sin(2.0 * kPi * x[0]) * std::sin(3.0 * kPi * x[1]);
    };

    Benchmark b;
    b.name = "square_elliptic";
    b.alpha_expr = "sqrt(3)";
    b.stationary = true;
    b.spec.alpha = alpha;
    b.spec.domain = Domain::unit_box(2);
    b.spec.g = [](std::span<const double> x) { return x[1]; };
    // Starting from the steady state makes the parabolic solution constant in t.
    b.spec.f = [=](std::span<const double> x) { return x[1] + amplitude * mode(x); };
    b.spec.r = Forcing::stationary([=](std::span<const double> x) { return 137.0 * mode(x); });
    b.exact = [=](double, std::span<const double> x) { return x[1] + amplitude * mode(x); };
    return b;
}

Benchmark cube_parabolic()
{
    const double alpha = std::sqrt(2.0);
    const double steady = 1.0 / std::pow(3.0 * kPi * kPi, alpha / 2.0);
    const double rate = std::pow(12.0 * kPi * kPi, alpha / 2.0);

    Benchmark b;
    b.name = "cube_parabolic";
    b.alpha_expr = "sqrt(2)";
    b.spec.alpha = alpha;
    b.spec.domain = Domain::unit_box(3);
    b.spec.g = [](std::span<const double>) { return 1.0; };
    b.spec.f = [=](std::span<const double> x) {
        return 1.0 + steady * sin_product(x, 1.0) + sin_product(x, 2.0);
    };
    b.spec.r = Forcing::stationary([](std::span<const double> x) { return sin_product(x, 1.0); });
    b.exact = [=](double t, std::span<const double> x) {
        return 1.0 + steady * sin_product(x, 1.0) + std::exp(-rate * t) * sin_product(x, 2.0);
    };
    return b;
}

Benchmark cube_elliptic()
{
    const double alpha = std::sqrt(2.0);
    const double steady = 1.0 / std::pow(3.0 * kPi * kPi, alpha / 2.0);

    Benchmark b;
    b.name = "cube_elliptic";
    b.alpha_expr = "sqrt(2)";
    b.stationary = true;
    b.spec.alpha = alpha;
    b.spec.domain = Domain::unit_box(3);
    b.spec.g = [](std::span<const double>) { return 1.0; };
    b.spec.f = [=](std::span<const double> x) { return 1.0 + steady * sin_product(x, 1.0); };
    b.spec.r = Forcing::stationary([](std::span<const double> x) { return sin_product(x, 1.0); });
    b.exact = [=](double, std::span<const double> x) {
        return 1.0 + steady * sin_product(x, 1.0);
    };
    return b;
}

}  // namespace

Benchmark benchmark_catalog(const std::string& name)
{
    if (name == "square_parabolic") {
        return square_parabolic();
    }
    if (name == "square_elliptic") {
        return square_elliptic();
    }
    if (name == "cube_parabolic") {
        return cube_parabolic();
    }
    if (name == "cube_elliptic") {
        return cube_elliptic();
    }
    throw LookupError("unknown benchmark '" + name + "'");
}

}  // namespace fkmc
