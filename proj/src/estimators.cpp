#include "fkmc/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

#include "fkmc/error.hpp"

namespace fkmc {

Forcing Forcing::stationary(ScalarField r)
{
    Forcing out;
    if (r) {
        out.fn = [r = std::move(r)](double, std::span<const double> x) { return r(x); };
    }
    return out;
}

Forcing Forcing::transient(SpaceTimeField r)
{
    Forcing out;
    out.fn = std::move(r);
    out.time_dependent = static_cast<bool>(out.fn);
    return out;
}

void ProblemSpec::validate() const
{
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw InvalidParameter("alpha must lie in (0,2), got " + std::to_string(alpha));
    }
    if (!g) {
        throw InvalidParameter("boundary datum g is required");
    }
}

std::vector<std::size_t> time_steps(std::span<const double> times, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InvalidParameter("dt must be positive, got " + std::to_string(dt));
    }
    std::vector<std::size_t> steps;
    steps.reserve(times.size());
    for (const double t : times) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw InvalidParameter("query time must be nonnegative, got " + std::to_string(t));
        }
        const double q = t / dt;
        const double m = std::round(q);
        if (std::abs(q - m) > 1e-8 * std::max(1.0, m)) {
            throw InvalidParameter("query time " + std::to_string(t) +
                                   " is not a multiple of dt");
        }
        if (!steps.empty() && static_cast<std::size_t>(m) < steps.back()) {
            throw InvalidParameter("query times must be sorted");
        }
        steps.push_back(static_cast<std::size_t>(m));
    }
    return steps;
}

namespace {

struct Welford {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x)
    {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }

    double std_error() const
    {
        if (n < 2) {
            return 0.0;
        }
        const double var = std::max(0.0, m2 / static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

unsigned resolve_workers(unsigned requested)
{
    if (requested != 0) {
        return requested;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void check_options(const SimulationOptions& options)
{
    if (options.n_paths == 0) {
        throw InvalidParameter("n_paths must be at least 1");
    }
    if (!(options.dt > 0.0) || !std::isfinite(options.dt)) {
        throw InvalidParameter("dt must be positive, got " + std::to_string(options.dt));
    }
    if (!(options.subordinator_dt >= 0.0) || !std::isfinite(options.subordinator_dt)) {
        throw InvalidParameter("subordinator_dt must be positive or 0");
    }
}

// Scratch buffers owned by one worker and reused across its paths.
struct PathScratch {
    StoppedPath stopped;
    SubordinatorPath sub;
    SubordinatedPath path;
};

// Evaluates one path's contribution at every query step (and optionally the
// elliptic functional) into `row` / `elliptic_out`. Returns N.
std::size_t evaluate_path(const ProblemSpec& spec, const PathScratch& s,
                          std::span<const std::size_t> steps, double dt, std::span<double> row,
                          double* elliptic_out)
{
    const SubordinatedPath& path = s.path;
    const std::size_t last = path.size() - 1;  // N
    const Forcing& r = spec.r;

    if (!r.time_dependent) {
        std::size_t k = 0;
        double sum = 0.0;
        auto advance_to = [&](std::size_t target) {
            if (r.is_zero()) {
                k = target;
                return;
            }
            while (k < target) {
                ++k;
                sum += r.fn(0.0, path.point(k));
            }
        };
        for (std::size_t q = 0; q < steps.size(); ++q) {
            const std::size_t m = steps[q];
            advance_to(std::min(m, last));
            const double integral = dt * sum;
            row[q] = path.alive_at(m) ? spec.f(path.point(m)) + integral
                                      : spec.g(path.point(last)) + integral;
        }
        if (elliptic_out != nullptr) {
            advance_to(last);
            *elliptic_out = spec.g(path.point(last)) + dt * sum;
        }
        return last;
    }

    for (std::size_t q = 0; q < steps.size(); ++q) {
        const std::size_t m = steps[q];
        const std::size_t upto = std::min(m, last);
        double sum = 0.0;
        for (std::size_t n = 1; n <= upto; ++n) {
            sum += r.fn(static_cast<double>(m - n) * dt, path.point(n));
        }
        const double integral = dt * sum;
        row[q] = path.alive_at(m) ? spec.f(path.point(m)) + integral
                                  : spec.g(path.point(last)) + integral;
    }
    return last;
}

// Simulates options.n_paths paths from x and hands each batch of per-path
// results to `consume(first_path, count, rows, elliptic, absorption)` in
// path-index order. Stream id of path p is p.
template <typename Consume>
void simulate(const ProblemSpec& spec, std::span<const double> x,
              std::span<const std::size_t> steps, bool want_elliptic,
              const SimulationOptions& options, Consume&& consume)
{
    const StableSampler sampler(StableParams::for_fractional_order(spec.alpha), options.time_step());
    const std::size_t n_times = steps.size();
    const std::size_t batch = std::max<std::size_t>(1, options.batch_paths);
    const unsigned workers = resolve_workers(options.workers);
    const bool parabolic_needs_f = n_times > 0;
    if (parabolic_needs_f && !spec.f) {
        throw InvalidParameter("initial datum f is required for the parabolic estimator");
    }

    std::vector<double> rows;
    std::vector<double> elliptic;
    std::vector<std::size_t> absorption;

    for (std::size_t first = 0; first < options.n_paths; first += batch) {
        const std::size_t count = std::min(batch, options.n_paths - first);
        rows.assign(count * n_times, 0.0);
        elliptic.assign(want_elliptic ? count : 0, 0.0);
        absorption.assign(count, 0);

        auto run_one = [&](PathScratch& s, std::size_t local) {
            RngStream rng(options.seed, first + local);
            generate_stopped_path(x, spec.domain, options.dt, rng, s.stopped, options.max_steps);
            generate_subordinator(sampler, s.stopped.exit_time_rounded, rng, s.sub);
            subordinate(s.stopped, s.sub, s.path);
            absorption[local] = evaluate_path(
                spec, s, steps, options.time_step(),
                std::span<double>(rows.data() + local * n_times, n_times),
                want_elliptic ? &elliptic[local] : nullptr);
        };

        const unsigned n_threads =
            static_cast<unsigned>(std::min<std::size_t>(workers, count));
        if (n_threads <= 1) {
            PathScratch s;
            for (std::size_t i = 0; i < count; ++i) {
                run_one(s, i);
            }
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<std::exception_ptr> errors(n_threads);
            std::vector<std::thread> pool;
            pool.reserve(n_threads);
            for (unsigned w = 0; w < n_threads; ++w) {
                pool.emplace_back([&, w] {
                    try {
                        PathScratch s;
                        constexpr std::size_t chunk = 16;
                        for (;;) {
                            const std::size_t begin = next.fetch_add(chunk);
                            if (begin >= count) {
                                break;
                            }
                            const std::size_t end = std::min(count, begin + chunk);
                            for (std::size_t i = begin; i < end; ++i) {
                                run_one(s, i);
                            }
                        }
                    } catch (...) {
                        errors[w] = std::current_exception();
                        next.store(count);
                    }
                });
            }
            for (auto& t : pool) {
                t.join();
            }
            for (const auto& e : errors) {
                if (e) {
                    std::rethrow_exception(e);
                }
            }
        }
        consume(first, count, std::as_const(rows), std::as_const(elliptic),
                std::as_const(absorption));
    }
}

enum class StartKind { interior, boundary };

StartKind classify_start(const ProblemSpec& spec, std::span<const double> x)
{
    if (spec.domain.contains(x)) {
        return StartKind::interior;
    }
    if (spec.domain.in_closure(x)) {
        return StartKind::boundary;
    }
    throw InvalidParameter("query point lies outside the closure of the domain");
}

PointEstimate make_estimate(const Welford& w, const SimulationOptions& options,
                            std::optional<double> t, std::span<const double> x)
{
    PointEstimate e;
    e.value = w.mean;
    e.std_error = w.std_error();
    e.n_paths = options.n_paths;
    e.dt = options.dt;
    e.t = t;
    e.x.assign(x.begin(), x.end());
    return e;
}

PointEstimate exact_estimate(double value, const SimulationOptions& options,
                             std::optional<double> t, std::span<const double> x)
{
    PointEstimate e;
    e.value = value;
    e.std_error = 0.0;
    e.n_paths = options.n_paths;
    e.dt = options.dt;
    e.t = t;
    e.x.assign(x.begin(), x.end());
    return e;
}

SolutionCurve solve(const ProblemSpec& spec, std::span<const double> x,
                    std::span<const double> times, const SimulationOptions& options,
                    bool want_elliptic)
{
    spec.validate();
    check_options(options);
    const std::vector<std::size_t> steps = time_steps(times, options.time_step());
    if (want_elliptic && spec.r.time_dependent) {
        throw InvalidParameter("elliptic estimator requires time-independent forcing");
    }

    SolutionCurve out;
    if (classify_start(spec, x) == StartKind::boundary) {
        const double gx = spec.g(x);
        for (const double t : times) {
            out.parabolic.push_back(exact_estimate(gx, options, t, x));
        }
        if (want_elliptic) {
            out.elliptic = exact_estimate(gx, options, std::nullopt, x);
        }
        return out;
    }

    std::vector<Welford> stats(steps.size());
    Welford elliptic_stats;
    simulate(spec, x, steps, want_elliptic, options,
             [&](std::size_t, std::size_t count, const std::vector<double>& rows,
                 const std::vector<double>& elliptic, const std::vector<std::size_t>&) {
                 for (std::size_t p = 0; p < count; ++p) {
                     for (std::size_t q = 0; q < steps.size(); ++q) {
                         stats[q].add(rows[p * steps.size() + q]);
                     }
                     if (want_elliptic) {
                         elliptic_stats.add(elliptic[p]);
                     }
                 }
             });
    for (std::size_t q = 0; q < steps.size(); ++q) {
        out.parabolic.push_back(make_estimate(stats[q], options, times[q], x));
    }
    if (want_elliptic) {
        out.elliptic = make_estimate(elliptic_stats, options, std::nullopt, x);
    }
    return out;
}

}  // namespace

std::vector<PointEstimate> parabolic_estimate(const ProblemSpec& spec, std::span<const double> x,
                                              std::span<const double> times,
                                              const SimulationOptions& options)
{
    return solve(spec, x, times, options, false).parabolic;
}

PointEstimate elliptic_estimate(const ProblemSpec& spec, std::span<const double> x,
                                const SimulationOptions& options)
{
    return *solve(spec, x, {}, options, true).elliptic;
}

std::vector<PointEstimate> survival_estimate(double alpha, const Domain& domain,
                                             std::span<const double> x,
                                             std::span<const double> times,
                                             const SimulationOptions& options)
{
    ProblemSpec spec;
    spec.alpha = alpha;
    spec.domain = domain;
    spec.f = [](std::span<const double>) { return 1.0; };
    spec.g = [](std::span<const double>) { return 0.0; };
    spec.compatible = false;
    return parabolic_estimate(spec, x, times, options);
}

SolutionCurve solve_point(const ProblemSpec& spec, std::span<const double> x,
                          std::span<const double> times, const SimulationOptions& options)
{
    return solve(spec, x, times, options, !spec.r.time_dependent);
}

PathContributions path_contributions(const ProblemSpec& spec, std::span<const double> x,
                                     std::span<const double> times,
                                     const SimulationOptions& options)
{
    spec.validate();
    check_options(options);
    const std::vector<std::size_t> steps = time_steps(times, options.time_step());
    if (classify_start(spec, x) != StartKind::interior) {
        throw InvalidParameter("path contributions need an interior starting point");
    }
    const bool want_elliptic = !spec.r.time_dependent;
    PathContributions out;
    out.n_times = steps.size();
    simulate(spec, x, steps, want_elliptic, options,
             [&](std::size_t, std::size_t, const std::vector<double>& rows,
                 const std::vector<double>& elliptic, const std::vector<std::size_t>& absorption) {
                 out.parabolic.insert(out.parabolic.end(), rows.begin(), rows.end());
                 out.elliptic.insert(out.elliptic.end(), elliptic.begin(), elliptic.end());
                 out.absorption_step.insert(out.absorption_step.end(), absorption.begin(),
                                            absorption.end());
             });
    return out;
}

std::vector<ConvergenceRow> convergence_sweep(const ConvergenceJob& job,
                                              std::span<const std::size_t> path_counts,
                                              std::span<const double> dts)
{
    if (!job.exact) {
        throw InvalidParameter("convergence sweep needs a reference solution");
    }
    if (job.points.empty()) {
        throw InvalidParameter("convergence sweep needs at least one query point");
    }
    const bool elliptic = job.times.empty();
    std::vector<ConvergenceRow> table;
    std::uint64_t cell = 0;
    for (const double dt : dts) {
        for (const std::size_t n : path_counts) {
            SimulationOptions options;
            options.n_paths = n;
            options.dt = dt;
            options.workers = job.workers;
            options.max_steps = job.max_steps;
            const std::uint64_t cell_seed = derive_seed(job.seed, cell++);

            double max_abs = 0.0;
            double sum_sq = 0.0;
            std::size_t count = 0;
            auto record = [&](double estimate, double exact) {
                const double err = std::abs(estimate - exact);
                max_abs = std::max(max_abs, err);
                sum_sq += err * err;
                ++count;
            };
            for (std::size_t i = 0; i < job.points.size(); ++i) {
                options.seed = derive_seed(cell_seed, i);
                const Point& x = job.points[i];
                if (elliptic) {
                    const PointEstimate e = elliptic_estimate(job.spec, x, options);
                    record(e.value, job.exact(0.0, x));
                } else {
                    for (const PointEstimate& e :
                         parabolic_estimate(job.spec, x, job.times, options)) {
                        record(e.value, job.exact(*e.t, x));
                    }
                }
            }
            table.push_back({n, dt, max_abs, std::sqrt(sum_sq / static_cast<double>(count))});
        }
    }
    return table;
}

}  // namespace fkmc
