#include "fkmc/job.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fkmc/error.hpp"
#include "fkmc/reference_solutions.hpp"
#include "fkmc/stable_sampling.hpp"

namespace fkmc {

using nlohmann::json;

std::string to_string(EstimatorMode mode)
{
    switch (mode) {
    case EstimatorMode::parabolic: return "parabolic";
    case EstimatorMode::elliptic: return "elliptic";
    case EstimatorMode::survival: return "survival";
    }
    return "unknown";
}

std::string format_real(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& what)
{
    throw ConfigError(field + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::string& field,
                         std::initializer_list<const char*> allowed)
{
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!keys.contains(key)) {
            config_fail(field.empty() ? key : field + "." + key, "unknown key");
        }
    }
}

double get_real(const json& v, const std::string& field)
{
    if (!v.is_number()) {
        config_fail(field, "expected a number");
    }
    return v.get<double>();
}

std::uint64_t get_count(const json& v, const std::string& field)
{
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) {
            return static_cast<std::uint64_t>(d);
        }
    }
    config_fail(field, "expected a nonnegative integer");
}

Point get_point(const json& v, const std::string& field)
{
    if (v.is_number()) {
        return {v.get<double>()};
    }
    if (!v.is_array()) {
        config_fail(field, "expected a coordinate array");
    }
    Point p;
    for (std::size_t i = 0; i < v.size(); ++i) {
        p.push_back(get_real(v[i], field + "[" + std::to_string(i) + "]"));
    }
    return p;
}

DomainConfig parse_domain(const json& v, const std::string& field)
{
    if (!v.is_object()) {
        config_fail(field, "expected an object");
    }
    reject_unknown_keys(v, field, {"kind", "lower", "upper", "center", "radius"});
    DomainConfig d;
    if (v.contains("kind")) {
        if (!v["kind"].is_string()) {
            config_fail(field + ".kind", "expected a string");
        }
        d.kind = v["kind"].get<std::string>();
    }
    if (v.contains("lower")) {
        d.lower = get_point(v["lower"], field + ".lower");
    }
    if (v.contains("upper")) {
        d.upper = get_point(v["upper"], field + ".upper");
    }
    if (v.contains("center")) {
        d.center = get_point(v["center"], field + ".center");
    }
    if (v.contains("radius")) {
        d.radius = get_real(v["radius"], field + ".radius");
    }
    return d;
}

ProblemConfig parse_problem(const json& v)
{
    ProblemConfig p;
    if (v.is_string()) {
        p.catalog = v.get<std::string>();
        return p;
    }
    if (!v.is_object()) {
        config_fail("problem", "expected a benchmark name or an inline problem object");
    }
    reject_unknown_keys(v, "problem", {"kind", "alpha", "domain", "value", "mode", "series_modes"});
    if (!v.contains("kind") || !v["kind"].is_string()) {
        config_fail("problem.kind", "required string");
    }
    p.kind = v["kind"].get<std::string>();
    if (!v.contains("alpha")) {
        config_fail("problem.alpha", "required");
    }
    p.alpha = get_real(v["alpha"], "problem.alpha");
    if (!v.contains("domain")) {
        config_fail("problem.domain", "required");
    }
    p.domain = parse_domain(v["domain"], "problem.domain");
    if (v.contains("value")) {
        p.value = get_real(v["value"], "problem.value");
    }
    if (v.contains("mode")) {
        if (!v["mode"].is_array()) {
            config_fail("problem.mode", "expected an array of mode indices");
        }
        for (std::size_t i = 0; i < v["mode"].size(); ++i) {
            const json& k = v["mode"][i];
            if (!k.is_number_integer()) {
                config_fail("problem.mode[" + std::to_string(i) + "]", "expected an integer");
            }
            p.mode.push_back(k.get<int>());
        }
    }
    if (v.contains("series_modes")) {
        p.series_modes = get_count(v["series_modes"], "problem.series_modes");
    }
    return p;
}

std::optional<Domain> build_domain(const DomainConfig& d, std::vector<std::string>* violations)
{
    try {
        if (d.kind == "interval") {
            if (d.lower.size() != 1 || d.upper.size() != 1) {
                throw InvalidParameter("interval needs scalar lower and upper");
            }
            return Domain::interval(d.lower[0], d.upper[0]);
        }
        if (d.kind == "box") {
            return Domain::box(d.lower, d.upper);
        }
        if (d.kind == "ball") {
            return Domain::ball(d.center, d.radius);
        }
        throw InvalidParameter("unknown domain kind '" + d.kind + "'");
    } catch (const Error& e) {
        if (violations == nullptr) {
            throw ConfigError(std::string("problem.domain: ") + e.what());
        }
        violations->push_back(std::string("problem.domain: ") + e.what());
        return std::nullopt;
    }
}

EstimatorMode default_mode(const ProblemConfig& p)
{
    if (p.catalog.ends_with("_elliptic")) {
        return EstimatorMode::elliptic;
    }
    if (p.kind == "survival") {
        return EstimatorMode::survival;
    }
    return EstimatorMode::parabolic;
}

}  // namespace

JobConfig parse_job_config(std::string_view text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("job file: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        config_fail("job file", "top level must be an object");
    }
    reject_unknown_keys(root, "", {"name", "problem", "mode", "points", "line", "times",
                                   "n_paths", "dt", "subordinator_dt", "seed", "workers", "max_steps", "output"});

    JobConfig c;
    if (root.contains("name")) {
        c.name = root["name"].is_string() ? root["name"].get<std::string>() : root["name"].dump();
    }
    if (!root.contains("problem")) {
        config_fail("problem", "required");
    }
    c.problem = parse_problem(root["problem"]);

    if (root.contains("mode")) {
        const json& m = root["mode"];
        const std::string s = m.is_string() ? m.get<std::string>() : "";
        if (s == "parabolic") {
            c.mode = EstimatorMode::parabolic;
        } else if (s == "elliptic") {
            c.mode = EstimatorMode::elliptic;
        } else if (s == "survival") {
            c.mode = EstimatorMode::survival;
        } else {
            config_fail("mode", "expected one of parabolic, elliptic, survival");
        }
    }

    if (root.contains("points")) {
        const json& pts = root["points"];
        if (!pts.is_array()) {
            config_fail("points", "expected an array of points");
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            c.points.push_back(get_point(pts[i], "points[" + std::to_string(i) + "]"));
        }
    }
    if (root.contains("line")) {
        const json& line = root["line"];
        if (!line.is_object()) {
            config_fail("line", "expected an object with from, to, count");
        }
        reject_unknown_keys(line, "line", {"from", "to", "count"});
        if (!line.contains("from") || !line.contains("to") || !line.contains("count")) {
            config_fail("line", "from, to and count are required");
        }
        const Point from = get_point(line["from"], "line.from");
        const Point to = get_point(line["to"], "line.to");
        const std::uint64_t count = get_count(line["count"], "line.count");
        if (from.size() != to.size()) {
            config_fail("line", "from and to differ in dimension");
        }
        for (std::uint64_t k = 0; k < count; ++k) {
            const double s = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
            Point p(from.size());
            for (std::size_t i = 0; i < p.size(); ++i) {
                p[i] = from[i] + s * (to[i] - from[i]);
            }
            c.points.push_back(std::move(p));
        }
    }

    if (root.contains("times")) {
        const json& t = root["times"];
        if (t.is_array()) {
            for (std::size_t i = 0; i < t.size(); ++i) {
                c.times.push_back(get_real(t[i], "times[" + std::to_string(i) + "]"));
            }
        } else if (t.is_object()) {
            reject_unknown_keys(t, "times", {"start", "stop", "step"});
            if (!t.contains("stop") || !t.contains("step")) {
                config_fail("times", "stop and step are required");
            }
            const double start = t.contains("start") ? get_real(t["start"], "times.start") : 0.0;
            const double stop = get_real(t["stop"], "times.stop");
            const double step = get_real(t["step"], "times.step");
            if (!(step > 0.0) || stop < start) {
                config_fail("times", "need step > 0 and stop >= start");
            }
            const auto n = static_cast<std::size_t>(std::llround((stop - start) / step));
            for (std::size_t k = 0; k <= n; ++k) {
                c.times.push_back(start + static_cast<double>(k) * step);
            }
        } else {
            config_fail("times", "expected an array or {start, stop, step}");
        }
    }

    if (root.contains("n_paths")) {
        c.n_paths = get_count(root["n_paths"], "n_paths");
    }
    if (root.contains("dt")) {
        c.dt = get_real(root["dt"], "dt");
    }
    if (root.contains("subordinator_dt")) {
        c.subordinator_dt = get_real(root["subordinator_dt"], "subordinator_dt");
    }
    if (root.contains("seed")) {
        c.seed = get_count(root["seed"], "seed");
    }
    if (root.contains("workers")) {
        c.workers = static_cast<unsigned>(get_count(root["workers"], "workers"));
    }
    if (root.contains("max_steps")) {
        c.max_steps = get_count(root["max_steps"], "max_steps");
    }
    if (root.contains("output")) {
        const json& o = root["output"];
        if (!o.is_object()) {
            config_fail("output", "expected an object with path and format");
        }
        reject_unknown_keys(o, "output", {"path", "format"});
        if (o.contains("path")) {
            if (!o["path"].is_string()) {
                config_fail("output.path", "expected a string");
            }
            c.output_path = o["path"].get<std::string>();
        }
        if (o.contains("format")) {
            const std::string f = o["format"].is_string() ? o["format"].get<std::string>() : "";
            if (f == "csv") {
                c.format = OutputFormat::csv;
            } else if (f == "jsonl") {
                c.format = OutputFormat::jsonl;
            } else {
                config_fail("output.format", "expected csv or jsonl");
            }
        }
    }
    return c;
}

JobConfig load_job_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("job file: cannot open " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_job_config(text.str());
}

std::vector<std::string> validate_config(const JobConfig& config)
{
    std::vector<std::string> v;

    std::optional<Domain> domain;
    double alpha = config.problem.alpha;
    if (!config.problem.catalog.empty()) {
        try {
            const Benchmark b = benchmark_catalog(config.problem.catalog);
            domain = b.spec.domain;
            alpha = b.spec.alpha;
        } catch (const LookupError& e) {
            v.push_back(std::string("problem: ") + e.what());
        }
    } else {
        const std::string& kind = config.problem.kind;
        if (kind != "constant" && kind != "eigenmode" && kind != "survival") {
            v.push_back("problem.kind: expected constant, eigenmode or survival, got '" + kind + "'");
        }
        domain = build_domain(config.problem.domain, &v);
        if (kind == "eigenmode" && domain) {
            if (!domain->is_box()) {
                v.push_back("problem.domain: eigenmode problems need a box domain");
            }
            if (config.problem.mode.size() != domain->dim() ||
                std::any_of(config.problem.mode.begin(), config.problem.mode.end(),
                            [](int k) { return k < 1; })) {
                v.push_back("problem.mode: need one positive index per dimension");
            }
        }
        if (kind == "survival" && config.problem.series_modes == 0) {
            v.push_back("problem.series_modes: must be at least 1");
        }
    }
    if (!(alpha > 0.0 && alpha < 2.0)) {
        v.push_back("problem.alpha: alpha must lie in (0,2), got " + format_real(alpha));
    } else if (alpha / 2.0 > kMaxStabilityIndex) {
        v.push_back("problem.alpha: alpha must not exceed " + format_real(2.0 * kMaxStabilityIndex));
    }

    const EstimatorMode mode = config.mode.value_or(default_mode(config.problem));
    if (mode == EstimatorMode::elliptic && config.problem.kind == "survival") {
        v.push_back("mode: survival problems have no elliptic counterpart");
    }

    if (config.n_paths == 0) {
        v.push_back("n_paths: must be at least 1");
    }
    const bool dt_ok = config.dt > 0.0 && std::isfinite(config.dt);
    if (!dt_ok) {
        v.push_back("dt: must be positive, got " + format_real(config.dt));
    }
    const bool sub_dt_ok = config.subordinator_dt >= 0.0 && std::isfinite(config.subordinator_dt);
    if (!sub_dt_ok) {
        v.push_back("subordinator_dt: must be positive (or 0 for dt), got " + format_real(config.subordinator_dt));
    }
    const double step = config.subordinator_dt > 0.0 ? config.subordinator_dt : config.dt;
    if (config.max_steps == 0) {
        v.push_back("max_steps: must be at least 1");
    }

    if (config.points.empty()) {
        v.push_back("points: at least one query point is required");
    }
    for (std::size_t i = 0; i < config.points.size() && domain; ++i) {
        const Point& p = config.points[i];
        const std::string field = "points[" + std::to_string(i) + "]";
        if (p.size() != domain->dim()) {
            v.push_back(field + ": dimension " + std::to_string(p.size()) + " does not match domain dimension " +
                        std::to_string(domain->dim()));
        } else if (!domain->in_closure(p)) {
            v.push_back(field + ": query outside closure of domain");
        }
    }

    if (mode != EstimatorMode::elliptic && config.times.empty()) {
        v.push_back("times: a time grid is required for " + to_string(mode) + " jobs");
    }
    for (std::size_t i = 0; i < config.times.size(); ++i) {
        const double t = config.times[i];
        const std::string field = "times[" + std::to_string(i) + "]";
        if (!(t >= 0.0) || !std::isfinite(t)) {
            v.push_back(field + ": must be nonnegative");
            continue;
        }
        if (i > 0 && t < config.times[i - 1]) {
            v.push_back(field + ": times must be sorted");
        }
        if (dt_ok && sub_dt_ok) {
            const double q = t / step;
            if (std::abs(q - std::round(q)) > 1e-8 * std::max(1.0, std::round(q))) {
                v.push_back(field + ": " + format_real(t) + " is not a multiple of dt");
            }
        }
    }

    if (config.output_path.empty()) {
        v.push_back("output.path: required");
    }
    return v;
}

ResolvedJob resolve_job(const JobConfig& config)
{
    ResolvedJob job;
    job.mode = config.mode.value_or(default_mode(config.problem));
    if (!config.problem.catalog.empty()) {
        Benchmark b = benchmark_catalog(config.problem.catalog);
        job.spec = std::move(b.spec);
        job.exact = std::move(b.exact);
    } else {
        const ProblemConfig& p = config.problem;
        job.spec.alpha = p.alpha;
        job.spec.domain = *build_domain(p.domain, nullptr);
        const Domain& domain = job.spec.domain;
        if (p.kind == "constant") {
            const double c = p.value;
            job.spec.f = [c](std::span<const double>) { return c; };
            job.spec.g = [c](std::span<const double>) { return c; };
            job.exact = [c](double, std::span<const double>) { return c; };
        } else if (p.kind == "eigenmode") {
            const SeriesSolution series = series_from_modes(domain, p.alpha, {{p.mode, 1.0}});
            const BoxEigenpair e = series.modes.front();
            job.spec.f = [e](std::span<const double> x) { return e(x); };
            job.spec.g = [](std::span<const double>) { return 0.0; };
            if (job.mode == EstimatorMode::elliptic) {
                job.exact = [](double, std::span<const double>) { return 0.0; };
            } else {
                job.exact = [series](double t, std::span<const double> x) {
                    return heat_series_eval(series, t, x);
                };
            }
        } else if (p.kind == "survival") {
            job.spec.f = [](std::span<const double>) { return 1.0; };
            job.spec.g = [](std::span<const double>) { return 0.0; };
            job.spec.compatible = false;
            if (domain.is_box()) {
                const SeriesSolution series =
                    constant_initial_series(domain, p.alpha, p.series_modes, 1.0);
                job.exact = [series, domain](double t, std::span<const double> x) {
                    if (!domain.contains(x)) {
                        return 0.0;
                    }
                    return t == 0.0 ? 1.0 : heat_series_eval(series, t, x);
                };
            }
        } else {
            throw ConfigError("problem.kind: unsupported '" + p.kind + "'");
        }
    }
    if (job.mode == EstimatorMode::survival) {
        job.spec.f = [](std::span<const double>) { return 1.0; };
        job.spec.g = [](std::span<const double>) { return 0.0; };
        job.spec.r = Forcing::zero();
        job.spec.compatible = false;
        if (config.problem.kind != "survival") {
            job.exact = nullptr;
        }
    }
    return job;
}

namespace {

struct RowWriter {
    std::ostream& out;
    OutputFormat format;
    std::size_t dim;
    bool has_exact;

    void header() const
    {
        if (format != OutputFormat::csv) {
            return;
        }
        for (std::size_t i = 0; i < dim; ++i) {
            out << 'x' << i << ',';
        }
        out << "t,estimate,std_error";
        if (has_exact) {
            out << ",exact,abs_error";
        }
        out << ",n_paths,dt,seed\n";
    }

    void row(const PointEstimate& e, std::optional<double> exact, std::uint64_t seed) const
    {
        if (format == OutputFormat::csv) {
            for (const double xi : e.x) {
                out << format_real(xi) << ',';
            }
            out << (e.t ? format_real(*e.t) : std::string()) << ',' << format_real(e.value) << ','
                << format_real(e.std_error);
            if (has_exact) {
                out << ',' << format_real(*exact) << ',' << format_real(std::abs(e.value - *exact));
            }
            out << ',' << e.n_paths << ',' << format_real(e.dt) << ',' << seed << '\n';
            return;
        }
        out << '{';
        for (std::size_t i = 0; i < e.x.size(); ++i) {
            out << "\"x" << i << "\":" << format_real(e.x[i]) << ',';
        }
        out << "\"t\":" << (e.t ? format_real(*e.t) : std::string("null"))
            << ",\"estimate\":" << format_real(e.value)
            << ",\"std_error\":" << format_real(e.std_error);
        if (has_exact) {
            out << ",\"exact\":" << format_real(*exact)
                << ",\"abs_error\":" << format_real(std::abs(e.value - *exact));
        }
        out << ",\"n_paths\":" << e.n_paths << ",\"dt\":" << format_real(e.dt)
            << ",\"seed\":" << seed << "}\n";
    }
};

void check_valid(const JobConfig& config)
{
    const std::vector<std::string> violations = validate_config(config);
    if (!violations.empty()) {
        std::string msg = "invalid job config:";
        for (const std::string& s : violations) {
            msg += "\n  " + s;
        }
        throw ConfigError(msg);
    }
}

SimulationOptions options_for_point(const JobConfig& config, std::size_t point_index)
{
    SimulationOptions options;
    options.n_paths = config.n_paths;
    options.dt = config.dt;
    options.subordinator_dt = config.subordinator_dt;
    options.seed = derive_seed(config.seed, point_index);
    options.workers = config.workers;
    options.max_steps = config.max_steps;
    return options;
}

}  // namespace

void run_job(const JobConfig& config, std::ostream& out)
{
    check_valid(config);
    const ResolvedJob job = resolve_job(config);
    const RowWriter writer{out, config.format, job.spec.domain.dim(), static_cast<bool>(job.exact)};
    writer.header();

    for (std::size_t i = 0; i < config.points.size(); ++i) {
        const Point& x = config.points[i];
        const SimulationOptions options = options_for_point(config, i);
        auto exact_at = [&](const PointEstimate& e) -> std::optional<double> {
            if (!job.exact) {
                return std::nullopt;
            }
            return job.exact(e.t.value_or(0.0), x);
        };
        if (job.mode == EstimatorMode::elliptic) {
            const PointEstimate e = elliptic_estimate(job.spec, x, options);
            writer.row(e, exact_at(e), config.seed);
        } else {
            for (const PointEstimate& e : parabolic_estimate(job.spec, x, config.times, options)) {
                writer.row(e, exact_at(e), config.seed);
            }
        }
    }
}

void run_job(const JobConfig& config)
{
    check_valid(config);
    std::ostringstream buffer;
    run_job(config, buffer);
    const std::filesystem::path target(config.output_path);
    if (target.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(target.parent_path(), ec);
    }
    std::ofstream file(target, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error("cannot open output file " + config.output_path);
    }
    file << buffer.str();
    file.flush();
    if (!file) {
        throw Error("failed writing output file " + config.output_path);
    }
}

void dump_paths(const JobConfig& config, std::size_t count, std::ostream& out)
{
    check_valid(config);
    const ResolvedJob job = resolve_job(config);
    const StableSampler sampler(StableParams::for_fractional_order(job.spec.alpha),
                               options_for_point(config, 0).time_step());
    for (std::size_t i = 0; i < config.points.size(); ++i) {
        const Point& x = config.points[i];
        if (!job.spec.domain.contains(x)) {
            continue;
        }
        const SimulationOptions options = options_for_point(config, i);
        StoppedPath stopped;
        SubordinatorPath sub;
        SubordinatedPath path;
        for (std::size_t p = 0; p < count && p < config.n_paths; ++p) {
            RngStream rng(options.seed, p);
            generate_stopped_path(x, job.spec.domain, config.dt, rng, stopped, config.max_steps);
            generate_subordinator(sampler, stopped.exit_time_rounded, rng, sub);
            subordinate(stopped, sub, path);
            out << "# point " << i << " path " << p << " exit_time_rounded "
                << format_real(stopped.exit_time_rounded) << '\n';
            write_path_csv(out, stopped, sub, path);
        }
        return;
    }
    throw ConfigError("points: no interior query point to dump paths from");
}

}  // namespace fkmc
