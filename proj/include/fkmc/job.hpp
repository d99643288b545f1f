#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fkmc/domains.hpp"
#include "fkmc/estimators.hpp"

namespace fkmc {

enum class EstimatorMode { parabolic, elliptic, survival };
enum class OutputFormat { csv, jsonl };

std::string to_string(EstimatorMode mode);

struct DomainConfig {
    std::string kind = "box";  // interval | box | ball
    Point lower;
    Point upper;
    Point center;
    double radius = 0.0;
};

/// Either a catalog benchmark (`catalog` set) or an inline problem:
///   constant  - f = g = value, r = 0
///   eigenmode - f = e_k on a box, g = 0, r = 0
///   survival  - f = 1, g = 0, r = 0
struct ProblemConfig {
    std::string catalog;
    std::string kind;
    double alpha = 0.0;
    DomainConfig domain;
    double value = 0.0;
    std::vector<int> mode;
    /// Truncation of the eigen-series reference for inline survival jobs.
    std::size_t series_modes = 400;
};

struct JobConfig {
    std::string name;
    ProblemConfig problem;
    std::optional<EstimatorMode> mode;
    std::vector<Point> points;
    std::vector<double> times;
    std::size_t n_paths = 1000;
    double dt = 1e-4;
    /// 0 means equal to dt. Query times must be multiples of this step.
    double subordinator_dt = 0.0;
    std::uint64_t seed = 0;
    unsigned workers = 0;
    std::size_t max_steps = kDefaultMaxSteps;
    std::string output_path;
    OutputFormat format = OutputFormat::csv;
};

/// Parses the JSON job schema (see README). Structural problems (bad JSON,
/// wrong types, unknown keys) throw ConfigError naming the field; semantic
/// checks are left to validate_config.
JobConfig parse_job_config(std::string_view json_text);
JobConfig load_job_config(const std::filesystem::path& path);

/// Every violated invariant, each prefixed with the offending field. Empty
/// means the job can run.
std::vector<std::string> validate_config(const JobConfig& config);

/// Problem, reference solution (possibly empty) and estimator mode a job
/// resolves to.
struct ResolvedJob {
    ProblemSpec spec;
    ExactSolution exact;
    EstimatorMode mode = EstimatorMode::parabolic;
};

ResolvedJob resolve_job(const JobConfig& config);

/// Runs a validated job and streams rows to `out`. Throws ConfigError if the
/// config has violations.
void run_job(const JobConfig& config, std::ostream& out);

/// Runs the job and writes config.output_path.
void run_job(const JobConfig& config);

/// Writes the first `count` paths of the first interior query point, drawn
/// from the same streams the job uses.
void dump_paths(const JobConfig& config, std::size_t count, std::ostream& out);

/// Decimal with 17 significant digits.
std::string format_real(double v);

}  // namespace fkmc
