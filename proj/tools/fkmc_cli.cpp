// fkmc_cli: run a Monte Carlo job described by a JSON job file.
//
//   fkmc_cli configs/square_parabolic.json --paths 10000 --out run.csv
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fkmc/error.hpp"
#include "fkmc/job.hpp"
#include "fkmc/reference_solutions.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::optional<unsigned> workers_from_env()
{
    const char* env = std::getenv("FKMC_WORKERS");
    if (env == nullptr || *env == '\0') {
        return std::nullopt;
    }
    try {
        return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
        throw fkmc::ConfigError(std::string("FKMC_WORKERS: not a worker count: ") + env);
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo solver for fractional Dirichlet problems"};

    std::string job_file;
    std::optional<std::size_t> paths;
    std::optional<double> dt;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::string> out_path;
    std::optional<std::string> format;
    bool validate_only = false;
    bool list_benchmarks = false;
    std::string dump_file;
    std::size_t dump_count = 5;

    app.add_option("job", job_file, "JSON job file");
    app.add_option("--paths", paths, "number of Monte Carlo paths per query point");
    app.add_option("--dt", dt, "time step of the Brownian motion and subordinator");
    app.add_option("--seed", seed, "64-bit seed");
    app.add_option("--workers", workers, "worker threads (default: $FKMC_WORKERS, then all cores)");
    app.add_option("--out", out_path, "output file");
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_flag("--validate", validate_only, "check the job file and exit");
    app.add_flag("--list-benchmarks", list_benchmarks, "print the benchmark catalog and exit");
    app.add_option("--dump-paths", dump_file, "also write a CSV dump of sample paths");
    app.add_option("--dump-count", dump_count, "number of paths to dump");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (list_benchmarks) {
        for (const std::string& name : fkmc::benchmark_names()) {
            const fkmc::Benchmark b = fkmc::benchmark_catalog(name);
            std::cout << name << "  dim=" << b.spec.domain.dim() << "  alpha=" << b.alpha_expr
                      << (b.stationary ? "  elliptic" : "  parabolic") << '\n';
        }
        return 0;
    }
    if (job_file.empty()) {
        std::cerr << "error: a job file is required\n";
        return kExitConfig;
    }

    fkmc::JobConfig config;
    try {
        config = fkmc::load_job_config(job_file);
        if (config.workers == 0) {
            config.workers = workers_from_env().value_or(0);
        }
        if (paths) config.n_paths = *paths;
        if (dt) config.dt = *dt;
        if (seed) config.seed = *seed;
        if (workers) config.workers = *workers;
        if (out_path) config.output_path = *out_path;
        if (format) config.format = *format == "jsonl" ? fkmc::OutputFormat::jsonl : fkmc::OutputFormat::csv;

        const auto violations = fkmc::validate_config(config);
        if (!violations.empty()) {
            std::cerr << "invalid job config " << job_file << ":\n";
            for (const auto& v : violations) {
                std::cerr << "  " << v << '\n';
            }
            return kExitConfig;
        }
    } catch (const fkmc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fkmc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (validate_only) {
        std::cout << job_file << ": ok\n";
        return 0;
    }

    try {
        fkmc::run_job(config);
        if (!dump_file.empty()) {
            std::ofstream dump(dump_file);
            if (!dump) {
                throw fkmc::Error("cannot open dump file " + dump_file);
            }
            fkmc::dump_paths(config, dump_count, dump);
        }
    } catch (const fkmc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
