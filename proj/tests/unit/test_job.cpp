#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "fkmc/error.hpp"
#include "fkmc/job.hpp"

using namespace fkmc;
namespace fs = std::filesystem;

namespace {

const char* kConstantJob = R"({
  "name": "constant",
  "problem": {"kind": "constant", "alpha": 1.2,
              "domain": {"kind": "box", "lower": [0, 0], "upper": [1, 1]}, "value": 2.5},
  "points": [[0.5, 0.5], [0.1, 0.8], [1.0, 0.3]],
  "times": [0, 0.01, 0.02],
  "n_paths": 200, "dt": 1e-3, "seed": 9,
  "output": {"path": "unused.csv"}
})";

JobConfig eigenmode_job()
{
    return parse_job_config(R"({
      "problem": {"kind": "eigenmode", "alpha": 1.5,
                  "domain": {"kind": "box", "lower": [0, 0], "upper": [1, 1]}, "mode": [1, 1]},
      "line": {"from": [0.2, 0.2], "to": [0.8, 0.8], "count": 3},
      "times": {"start": 0, "stop": 0.004, "step": 0.002},
      "n_paths": 400, "dt": 1e-3, "seed": 42,
      "output": {"path": "unused.csv"}
    })");
}

std::string run_to_string(const JobConfig& c)
{
    std::ostringstream out;
    run_job(c, out);
    return out.str();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool has_violation(const std::vector<std::string>& v, const std::string& needle)
{
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

fs::path temp_dir()
{
    const fs::path d = fs::temp_directory_path() / "fkmc_job_tests";
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(FKMC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("parse fills every field")
{
    const JobConfig c = eigenmode_job();
    CHECK(c.problem.kind == "eigenmode");
    CHECK(c.problem.mode == std::vector<int>{1, 1});
    REQUIRE(c.points.size() == 3);
    CHECK(c.points[1] == Point{0.5, 0.5});
    CHECK(c.points[2] == Point{0.8, 0.8});
    CHECK(c.times == std::vector<double>{0.0, 0.002, 0.004});
    CHECK(c.n_paths == 400);
    CHECK(c.seed == 42);
    CHECK(validate_config(c).empty());

    const JobConfig b = parse_job_config(
        R"({"problem": "square_elliptic", "points": [[0.5, 0.5]], "output": {"path": "o.jsonl", "format": "jsonl"}})");
    CHECK(b.problem.catalog == "square_elliptic");
    CHECK(b.format == OutputFormat::jsonl);
    CHECK(validate_config(b).empty());
}

TEST_CASE("structural errors name the field")
{
    auto message = [](const char* text) {
        try {
            parse_job_config(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("{").find("invalid JSON") != std::string::npos);
    CHECK(message(R"({"problem": "square_elliptic", "paths": 3})").find("paths") != std::string::npos);
    CHECK(message(R"({"problem": "square_elliptic", "dt": "small"})").find("dt") != std::string::npos);
    CHECK(message(R"({"problem": "square_elliptic", "output": {"format": "xml"}})").find("output.format") !=
          std::string::npos);
    CHECK(message(R"({"problem": {"kind": "constant", "alpha": 1, "domain": {"kind": "box", "side": 1}}})")
              .find("problem.domain.side") != std::string::npos);
    CHECK(message(R"({"points": []})").find("problem") != std::string::npos);
}

TEST_CASE("validation reports violations instead of throwing")
{
    JobConfig c = eigenmode_job();
    c.times = {0.0, 0.00015};
    c.dt = 1e-4;
    CHECK(has_violation(validate_config(c), "is not a multiple of dt"));

    c = eigenmode_job();
    c.problem.alpha = 2.0;
    CHECK(has_violation(validate_config(c), "alpha must lie in (0,2)"));

    c = eigenmode_job();
    c.points = {{1.2, 0.5}};
    CHECK(has_violation(validate_config(c), "points[0]: query outside closure of domain"));

    c = eigenmode_job();
    c.problem.alpha = 1.995;
    CHECK(has_violation(validate_config(c), "problem.alpha"));

    c = eigenmode_job();
    c.points = {{0.5}};
    c.n_paths = 0;
    c.output_path.clear();
    c.times = {0.01, 0.0};
    const auto v = validate_config(c);
    CHECK(has_violation(v, "points[0]: dimension"));
    CHECK(has_violation(v, "n_paths"));
    CHECK(has_violation(v, "output.path"));
    CHECK(has_violation(v, "times must be sorted"));

    c = eigenmode_job();
    c.problem.catalog = "nope";
    CHECK(has_violation(validate_config(c), "problem:"));

    CHECK_THROWS_AS(run_to_string(parse_job_config(R"({"problem": "square_elliptic",
        "points": [[2, 2]], "output": {"path": "x"}})")),
                    ConfigError);
}

TEST_CASE("a constant job is exact with zero error columns")
{
    const JobConfig c = parse_job_config(kConstantJob);
    std::istringstream rows(run_to_string(c));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "x0,x1,t,estimate,std_error,exact,abs_error,n_paths,dt,seed");
    int n = 0;
    while (std::getline(rows, line)) {
        ++n;
        CHECK(line.find(",2.5,0,2.5,0,200,0.001,") != std::string::npos);
    }
    CHECK(n == 9);
}

TEST_CASE("elliptic and jsonl output")
{
    JobConfig c = parse_job_config(kConstantJob);
    c.mode = EstimatorMode::elliptic;
    c.format = OutputFormat::jsonl;
    c.times.clear();
    std::istringstream rows(run_to_string(c));
    std::string line;
    int n = 0;
    while (std::getline(rows, line)) {
        ++n;
        CHECK(line.front() == '{');
        CHECK(line.find("\"t\":null") != std::string::npos);
        CHECK(line.find("\"estimate\":2.5,\"std_error\":0") != std::string::npos);
    }
    CHECK(n == 3);
}

TEST_CASE("survival mode drops references it cannot supply")
{
    JobConfig c = eigenmode_job();
    c.mode = EstimatorMode::survival;
    const std::string out = run_to_string(c);
    CHECK(out.substr(0, out.find('\n')) == "x0,x1,t,estimate,std_error,n_paths,dt,seed");

    JobConfig s = parse_job_config(R"({
      "problem": {"kind": "survival", "alpha": 1.7, "domain": {"kind": "interval", "lower": [0], "upper": [1]}},
      "points": [[0.5]], "times": [0, 0.01], "n_paths": 2000, "dt": 1e-4, "seed": 1,
      "output": {"path": "unused"}
    })");
    std::istringstream rows(run_to_string(s));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "x0,t,estimate,std_error,exact,abs_error,n_paths,dt,seed");
    std::getline(rows, line);
    CHECK(line.rfind("0.5,0,1,0,1,0,", 0) == 0);
}

TEST_CASE("output is byte-identical across runs and worker counts")
{
    const fs::path dir = temp_dir();
    JobConfig c = eigenmode_job();
    c.workers = 1;
    c.output_path = (dir / "w1.csv").string();
    run_job(c);
    c.workers = 3;
    c.output_path = (dir / "w3.csv").string();
    run_job(c);
    c.output_path = (dir / "w3b.csv").string();
    run_job(c);
    const std::string a = slurp(dir / "w1.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "w3.csv"));
    CHECK(a == slurp(dir / "w3b.csv"));

    c.seed = 43;
    CHECK(run_to_string(c) != a);
}

TEST_CASE("path dump")
{
    const JobConfig c = eigenmode_job();
    std::ostringstream out;
    dump_paths(c, 2, out);
    const std::string s = out.str();
    CHECK(s.rfind("# point 0 path 0 exit_time_rounded ", 0) == 0);
    CHECK(s.find("# point 0 path 1 ") != std::string::npos);
    CHECK(s.find("n,t,T,index,alive,x0,x1") != std::string::npos);
}

TEST_CASE("shipped configs validate")
{
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(FKMC_CONFIG_DIR)) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        ++seen;
        INFO(entry.path().string());
        const JobConfig c = load_job_config(entry.path());
        const auto v = validate_config(c);
        CHECK(v.empty());
    }
    CHECK(seen >= 4);
}

TEST_CASE("command-line exit codes")
{
    const fs::path dir = temp_dir();
    const fs::path good = dir / "good.json";
    {
        std::ofstream f(good);
        f << kConstantJob;
    }
    const fs::path out = dir / "cli.csv";
    CHECK(run_cli(good.string() + " --out " + out.string() + " --workers 2 --paths 50") == 0);
    const std::string text = slurp(out);
    CHECK(text.find(",2.5,0,2.5,0,50,0.001,9") != std::string::npos);

    const fs::path jl = dir / "cli.jsonl";
    CHECK(run_cli(good.string() + " --out " + jl.string() + " --format jsonl --dt 0.01 --seed 3") == 0);
    CHECK(slurp(jl).find("\"dt\":0.01,\"seed\":3}") != std::string::npos);

    CHECK(run_cli(good.string() + " --validate") == 0);
    CHECK(run_cli("--list-benchmarks") == 0);
    CHECK(run_cli(good.string() + " --dt 0.003 --out " + out.string()) == 2);  // times off grid
    CHECK(run_cli((dir / "missing.json").string()) == 2);
    CHECK(run_cli(good.string() + " --format xml") == 2);
    CHECK(run_cli("") == 2);

    const fs::path bad = dir / "bad.json";
    {
        std::ofstream f(bad);
        f << R"({"problem": "square_elliptic", "points": [[0.5, 0.5]], "colour": 1})";
    }
    CHECK(run_cli(bad.string()) == 2);

    // Missing parent directories are created; an unwritable target is a
    // runtime error.
    CHECK(run_cli(good.string() + " --out " + (dir / "nested/dir/x.csv").string()) == 0);
    CHECK(fs::exists(dir / "nested/dir/x.csv"));
    CHECK(run_cli(good.string() + " --out " + dir.string()) == 3);
}

TEST_CASE("subordinator step in the job file")
{
    JobConfig c = eigenmode_job();
    CHECK(c.subordinator_dt == 0.0);
    c = parse_job_config(R"({"problem": "square_parabolic", "points": [[0.5, 0.5]],
        "times": [0, 0.002], "dt": 1e-4, "subordinator_dt": 1e-3, "output": {"path": "o"}})");
    CHECK(c.subordinator_dt == 1e-3);
    CHECK(has_violation(validate_config(c), "times[1]: 0.002 is not a multiple of dt") == false);
    c.times = {0.0, 0.0015};
    CHECK(has_violation(validate_config(c), "times[1]"));
    c.subordinator_dt = -1.0;
    CHECK(has_violation(validate_config(c), "subordinator_dt"));
}
