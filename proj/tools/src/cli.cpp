#include "halp_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include "halp/baselines.hpp"
#include "halp/bench.hpp"
#include "halp/error.hpp"
#include "halp/halp.hpp"
#include "halp/io.hpp"
#include "halp/policy.hpp"
#include "halp/special_fn.hpp"

namespace halp::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Common {
    std::string benchmark;
    std::string problem;
    std::string out;
    std::optional<double> gamma;
    std::optional<std::uint64_t> seed;
    bool record_timing = false;
};

void add_problem_options(CLI::App& cmd, Common& c) {
    auto* b = cmd.add_option("--benchmark", c.benchmark, "Builtin benchmark id (ring4, irrigation-ring6, ...)");
    auto* p = cmd.add_option("--problem", c.problem, "Problem file written by the benchmark subcommand");
    b->excludes(p);
    cmd.add_option("--gamma", c.gamma, "Discount factor (defaults to the problem's)");
}

void add_run_options(CLI::App& cmd, Common& c) {
    cmd.add_option("--seed", c.seed, "Base seed; required for stochastic runs");
    cmd.add_option("--out", c.out, std::string("Output directory (default $") + kOutputDirEnv + " or ./halp-out)");
    cmd.add_flag("--record-timing", c.record_timing, "Write wall-clock times into the outputs");
}

struct Loaded {
    Benchmark bench;
    std::string source;  ///< benchmark:<id> or file:<path>
    std::optional<Topology> topology;
    double gamma = 0.95;
};

Loaded load_source(const std::string& source, std::optional<double> gamma) {
    Loaded l;
    l.source = source;
    if (source.rfind("benchmark:", 0) == 0) {
        l.topology = parse_topology(source.substr(10));
        l.bench = make_benchmark(*l.topology);
    } else if (source.rfind("file:", 0) == 0) {
        l.bench = problem_from_json(read_file(source.substr(5)));
    } else {
        throw ConfigError("unknown problem source '" + source + "'");
    }
    if (gamma) l.bench.mdp.set_discount(*gamma);
    l.gamma = l.bench.mdp.discount();
    return l;
}

Loaded load_problem(const Common& c) {
    if (c.benchmark.empty() && c.problem.empty()) throw ConfigError("one of --benchmark or --problem is required");
    if (!c.problem.empty() && !std::filesystem::exists(c.problem)) {
        throw ConfigError("problem file '" + c.problem + "' does not exist");
    }
    return load_source(c.benchmark.empty() ? "file:" + c.problem : "benchmark:" + c.benchmark, c.gamma);
}

std::string output_dir(const Common& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return "halp-out";
}

std::uint64_t require_seed(const Common& c) {
    if (!c.seed) throw ConfigError("--seed is required for this command");
    return *c.seed;
}

std::string path_in(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

struct Row {
    std::string method;
    std::uint64_t seed = 0;
    TrajectoryStats stats;
    std::optional<double> objective;
    double runtime = 0.0;
};

std::string csv(const std::vector<Row>& rows, bool timing) {
    std::ostringstream s;
    s << kEvaluationHeader << '\n';
    for (const auto& r : rows) {
        s << r.method << ',' << r.seed << ',' << format_double(r.stats.mean) << ',' << format_double(r.stats.std) << ','
          << r.stats.count << ',' << r.stats.horizon << ',' << (r.objective ? format_double(*r.objective) : "")
          << ',' << (timing ? format_double(r.runtime) : "") << '\n';
    }
    return s.str();
}

void summarize(std::ostream& out, const std::vector<Row>& rows) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r.stats.mean;
    mean /= static_cast<double>(rows.size());
    double spread = 0.0;
    if (rows.size() > 1) {
        for (const auto& r : rows) spread += (r.stats.mean - mean) * (r.stats.mean - mean);
        spread = std::sqrt(spread / static_cast<double>(rows.size() - 1));
    } else {
        spread = rows[0].stats.std;
    }
    out << rows[0].method << ": return " << format_double(std::round(mean * 1000) / 1000) << " +- "
        << format_double(std::round(spread * 1000) / 1000) << " over " << rows.size() << " seed(s)\n";
}

void write_outputs(const std::string& dir, const std::string& command, const std::vector<std::string>& args,
                   const json& config, const std::vector<Row>& rows, std::vector<std::string> files,
                   const json& phases, bool timing) {
    write_file_atomic(path_in(dir, "evaluation.csv"), csv(rows, timing));
    files.push_back("evaluation.csv");
    json m;
    m["command"] = command;
    m["arguments"] = std::vector<std::string>(args.begin() + 1, args.end());
    m["config"] = config;
    m["versions"] = {{"halp", kVersion}, {"compiler", __VERSION__}, {"cxx", __cplusplus}};
    m["files"] = files;
    m["timing"] = timing ? json{{"recorded", true}, {"phases", phases}} : json{{"recorded", false}};
    write_file_atomic(path_in(dir, "manifest.json"), m.dump(2) + "\n");
}

struct EvalOptions {
    std::size_t trajectories = 100;
    int horizon = kDefaultHorizon;
    int seeds = 1;
};

void add_eval_options(CLI::App& cmd, EvalOptions& e) {
    cmd.add_option("--trajectories", e.trajectories, "Rollouts per evaluation")->check(CLI::PositiveNumber);
    cmd.add_option("--horizon", e.horizon, "Steps per rollout")->check(CLI::PositiveNumber);
    cmd.add_option("--seeds", e.seeds, "Batch size; run k uses seed + k")->check(CLI::PositiveNumber);
}

json eval_config(const EvalOptions& e) {
    return {{"trajectories", e.trajectories}, {"horizon", e.horizon}, {"seeds", e.seeds}};
}

// solve ----------------------------------------------------------------------

struct SolveOptions {
    std::string oracle = "eps";
    double eps = 0.125;
    std::size_t samples = 1000;
    int chains = 50;
    int sweeps = 500;
    double temp_c = 0.2;
    int inner_steps = 10;
    int max_iterations = 500;
};

OracleConfig oracle_config(const SolveOptions& s) {
    if (s.oracle == "eps") return EpsConfig{s.eps, {}};
    if (s.oracle == "mc") return McConfig{s.samples};
    if (s.oracle == "mcmc") return McmcConfig{s.chains, s.sweeps, s.temp_c, s.inner_steps};
    throw ConfigError("unknown oracle '" + s.oracle + "'");
}

json solve_config(const SolveOptions& s) {
    if (s.oracle == "eps") return {{"oracle", "eps"}, {"eps", s.eps}, {"max_iterations", s.max_iterations}};
    if (s.oracle == "mc") return {{"oracle", "mc"}, {"samples", s.samples}};
    return {{"oracle", "mcmc"},      {"chains", s.chains},           {"sweeps", s.sweeps},
            {"temp_c", s.temp_c},    {"inner_steps", s.inner_steps}, {"max_iterations", s.max_iterations}};
}

int cmd_solve(const Common& c, const SolveOptions& s, const EvalOptions& e, const std::vector<std::string>& args,
              std::ostream& out) {
    const std::uint64_t seed = require_seed(c);
    const Loaded l = load_problem(c);
    const OracleConfig oc = oracle_config(s);
    check_config(oc);
    const std::string dir = output_dir(c);
    const auto psi = StateRelevanceDensity::uniform(l.bench.mdp);
    HalpLimits limits;
    limits.max_iterations = s.max_iterations;

    json cfg = solve_config(s);
    cfg["problem"] = l.source;
    cfg["gamma"] = l.gamma;
    cfg["seed"] = seed;
    cfg["evaluation"] = eval_config(e);

    std::vector<Row> rows;
    std::vector<std::string> files;
    json phases = json::array();
    for (int k = 0; k < e.seeds; ++k) {
        const std::uint64_t sk = seed + static_cast<std::uint64_t>(k);
        const auto t0 = Clock::now();
        HalpSolution sol;
        if (const auto* mc = std::get_if<McConfig>(&oc)) {
            Rng rng(sk);
            sol = mc_halp(l.bench.mdp, l.bench.basis, psi, l.gamma, *mc, rng, limits);
        } else {
            sol = cutting_plane(l.bench.mdp, l.bench.basis, psi, l.gamma, oc, sk, limits);
        }
        const double solve_s = seconds_since(t0);
        if (sol.status == HalpStatus::Infeasible || sol.status == HalpStatus::Unbounded) {
            throw NumericError(std::string("relaxed LP is ") + to_string(sol.status));
        }
        SolutionArchive a = make_archive(sol);
        a.problem = l.source;
        a.solver = s.oracle;
        const json echo = solve_config(s);
        for (const auto& [key, v] : echo.items()) {
            a.config.emplace_back(key, v.is_string() ? v.get<std::string>() : v.dump());
        }
        a.gamma = l.gamma;
        a.seed = sk;
        if (c.record_timing) a.seconds = solve_s;
        const std::string name = "solution-" + std::to_string(sk) + ".json";
        write_file_atomic(path_in(dir, name), archive_to_json(a));
        files.push_back(name);

        const auto t1 = Clock::now();
        const Policy pi = GreedyPolicy{{l.bench.basis, sol.weights}, l.gamma};
        Row r{"halp-" + s.oracle, sk, evaluate_policy(l.bench.mdp, pi, l.gamma, e.trajectories, e.horizon, sk),
              sol.objective, 0.0};
        const double eval_s = seconds_since(t1);
        r.runtime = solve_s;
        rows.push_back(r);
        phases.push_back({{"seed", sk}, {"solve_s", solve_s}, {"evaluate_s", eval_s}});
        out << "seed " << sk << ": " << to_string(sol.status) << ", objective " << format_double(sol.objective)
            << ", " << sol.iterations << " rounds, " << sol.cuts << " rows, return "
            << format_double(r.stats.mean) << '\n';
    }
    write_outputs(dir, "solve", args, cfg, rows, files, phases, c.record_timing);
    summarize(out, rows);
    return kOk;
}

// evaluate -------------------------------------------------------------------

int cmd_evaluate(Common c, const std::string& policy_name, const std::string& archive_path, const EvalOptions& e,
                 const std::vector<std::string>& args, std::ostream& out) {
    const std::uint64_t seed = require_seed(c);
    Loaded l;
    std::optional<SolutionArchive> archive;
    if (!archive_path.empty()) {
        archive = archive_from_json(read_file(archive_path));
        if (c.benchmark.empty() && c.problem.empty()) {
            l = load_source(archive->problem, c.gamma ? c.gamma : std::optional<double>(archive->gamma));
        } else {
            l = load_problem(c);
        }
        if (archive->weights.size() != l.bench.basis.size()) {
            throw ConfigError("archive weights do not match the problem's basis");
        }
    } else {
        l = load_problem(c);
    }
    const std::string method = archive ? "greedy" : policy_name;
    if (method.empty()) throw ConfigError("one of --policy or --archive is required");
    const Policy pi = archive ? Policy{GreedyPolicy{{l.bench.basis, archive->weights}, l.gamma}}
                              : heuristic(policy_name, l.bench.mdp);
    const std::string dir = output_dir(c);
    json cfg = {{"problem", l.source}, {"policy", method}, {"gamma", l.gamma}, {"seed", seed},
                {"evaluation", eval_config(e)}};
    if (archive) cfg["archive"] = archive_path;
    std::vector<Row> rows;
    json phases = json::array();
    for (int k = 0; k < e.seeds; ++k) {
        const std::uint64_t sk = seed + static_cast<std::uint64_t>(k);
        const auto t0 = Clock::now();
        Row r{method, sk, evaluate_policy(l.bench.mdp, pi, l.gamma, e.trajectories, e.horizon, sk), std::nullopt,
              0.0};
        r.runtime = seconds_since(t0);
        if (archive) r.objective = archive->objective;
        phases.push_back({{"seed", sk}, {"evaluate_s", r.runtime}});
        rows.push_back(r);
    }
    write_outputs(dir, "evaluate", args, cfg, rows, {}, phases, c.record_timing);
    summarize(out, rows);
    return kOk;
}

// baseline -------------------------------------------------------------------

struct BaselineOptions {
    std::string method = "grid-vi";
    std::string grid = "random";
    std::size_t points = 1250;
    double eps = 0.125;
    int max_iters = 10000;
    double tol = 1e-6;
};

int cmd_baseline(const Common& c, const BaselineOptions& b, const EvalOptions& e,
                 const std::vector<std::string>& args, std::ostream& out) {
    const std::uint64_t seed = require_seed(c);
    if (b.method != "grid-vi" && b.method != "l2-vi") throw ConfigError("unknown baseline '" + b.method + "'");
    if (b.grid != "random" && b.grid != "uniform") throw ConfigError("unknown grid scheme '" + b.grid + "'");
    const Loaded l = load_problem(c);
    const std::string dir = output_dir(c);
    json cfg = {{"problem", l.source}, {"method", b.method},   {"grid", b.grid},
                {"gamma", l.gamma},    {"seed", seed},         {"max_iterations", b.max_iters},
                {"tolerance", b.tol},  {"evaluation", eval_config(e)}};
    if (b.grid == "random") cfg["points"] = b.points;
    else cfg["eps"] = b.eps;

    std::vector<Row> rows;
    std::vector<std::string> files;
    json phases = json::array();
    for (int k = 0; k < e.seeds; ++k) {
        const std::uint64_t sk = seed + static_cast<std::uint64_t>(k);
        const auto t0 = Clock::now();
        Rng rng(sk);
        auto pts = b.grid == "random" ? uniform_random_grid(l.bench.mdp, b.points, rng)
                                      : uniform_state_grid(l.bench.mdp, b.eps);
        Policy pi;
        if (b.method == "grid-vi") {
            const auto res = grid_vi(l.bench.mdp, pts, l.gamma, b.max_iters, b.tol);
            pi = GridGreedyPolicy{std::make_shared<const GridValue>(l.bench.mdp, std::move(pts), res.values, l.gamma)};
            out << "seed " << sk << ": grid VI " << res.iterations << " sweeps, residual " << format_double(res.residual)
                << '\n';
        } else {
            const auto res = l2_vi(l.bench.mdp, l.bench.basis, l.gamma, pts, b.max_iters, b.tol);
            SolutionArchive a;
            a.problem = l.source;
            a.solver = "l2-vi";
            a.gamma = l.gamma;
            a.seed = sk;
            a.weights = res.weights;
            a.iterations = res.iterations;
            a.status = res.residual < b.tol ? "converged" : "iteration-capped";
            const std::string name = "l2vi-" + std::to_string(sk) + ".json";
            write_file_atomic(path_in(dir, name), archive_to_json(a));
            files.push_back(name);
            pi = GreedyPolicy{{l.bench.basis, res.weights}, l.gamma};
            out << "seed " << sk << ": L2 VI " << res.iterations << " iterations, step "
                << format_double(res.residual) << '\n';
        }
        const double solve_s = seconds_since(t0);
        Row r{b.method, sk, evaluate_policy(l.bench.mdp, pi, l.gamma, e.trajectories, e.horizon, sk), std::nullopt,
              solve_s};
        phases.push_back({{"seed", sk}, {"solve_s", solve_s}});
        rows.push_back(r);
    }
    write_outputs(dir, "baseline", args, cfg, rows, files, phases, c.record_timing);
    summarize(out, rows);
    return kOk;
}

// bound, benchmark, expect -----------------------------------------------------

int cmd_bound(const Common& c, std::ostream& out) {
    if (c.benchmark.empty()) throw ConfigError("bound needs --benchmark");
    const Topology t = parse_topology(c.benchmark);
    const double gamma = c.gamma.value_or(0.95);
    double bound = 0.0;
    if (const auto* r = std::get_if<RingAdmin>(&t)) {
        bound = utopian_bound_ring(r->n, gamma);
    } else if (is_irrigation(t)) {
        bound = utopian_bound_irrigation(t, gamma);
    } else {
        throw ConfigError("no utopian bound for '" + c.benchmark + "'");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", bound);
    out << c.benchmark << " utopian bound: " << buf << " (" << format_double(bound) << ")\n";
    return kOk;
}

int cmd_benchmark(const Common& c, const std::string& output, std::ostream& out) {
    if (c.benchmark.empty()) throw ConfigError("benchmark needs --benchmark");
    Benchmark b = make_benchmark(parse_topology(c.benchmark));
    if (c.gamma) b.mdp.set_discount(*c.gamma);
    const auto report = validate(b.mdp);
    if (!report.ok()) throw NumericError("generated model failed validation: " + report.violations.front());
    const std::string path = output.empty() ? path_in(output_dir(c), c.benchmark + ".json") : output;
    write_file_atomic(path, problem_to_json(b));
    out << path << '\n';
    return kOk;
}

UnivariateKernel parse_kernel(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    std::vector<double> nums;
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        for (std::string item; std::getline(ss, item, ',');) {
            try {
                nums.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("bad number '" + item + "' in kernel '" + text + "'");
            }
        }
    }
    if (kind == "monomial" && nums.size() == 2) return Monomial{static_cast<int>(nums[0]), static_cast<int>(nums[1])};
    if (kind == "beta" && nums.size() == 2) return BetaPdf{{nums[0], nums[1]}};
    if (kind == "pwl" && !nums.empty() && nums.size() % 4 == 0) {
        Pwl p;
        for (std::size_t i = 0; i < nums.size(); i += 4) p.segments.push_back({nums[i], nums[i + 1], nums[i + 2], nums[i + 3]});
        return p;
    }
    throw ConfigError("kernel must be monomial:n,m | beta:a,b | pwl:l,r,a,b[,...], got '" + text + "'");
}

int cmd_expect(const std::string& demo, double alpha, double beta, const std::string& kernel, std::ostream& out) {
    if (!demo.empty()) {
        if (demo != "example5") throw ConfigError("unknown demo '" + demo + "'");
        const BetaParams p{15.0, 8.0};
        const PwlSegments tent{{0.3, 0.5, 5.0, -1.5}, {0.5, 0.7, -5.0, 3.5}};
        char buf[160];
        std::snprintf(buf, sizeof buf, "monomial x^4     %.4f\nbeta pdf (2,6)   %.4f\npiecewise tent   %.4f\n",
                      expect_monomial(p, 4, 0), expect_beta_pdf(p, {2.0, 6.0}), expect_pwl(p, tent));
        out << buf;
        return kOk;
    }
    if (kernel.empty()) throw ConfigError("expect needs --demo or --kernel");
    out << format_double(expect_kernel({alpha, beta}, parse_kernel(kernel))) << '\n';
    return kOk;
}

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Config: return kConfigError;
        case ErrorKind::Resource: return kResourceError;
        default: return kNumericError;
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid approximate linear programming toolkit", "halp"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Common common;
    SolveOptions so;
    EvalOptions eo;
    BaselineOptions bo;
    std::string policy, archive, output, demo, kernel;
    double alpha = 1.0, beta = 1.0;

    auto* solve = app.add_subcommand("solve", "Fit a value function with HALP and evaluate its greedy policy");
    add_problem_options(*solve, common);
    add_run_options(*solve, common);
    add_eval_options(*solve, eo);
    solve->add_option("--oracle", so.oracle, "Constraint generation: eps | mc | mcmc")
        ->check(CLI::IsMember({"eps", "mc", "mcmc"}));
    solve->add_option("--eps", so.eps, "Grid resolution of the eps oracle");
    solve->add_option("--samples", so.samples, "MC-HALP sample count");
    solve->add_option("--chains", so.chains, "MCMC chain count");
    solve->add_option("--sweeps", so.sweeps, "Sweeps per MCMC chain");
    solve->add_option("--temp-c", so.temp_c, "Initial MCMC temperature c");
    solve->add_option("--inner-steps", so.inner_steps, "Metropolis steps per continuous update");
    solve->add_option("--max-iterations", so.max_iterations, "Cutting-plane round cap");

    auto* evaluate = app.add_subcommand("evaluate", "Monte Carlo evaluation of a heuristic or archived policy");
    add_problem_options(*evaluate, common);
    add_run_options(*evaluate, common);
    add_eval_options(*evaluate, eo);
    evaluate->add_option("--policy", policy, "Heuristic: dummy | random | server");
    evaluate->add_option("--archive", archive, "Solution archive; evaluates its greedy policy")->check(CLI::ExistingFile);

    auto* baseline = app.add_subcommand("baseline", "Grid-based or least-squares value iteration");
    add_problem_options(*baseline, common);
    add_run_options(*baseline, common);
    add_eval_options(*baseline, eo);
    baseline->add_option("--method", bo.method, "grid-vi | l2-vi");
    baseline->add_option("--grid", bo.grid, "random (i.i.d. uniform points) | uniform (eps-grid)");
    baseline->add_option("--points", bo.points, "Random grid size");
    baseline->add_option("--eps", bo.eps, "Uniform grid resolution");
    baseline->add_option("--max-iterations", bo.max_iters, "Iteration cap");
    baseline->add_option("--tolerance", bo.tol, "Stopping tolerance");

    auto* bound = app.add_subcommand("bound", "Utopian upper bound on any policy's return");
    bound->add_option("--benchmark", common.benchmark, "Benchmark id")->required();
    bound->add_option("--gamma", common.gamma, "Discount factor (default 0.95)");

    auto* bench = app.add_subcommand("benchmark", "Write a generated benchmark as a problem file");
    bench->add_option("--benchmark", common.benchmark, "Benchmark id")->required();
    bench->add_option("--gamma", common.gamma, "Discount factor stored in the file");
    bench->add_option("--out", common.out, "Output directory");
    bench->add_option("--output", output, "Explicit output path");

    auto* expect = app.add_subcommand("expect", "Closed-form beta expectations");
    expect->add_option("--demo", demo, "Named demo: example5");
    expect->add_option("--alpha", alpha, "Beta alpha");
    expect->add_option("--beta", beta, "Beta beta");
    expect->add_option("--kernel", kernel, "monomial:n,m | beta:a,b | pwl:l,r,a,b[,...]");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        std::ostringstream help_out, help_err;
        const int code = app.exit(e, help_out, help_err);
        out << help_out.str();
        err << help_err.str();
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*solve) return cmd_solve(common, so, eo, args, out);
        if (*evaluate) return cmd_evaluate(common, policy, archive, eo, args, out);
        if (*baseline) return cmd_baseline(common, bo, eo, args, out);
        if (*bound) return cmd_bound(common, out);
        if (*bench) return cmd_benchmark(common, output, out);
        if (*expect) return cmd_expect(demo, alpha, beta, kernel, out);
    } catch (const Error& e) {
        err << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error[config]: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error[numeric]: " << e.what() << '\n';
        return kNumericError;
    }
    return kConfigError;
}

}  // namespace halp::cli
