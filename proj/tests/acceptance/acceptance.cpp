// Acceptance suite: one PASS/FAIL line per criterion.
//
//   halp_acceptance            run every criterion
//   halp_acceptance 3 5 10     run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "halp/baselines.hpp"
#include "halp/bench.hpp"
#include "halp/halp.hpp"
#include "halp/io.hpp"
#include "halp/policy.hpp"
#include "halp_cli/cli.hpp"
#include "reference.hpp"

using namespace halp;

namespace {

constexpr double kGamma = 0.95;
constexpr std::uint64_t kBatchSeed = 1000;  // batch k evaluates with seed 1000 + k
constexpr int kBatch = 10;
constexpr std::size_t kTrajectories = 100;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Mean of per-seed means over the standard batch.
double batch_return(const HybridMDP& mdp, const std::function<Policy(std::uint64_t)>& policy_for) {
    double sum = 0.0;
    for (int k = 0; k < kBatch; ++k) {
        const std::uint64_t s = kBatchSeed + static_cast<std::uint64_t>(k);
        sum += evaluate_policy(mdp, policy_for(s), kGamma, kTrajectories, kDefaultHorizon, s).mean;
    }
    return sum / kBatch;
}

LinearValueFunction random_weights(const std::vector<BasisFunction>& basis, Rng& rng, double scale) {
    LinearValueFunction v{basis, {}};
    for (std::size_t i = 0; i < basis.size(); ++i) v.weights.push_back(scale * (2.0 * rng.uniform() - 1.0));
    return v;
}

// 1 ---------------------------------------------------------------------------

Outcome example5() {
    const BetaParams p{15.0, 8.0};
    const PwlSegments tent{{0.3, 0.5, 5.0, -1.5}, {0.5, 0.7, -5.0, 3.5}};
    const std::function<double()> calls[] = {
        [&] { return expect_monomial(p, 4, 0); },
        [&] { return expect_beta_pdf(p, {2.0, 6.0}); },
        [&] { return expect_pwl(p, tent); },
    };
    const double want[] = {0.20, 0.22, 0.30};
    Outcome o{true, ""};
    for (int i = 0; i < 3; ++i) {
        constexpr int reps = 1000;
        double v = 0.0;
        const auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) v = calls[i]();
        const double ms = 1e3 * seconds_since(t0) / reps;
        o.pass = o.pass && std::fabs(v - want[i]) <= 0.005 && ms < 1.0;
        o.detail += fmt("%s%.4f (%.4f ms)", i ? ", " : "", v, ms);
    }
    return o;
}

// 2 ---------------------------------------------------------------------------

Outcome quadrature() {
    Rng rng(2);
    const auto t0 = Clock::now();
    double worst[3] = {0.0, 0.0, 0.0};
    for (int t = 0; t < 1000; ++t) {
        const double a = 0.5 + 49.5 * rng.uniform();
        const double b = 0.5 + 49.5 * rng.uniform();

        const int n = static_cast<int>(rng.below(11));
        const int m = static_cast<int>(rng.below(11));
        const double mono = ref::beta_expectation(a, b, [&](double x) { return std::pow(x, n) * std::pow(1.0 - x, m); });
        worst[0] = std::max(worst[0], std::fabs(expect_monomial({a, b}, n, m) - mono));

        const BetaParams f{1.0 + 19.0 * rng.uniform(), 1.0 + 19.0 * rng.uniform()};
        const double bp = ref::beta_expectation(a, b, [&](double x) { return ref::beta_density(x, f.alpha, f.beta); });
        worst[1] = std::max(worst[1], std::fabs(expect_beta_pdf({a, b}, f) - bp));

        PwlSegments segs;
        double pw = 0.0;
        const int pieces = 1 + static_cast<int>(rng.below(4));
        for (int k = 0; k < pieces; ++k) {
            double l = rng.uniform(), r = rng.uniform();
            if (l > r) std::swap(l, r);
            const double sa = 4.0 * rng.uniform() - 2.0, sb = 4.0 * rng.uniform() - 2.0;
            segs.push_back({l, r, sa, sb});
            pw += ref::beta_expectation(a, b, [&](double x) { return sa * x + sb; }, l, r);
        }
        worst[2] = std::max(worst[2], std::fabs(expect_pwl({a, b}, segs) - pw));
    }
    const double secs = seconds_since(t0);
    const double w = std::max({worst[0], worst[1], worst[2]});
    return {w <= 1e-6 && secs < 30.0,
            fmt("max |err| monomial %.1e, beta-pdf %.1e, pwl %.1e; %.1f s", worst[0], worst[1], worst[2], secs)};
}

// 3 ---------------------------------------------------------------------------

Outcome bounds() {
    struct Case {
        double got, want, tol;
        const char* name;
    };
    const std::vector<Case> cases{
        {utopian_bound_ring(4, kGamma), 83.0, 0.5, "ring4"},
        {utopian_bound_irrigation(IrrigationRing{6}), 49.1, 0.491, "ring6"},
        {utopian_bound_irrigation(IrrigationRing{12}), 79.2, 0.792, "ring12"},
        {utopian_bound_irrigation(IrrigationRing{18}), 109.2, 1.092, "ring18"},
        {utopian_bound_irrigation(IrrigationRingOfRings{6}), 59.1, 0.591, "ror6"},
        {utopian_bound_irrigation(IrrigationRingOfRings{12}), 99.2, 0.992, "ror12"},
        {utopian_bound_irrigation(IrrigationRingOfRings{18}), 139.3, 1.393, "ror18"},
        {utopian_bound_irrigation(IrrigationGrid{3, 3}), 87.2, 0.872, "grid3x3"},
    };
    Outcome o{true, ""};
    for (const auto& c : cases) {
        o.pass = o.pass && std::fabs(c.got - c.want) <= c.tol;
        o.detail += fmt("%s%s %.2f", o.detail.empty() ? "" : ", ", c.name, c.got);
    }
    return o;
}

// 4 ---------------------------------------------------------------------------

Outcome dominance() {
    const auto t0 = Clock::now();
    const auto b = make_discrete_ring_admin(2);
    const auto states = ref::all_states(b.mdp);
    std::vector<std::vector<double>> joints;
    for (const auto& x : states) {
        for (std::size_t a = 0; a < b.mdp.action_space_size(); ++a) joints.push_back(b.mdp.joint(x, b.mdp.action_from_index(a)));
    }
    const Separator all = [&](const LinearValueFunction& v) {
        std::vector<Constraint> out;
        for (const auto& z : joints) out.push_back(make_constraint(v.basis, b.mdp, kGamma, z));
        return out;
    };
    const auto sol = cutting_plane(b.mdp, b.basis, StateRelevanceDensity::uniform(b.mdp), kGamma, all);
    const auto vstar = ref::exact_vi(b.mdp, kGamma, 1e-12);
    const LinearValueFunction v{b.basis, sol.weights};
    double gap = 1e300;
    for (std::size_t i = 0; i < states.size(); ++i) gap = std::min(gap, value(v, states[i]) - vstar[i]);
    const double secs = seconds_since(t0);
    return {sol.status == HalpStatus::Optimal && gap >= -1e-8 && secs < 1.0,
            fmt("%zu constraints, min V^w - V* = %.3e; %.3f s", joints.size(), gap, secs)};
}

// 5 ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    const auto b = make_ring_admin(4);
    const auto grid = make_eps_grid(b.mdp, 0.25);
    const ViolationTables tables(b.basis, b.mdp, kGamma, grid);
    Rng rng(5);
    int match = 0;
    for (int t = 0; t < 20; ++t) {
        const auto v = random_weights(b.basis, rng, 10.0);
        const auto expect = ref::enumerate_violation(v, b.mdp, kGamma, grid);
        const auto got = most_violated_on_grid(tables, v.weights);
        const auto cut = oracle_eps({0.25, {}}, v, b.mdp, kGamma);
        const bool same = std::fabs(got.tau - expect.tau) <= 1e-9 * std::max(1.0, std::fabs(expect.tau)) &&
                          got.point == expect.point && cut.has_value() == (expect.tau > kViolationTol) &&
                          (!cut || cut->provenance == expect.point);
        match += same;
    }
    const double secs = seconds_since(t0);
    return {match == 20 && secs < 10.0, fmt("%d/20 match over 5^4 x 5 points; %.2f s", match, secs)};
}

// 6 ---------------------------------------------------------------------------

Outcome ring_policy() {
    const auto t0 = Clock::now();
    const auto b = make_ring_admin(4);
    const auto sol = cutting_plane(b.mdp, b.basis, StateRelevanceDensity::uniform(b.mdp), kGamma,
                                   OracleConfig{EpsConfig{0.125, {}}}, 0);
    const Policy pi = GreedyPolicy{{b.basis, sol.weights}, kGamma};
    const double ret = batch_return(b.mdp, [&](std::uint64_t) { return pi; });
    const double bound = utopian_bound_ring(4, kGamma);
    const double secs = seconds_since(t0);
    return {sol.status == HalpStatus::Optimal && ret >= 48.0 && ret <= bound && secs < 300.0,
            fmt("eps-HALP return %.2f (bound %.1f), %d rounds; %.1f s", ret, bound, sol.iterations, secs)};
}

// 7 ---------------------------------------------------------------------------

Outcome heuristics() {
    const auto b = make_ring_admin(4);
    const char* names[] = {"dummy", "random", "server"};
    const double want[] = {25.0, 42.1, 47.6};
    Outcome o{true, ""};
    for (int i = 0; i < 3; ++i) {
        const Policy pi = heuristic(names[i], b.mdp);
        const double ret = batch_return(b.mdp, [&](std::uint64_t) { return pi; });
        o.pass = o.pass && std::fabs(ret - want[i]) <= 3.0;
        o.detail += fmt("%s%s %.2f", i ? ", " : "", names[i], ret);
    }
    return o;
}

// 8 ---------------------------------------------------------------------------

Outcome mcmc_effectiveness() {
    const auto t0 = Clock::now();
    const auto b = make_ring_admin(4);
    const ViolationTables tables(b.basis, b.mdp, kGamma, make_eps_grid(b.mdp, 1.0 / 32.0));
    Rng rng(8);
    int hits = 0;
    double worst = 1e300;
    for (int t = 0; t < 20; ++t) {
        const auto v = random_weights(b.basis, rng, 10.0);
        const double grid_max = most_violated_on_grid(tables, v.weights).tau;
        const auto trace = run_mcmc(McmcConfig{}, v, b.mdp, kGamma, 800 + static_cast<std::uint64_t>(t));
        const double ratio = trace.best_tau / grid_max;
        worst = std::min(worst, ratio);
        hits += grid_max > 0.0 && trace.best_tau >= 0.9 * grid_max;
    }
    const double secs = seconds_since(t0);
    return {hits >= 16 && secs < 120.0, fmt("%d/20 reach 0.9 x grid max (worst ratio %.3f); %.1f s", hits, worst, secs)};
}

// 9 ---------------------------------------------------------------------------

Outcome irrigation_ordering() {
    const auto t0 = Clock::now();
    const auto b = make_irrigation(IrrigationRing{6});
    const auto psi = StateRelevanceDensity::uniform(b.mdp);
    const std::uint64_t seed = 1;

    Rng rng(seed);
    const auto mc = mc_halp(b.mdp, b.basis, psi, kGamma, McConfig{10000}, rng);
    const auto mcmc = cutting_plane(b.mdp, b.basis, psi, kGamma, OracleConfig{McmcConfig{}}, seed);

    const auto ret = [&](const HalpSolution& s) {
        return evaluate_policy(b.mdp, GreedyPolicy{{b.basis, s.weights}, kGamma}, kGamma, kTrajectories,
                               kDefaultHorizon, kBatchSeed)
            .mean;
    };
    const double r_mc = ret(mc);
    const double r_mcmc = ret(mcmc);
    const double floor = 0.7 * utopian_bound_irrigation(IrrigationRing{6});
    const double secs = seconds_since(t0);
    return {mcmc.objective >= mc.objective && r_mc > floor && r_mcmc > floor && secs < 900.0,
            fmt("objective MCMC %.2f vs MC %.2f; returns MCMC %.2f, MC %.2f (floor %.2f); %.0f s", mcmc.objective,
                mc.objective, r_mcmc, r_mc, floor, secs)};
}

// 10 --------------------------------------------------------------------------

Outcome cost_networks() {
    const auto t0 = Clock::now();
    Rng rng(10);
    int agree = 0;
    for (int t = 0; t < 500; ++t) {
        const int vars = 3 + static_cast<int>(rng.below(4));
        std::vector<int> levels;
        for (int i = 0; i < vars; ++i) levels.push_back(2 + static_cast<int>(rng.below(3)));
        CostNetwork net(levels);
        const int factors = 2 + static_cast<int>(rng.below(6));
        for (int k = 0; k < factors; ++k) {
            std::vector<int> scope;
            for (int i = 0; i < vars; ++i) {
                if (rng.uniform() < 0.4) scope.push_back(i);
            }
            std::size_t size = 1;
            for (int v : scope) size *= static_cast<std::size_t>(levels[v]);
            TableFactor f{scope, {}};
            for (std::size_t j = 0; j < size; ++j) f.values.push_back(std::round(16.0 * rng.uniform() - 8.0) / 2.0);
            net.add_factor(std::move(f));
        }
        std::vector<int> best;
        const double expect = ref::enumerate_network(net, &best);
        const auto got = eliminate_argmin(net, min_degree_order(net));
        agree += std::fabs(got.value - expect) <= 1e-12 && got.assignment == best;
    }

    // constraint graph of the 4-ring under a_1 with the univariate basis
    const auto ring = make_ring_admin(4);
    LinearValueFunction uni{{BasisFunction::constant()}, {1.0}};
    for (int i = 0; i < 4; ++i) {
        uni.basis.push_back(BasisFunction::univariate(i, Monomial{1, 0}));
        uni.weights.push_back(1.0);
    }
    auto ring_grid = make_eps_grid(ring.mdp, 0.25);
    ring_grid.values[4] = {0.0};
    const int ring_width = min_degree_order(build_violation_network(uni, ring.mdp, kGamma, ring_grid)).induced_width;

    const auto grid = make_irrigation(IrrigationGrid{3, 3});
    const LinearValueFunction all{grid.basis, std::vector<double>(grid.basis.size(), 1.0)};
    const int grid_width =
        min_degree_order(build_violation_network(all, grid.mdp, kGamma, make_eps_grid(grid.mdp, 0.5))).induced_width;

    const double secs = seconds_since(t0);
    return {agree == 500 && ring_width == 1 && grid_width == 6 && secs < 30.0,
            fmt("%d/500 agree; 4-ring width %d; 3x3 grid width %d; %.2f s", agree, ring_width, grid_width, secs)};
}

// 11 --------------------------------------------------------------------------

Outcome baselines() {
    const auto t0 = Clock::now();
    const auto b = make_ring_admin(4);

    const double r_grid = batch_return(b.mdp, [&](std::uint64_t s) {
        Rng rng(s);
        auto pts = uniform_random_grid(b.mdp, 1250, rng);
        const auto res = grid_vi(b.mdp, pts, kGamma);
        return Policy{GridGreedyPolicy{std::make_shared<const GridValue>(b.mdp, std::move(pts), res.values, kGamma)}};
    });

    const auto l2 = l2_vi(b.mdp, b.basis, kGamma, uniform_state_grid(b.mdp, 0.125));
    const Policy l2_pi = GreedyPolicy{{b.basis, l2.weights}, kGamma};
    const double r_l2 = batch_return(b.mdp, [&](std::uint64_t) { return l2_pi; });

    const auto d = make_discrete_ring_admin(2);
    const auto states = ref::all_states(d.mdp);
    const auto exact = ref::exact_vi(d.mdp, kGamma, 1e-12);
    const auto gv = grid_vi(d.mdp, states, kGamma, 100000, 1e-12);
    double diff = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) diff = std::max(diff, std::fabs(gv.values[i] - exact[i]));

    const double secs = seconds_since(t0);
    const auto in_band = [](double r) { return r >= 47.0 && r <= 56.0; };
    return {in_band(r_grid) && in_band(r_l2) && diff <= 1e-8,
            fmt("grid VI %.2f, L2 VI %.2f, discrete |grid - exact| %.1e; %.0f s", r_grid, r_l2, diff, secs)};
}

// 12 --------------------------------------------------------------------------

Outcome determinism() {
    const auto root = std::filesystem::temp_directory_path() / "halp-acceptance-determinism";
    const std::vector<std::vector<std::string>> runs{
        {"solve", "--benchmark", "ring4", "--oracle", "eps", "--eps", "0.125", "--seed", "7"},
        {"solve", "--benchmark", "ring4", "--oracle", "mc", "--samples", "1250", "--seed", "3", "--seeds", "2"},
        {"solve", "--benchmark", "ring3", "--oracle", "mcmc", "--chains", "5", "--sweeps", "50", "--seed", "11"},
        {"evaluate", "--benchmark", "ring4", "--policy", "random", "--seed", "5"},
        {"baseline", "--benchmark", "ring4", "--method", "l2-vi", "--grid", "uniform", "--eps", "0.25", "--seed", "2"},
        {"baseline", "--benchmark", "ring2", "--method", "grid-vi", "--points", "200", "--seed", "2"},
    };
    int same = 0;
    std::string failed;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        std::vector<std::vector<std::pair<std::string, std::string>>> outputs;
        for (int rep = 0; rep < 2; ++rep) {
            const auto dir = root / std::to_string(k);
            std::filesystem::remove_all(dir);
            auto args = runs[k];
            args.insert(args.begin(), "halp");
            args.insert(args.end(), {"--trajectories", "20", "--out", dir.string()});
            std::ostringstream out, err;
            if (cli::run(args, out, err) != cli::kOk) break;
            std::vector<std::pair<std::string, std::string>> files;
            for (const auto& e : std::filesystem::directory_iterator(dir)) {
                const auto name = e.path().filename().string();
                if (name.ends_with(".json") || name.ends_with(".csv")) files.emplace_back(name, read_file(e.path().string()));
            }
            std::sort(files.begin(), files.end());
            outputs.push_back(std::move(files));
        }
        if (outputs.size() == 2 && !outputs[0].empty() && outputs[0] == outputs[1]) {
            ++same;
        } else {
            failed += " " + runs[k][0];
        }
    }
    std::filesystem::remove_all(root);
    return {same == static_cast<int>(runs.size()),
            fmt("%d/%zu command lines byte-identical on rerun%s", same, runs.size(), failed.c_str())};
}

struct Criterion {
    int id;
    const char* title;
    Outcome (*check)();
};

const Criterion kCriteria[] = {
    {1, "Example 5 expectations", example5},
    {2, "closed form vs quadrature", quadrature},
    {3, "utopian bounds", bounds},
    {4, "HALP dominates V* on the discrete ring", dominance},
    {5, "eps oracle equals enumeration", oracle_equivalence},
    {6, "eps-HALP policy on the 4-ring", ring_policy},
    {7, "heuristic returns", heuristics},
    {8, "MCMC oracle effectiveness", mcmc_effectiveness},
    {9, "MCMC vs MC ordering on irrigation ring 6", irrigation_ordering},
    {10, "cost network elimination and widths", cost_networks},
    {11, "grid VI and L2 VI baselines", baselines},
    {12, "CLI determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    int failures = 0;
    for (const auto& c : kCriteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
