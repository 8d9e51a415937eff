#include "halp/halp.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "halp/error.hpp"

namespace halp {

const char* to_string(HalpStatus s) noexcept {
    switch (s) {
        case HalpStatus::Optimal: return "optimal";
        case HalpStatus::IterationCapped: return "iteration-capped";
        case HalpStatus::Infeasible: return "infeasible";
        case HalpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

std::vector<double> build_objective(std::span<const BasisFunction> basis, const StateRelevanceDensity& psi) {
    std::vector<double> alpha;
    alpha.reserve(basis.size());
    for (const auto& f : basis) alpha.push_back(relevance_weight(f, psi));
    return alpha;
}

double weight_box(const HybridMDP& mdp, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("discount must lie in [0, 1)");
    return mdp.r_max() / (1.0 - gamma);
}

namespace {

HalpStatus from_lp(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return HalpStatus::Optimal;
        case LpStatus::Infeasible: return HalpStatus::Infeasible;
        case LpStatus::Unbounded: return HalpStatus::Unbounded;
        case LpStatus::IterationLimit: return HalpStatus::IterationCapped;
    }
    return HalpStatus::Infeasible;
}

using ProvenanceKey = std::vector<long long>;

ProvenanceKey key_of(const Constraint& c) {
    ProvenanceKey k;
    k.reserve(c.provenance.size());
    for (double v : c.provenance) k.push_back(std::llround(v * 1e9));
    return k;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

HalpSolution solve_relaxed(std::span<const double> objective, std::vector<Constraint> rows, const HybridMDP& mdp,
                           double gamma, const HalpLimits& limits) {
    RelaxedLP lp;
    lp.objective.assign(objective.begin(), objective.end());
    lp.rows = std::move(rows);
    if (limits.box) lp.box = weight_box(mdp, gamma);
    const LpResult r = solve_lp(lp, limits.lp);
    HalpSolution sol;
    sol.status = from_lp(r.status);
    sol.weights = r.weights;
    sol.objective = sol.weights.empty() ? 0.0 : dot(sol.weights, objective);
    sol.iterations = 1;
    sol.cuts = lp.rows.size();
    sol.rows = std::move(lp.rows);
    return sol;
}

HalpSolution mc_halp(const HybridMDP& mdp, std::span<const BasisFunction> basis, const StateRelevanceDensity& psi,
                     double gamma, const McConfig& cfg, Rng& rng, const HalpLimits& limits) {
    check_config(cfg);
    const auto alpha = build_objective(basis, psi);
    return solve_relaxed(alpha, sample_constraints(cfg.samples, basis, mdp, gamma, rng), mdp, gamma, limits);
}

HalpSolution cutting_plane(const HybridMDP& mdp, std::span<const BasisFunction> basis,
                           const StateRelevanceDensity& psi, double gamma, const Separator& separator,
                           const HalpLimits& limits) {
    const auto alpha = build_objective(basis, psi);
    RelaxedLP lp;
    lp.objective = alpha;
    if (limits.box) lp.box = weight_box(mdp, gamma);
    LpOptions opts = limits.lp;

    HalpSolution sol;
    LpResult r = solve_lp(lp, opts);
    std::set<ProvenanceKey> seen;
    LinearValueFunction v{std::vector<BasisFunction>(basis.begin(), basis.end()), {}};
    sol.status = HalpStatus::IterationCapped;
    while (r.status == LpStatus::Optimal && sol.iterations < limits.max_iterations) {
        ++sol.iterations;
        v.weights = r.weights;
        std::size_t added = 0;
        for (auto& c : separator(v)) {
            if (row_violation(c, v.weights) <= kViolationTol) continue;
            if (!seen.insert(key_of(c)).second) continue;
            lp.rows.push_back(std::move(c));
            ++added;
        }
        if (added == 0) {
            sol.status = HalpStatus::Optimal;
            break;
        }
        opts.warm_start = r.weights;
        r = solve_lp(lp, opts);
    }
    if (r.status != LpStatus::Optimal) sol.status = from_lp(r.status);
    sol.weights = r.weights;
    sol.objective = sol.weights.empty() ? 0.0 : dot(sol.weights, alpha);
    sol.cuts = lp.rows.size();
    sol.rows = std::move(lp.rows);
    return sol;
}

HalpSolution cutting_plane(const HybridMDP& mdp, std::span<const BasisFunction> basis,
                           const StateRelevanceDensity& psi, double gamma, const OracleConfig& oracle,
                           std::uint64_t seed, const HalpLimits& limits) {
    check_config(oracle);
    if (const auto* eps = std::get_if<EpsConfig>(&oracle)) {
        const ViolationTables tables(basis, mdp, gamma, make_eps_grid(mdp, eps->eps));
        const auto sep = [&](const LinearValueFunction& v) {
            std::vector<Constraint> out;
            const auto g = most_violated_on_grid(tables, v.weights, eps->elimination);
            if (g.tau > kViolationTol) out.push_back(make_constraint(v.basis, mdp, gamma, g.point));
            return out;
        };
        return cutting_plane(mdp, basis, psi, gamma, sep, limits);
    }
    Rng rng(seed);
    if (const auto* mc = std::get_if<McConfig>(&oracle)) {
        const auto sep = [&](const LinearValueFunction& v) { return oracle_mc(*mc, v, mdp, gamma, rng); };
        return cutting_plane(mdp, basis, psi, gamma, sep, limits);
    }
    const auto& mcmc = std::get<McmcConfig>(oracle);
    const auto sep = [&](const LinearValueFunction& v) { return oracle_mcmc(mcmc, v, mdp, gamma, rng); };
    return cutting_plane(mdp, basis, psi, gamma, sep, limits);
}

double delta_infeasibility(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, const GridSpec& grid,
                           const EliminationOptions& opts) {
    const ViolationTables tables(v.basis, mdp, gamma, grid);
    const auto g = most_violated_on_grid(tables, v.weights, opts);
    return std::max(0.0, violation(v, mdp, gamma, g.point));
}

double delta_infeasibility(const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                           const OracleConfig& probe, std::uint64_t seed) {
    check_config(probe);
    if (const auto* eps = std::get_if<EpsConfig>(&probe)) {
        return delta_infeasibility(v, mdp, gamma, make_eps_grid(mdp, eps->eps), eps->elimination);
    }
    if (const auto* mcmc = std::get_if<McmcConfig>(&probe)) {
        return std::max(0.0, run_mcmc(*mcmc, v, mdp, gamma, seed).best_tau);
    }
    const auto& mc = std::get<McConfig>(probe);
    Rng rng(seed);
    double delta = 0.0;
    for (std::size_t s = 0; s < mc.samples; ++s) {
        delta = std::max(delta, violation(v, mdp, gamma, sample_uniform_joint(mdp, rng)));
    }
    return delta;
}

}  // namespace halp
