#include "halp/oracles.hpp"

#include <algorithm>
#include <cmath>

#include "halp/error.hpp"

namespace halp {

void check_config(const OracleConfig& cfg) {
    if (const auto* mc = std::get_if<McConfig>(&cfg)) {
        if (mc->samples < 1) throw ConfigError("MC oracle needs at least one sample");
    } else if (const auto* e = std::get_if<EpsConfig>(&cfg)) {
        if (!(e->eps > 0.0 && e->eps <= 1.0)) throw ConfigError("grid resolution must satisfy 0 < eps <= 1");
    } else {
        const auto& m = std::get<McmcConfig>(cfg);
        if (m.chains < 1) throw ConfigError("MCMC oracle needs at least one chain");
        if (m.sweeps < 1) throw ConfigError("MCMC oracle needs at least one sweep");
        if (!(m.temp_c > 0.0)) throw ConfigError("initial temperature must be positive");
        if (m.inner_steps < 1) throw ConfigError("MCMC oracle needs at least one inner Metropolis step");
    }
}

double violation(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, std::span<const double> z) {
    if (v.basis.size() != v.weights.size()) throw ContractViolation("value function: basis and weight counts differ");
    const auto f = constraint_coefficients(v.basis, mdp, gamma, z);
    double tau = reward_joint(mdp, z);
    for (std::size_t i = 0; i < f.size(); ++i) tau -= v.weights[i] * f[i];
    return tau;
}

double violation(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, std::span<const double> x,
                 std::span<const double> a) {
    const auto z = mdp.joint(x, a);
    return violation(v, mdp, gamma, z);
}

Constraint make_constraint(std::span<const BasisFunction> basis, const HybridMDP& mdp, double gamma,
                           std::span<const double> z) {
    Constraint c;
    c.coefficients = constraint_coefficients(basis, mdp, gamma, z);
    c.rhs = reward_joint(mdp, z);
    c.provenance.assign(z.begin(), z.end());
    return c;
}

double row_violation(const Constraint& c, std::span<const double> w) {
    if (w.size() != c.coefficients.size()) throw ContractViolation("row width differs from weight vector");
    double tau = c.rhs;
    for (std::size_t i = 0; i < w.size(); ++i) tau -= w[i] * c.coefficients[i];
    return tau;
}

namespace {

bool is_plain_pwl(const BasisFunction& f) {
    return f.discrete_vars.empty() && f.factors.size() == 1 && std::holds_alternative<Pwl>(f.factors[0].kernel);
}

// Canonical segments of sum_i w_i p_i over the union of knots.
PwlSegments merge_pwl(const std::vector<std::pair<double, const PwlSegments*>>& parts) {
    std::vector<double> knots{0.0, 1.0};
    for (const auto& [w, segs] : parts) {
        for (const auto& s : *segs) {
            knots.push_back(s.l);
            knots.push_back(s.r);
        }
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    PwlSegments out;
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
        PwlSegment m{knots[j], knots[j + 1], 0.0, 0.0};
        for (const auto& [w, segs] : parts) {
            for (const auto& s : *segs) {
                if (s.l <= m.l && m.r <= s.r) {
                    m.a += w * s.a;
                    m.b += w * s.b;
                }
            }
        }
        if (m.a != 0.0 || m.b != 0.0) out.push_back(m);
    }
    return out;
}

void add_unique(std::vector<int>& scope) {
    std::sort(scope.begin(), scope.end());
    scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
}

}  // namespace

ViolationFunction::ViolationFunction(const LinearValueFunction& v, const HybridMDP& mdp, double gamma)
    : v_(v), mdp_(mdp), gamma_(gamma), terms_of_(static_cast<std::size_t>(mdp.joint_count())) {
    if (v.basis.size() != v.weights.size()) throw ContractViolation("value function: basis and weight counts differ");
    const auto push = [&](Term t, std::vector<int> scope) {
        add_unique(scope);
        for (int k : scope) terms_of_[k].push_back(terms_.size());
        terms_.push_back(std::move(t));
    };
    std::vector<std::vector<std::pair<double, const PwlSegments*>>> pwl_of(mdp.states().size());
    for (std::size_t i = 0; i < v.basis.size(); ++i) {
        const auto& f = v.basis[i];
        if (v.weights[i] == 0.0) continue;
        if (is_plain_pwl(f) && std::holds_alternative<ContinuousTransition>(*mdp.transition_of(f.factors[0].target))) {
            pwl_of[f.factors[0].target].emplace_back(v.weights[i], &std::get<Pwl>(f.factors[0].kernel).segments);
            continue;
        }
        push(Term{Term::Kind::Basis, i, {}}, coefficient_scope(f, mdp));
    }
    for (std::size_t c = 0; c < pwl_of.size(); ++c) {
        if (pwl_of[c].empty()) continue;
        Term t{Term::Kind::MergedPwl, c, Pwl{merge_pwl(pwl_of[c])}};
        const int target = static_cast<int>(c);
        push(std::move(t), coefficient_scope(BasisFunction::univariate(target, Monomial{1, 0}), mdp));
    }
    for (std::size_t j = 0; j < mdp.rewards().size(); ++j) {
        const auto& r = mdp.rewards()[j];
        std::vector<int> scope = r.state_scope;
        scope.insert(scope.end(), r.action_scope.begin(), r.action_scope.end());
        push(Term{Term::Kind::Reward, j, {}}, std::move(scope));
    }
}

double ViolationFunction::term(const Term& t, std::span<const double> z) const {
    switch (t.kind) {
        case Term::Kind::Basis:
            return -v_.weights[t.index] * constraint_coefficient(v_.basis[t.index], mdp_, gamma_, z);
        case Term::Kind::MergedPwl: {
            const double fx = eval_pwl(t.merged.segments, z[t.index]);
            if (gamma_ == 0.0) return -fx;
            const auto& tf = std::get<ContinuousTransition>(*mdp_.transition_of(static_cast<int>(t.index)));
            const auto mix = mixture_at(mdp_, tf, z);
            return -(fx - gamma_ * expect_mixture(mix, t.merged));
        }
        case Term::Kind::Reward:
            return mdp_.rewards()[t.index].term.eval(z);
    }
    return 0.0;
}

double ViolationFunction::total(std::span<const double> z) const {
    double s = 0.0;
    for (const auto& t : terms_) s += term(t, z);
    return s;
}

double ViolationFunction::local(int k, std::span<const double> z) const {
    double s = 0.0;
    for (std::size_t t : terms_of_[k]) s += term(terms_[t], z);
    return s;
}

std::vector<Constraint> sample_constraints(std::size_t n, std::span<const BasisFunction> basis, const HybridMDP& mdp,
                                           double gamma, Rng& rng) {
    std::vector<Constraint> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const auto z = sample_uniform_joint(mdp, rng);
        out.push_back(make_constraint(basis, mdp, gamma, z));
    }
    return out;
}

std::vector<Constraint> oracle_mc(const McConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp,
                                  double gamma, Rng& rng) {
    check_config(cfg);
    std::vector<Constraint> out;
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        const auto z = sample_uniform_joint(mdp, rng);
        Constraint c = make_constraint(v.basis, mdp, gamma, z);
        if (row_violation(c, v.weights) > kViolationTol) out.push_back(std::move(c));
    }
    return out;
}

GridArgmax most_violated_on_grid(const ViolationTables& tables, std::span<const double> weights,
                                 const EliminationOptions& opts) {
    const CostNetwork net = tables.network(weights, ViolationSense::MostViolated);
    const auto order = min_degree_order(net);
    auto res = eliminate_argmin(net, order, opts);
    GridArgmax g;
    g.tau = -res.value;
    g.point = tables.grid().point(res.assignment);
    g.levels = std::move(res.assignment);
    return g;
}

std::optional<Constraint> oracle_eps(const EpsConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp,
                                     double gamma) {
    check_config(cfg);
    const ViolationTables tables(v.basis, mdp, gamma, make_eps_grid(mdp, cfg.eps));
    const auto g = most_violated_on_grid(tables, v.weights, cfg.elimination);
    if (g.tau <= kViolationTol) return std::nullopt;
    Constraint c = make_constraint(v.basis, mdp, gamma, g.point);
    if (row_violation(c, v.weights) <= kViolationTol) return std::nullopt;
    return c;
}

std::vector<double> gibbs_conditional(std::span<const double> log_weights) {
    if (log_weights.empty()) throw ContractViolation("gibbs_conditional: no levels");
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    std::vector<double> p(log_weights.size());
    double norm = 0.0;
    for (std::size_t l = 0; l < p.size(); ++l) norm += (p[l] = std::exp(log_weights[l] - top));
    for (double& q : p) q /= norm;
    return p;
}

double cooling_temperature(double c, int t) {
    if (t <= 0) return c;
    return c / std::log(static_cast<double>(t) + 2.0);
}

McmcTrace run_mcmc(const McmcConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                   std::uint64_t seed) {
    check_config(cfg);
    const ViolationFunction tau(v, mdp, gamma);
    const int nj = mdp.joint_count();
    McmcTrace trace;
    std::vector<double> scratch;

    for (int chain = 0; chain < cfg.chains; ++chain) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(chain)));
        std::vector<double> z = sample_uniform_joint(mdp, rng);
        std::vector<double> last;
        const auto test = [&](double current) {
            if (current > trace.best_tau) {
                trace.best_tau = current;
                trace.best_point = z;
            }
            if (current <= kViolationTol || z == last) return;
            Constraint c = make_constraint(v.basis, mdp, gamma, z);
            if (row_violation(c, v.weights) > kViolationTol) {
                trace.violated.push_back(std::move(c));
                last = z;
            }
        };
        test(tau.total(z));

        for (int t = 1; t <= cfg.sweeps; ++t) {
            const double inv = 1.0 / cooling_temperature(cfg.temp_c, t) - 1.0;
            for (int k = 0; k < nj; ++k) {
                const auto& spec = mdp.variable(k);
                const double old_value = z[k];
                const double old_local = tau.local(k, z);
                double cand = old_value;
                double cand_local = old_local;
                if (spec.discrete()) {
                    // exact conditional p(z_k | rest) proportional to exp(tau)
                    scratch.assign(static_cast<std::size_t>(spec.levels), 0.0);
                    for (int l = 0; l < spec.levels; ++l) {
                        z[k] = l;
                        scratch[l] = tau.local(k, z);
                    }
                    const auto probs = gibbs_conditional(scratch);
                    double u = rng.uniform();
                    int pick = 0;
                    for (; pick + 1 < spec.levels; ++pick) {
                        u -= probs[pick];
                        if (u < 0.0) break;
                    }
                    cand = pick;
                    cand_local = scratch[pick];
                } else {
                    // independence Metropolis on U[0,1] proposals
                    for (int s = 0; s < cfg.inner_steps; ++s) {
                        const double y = rng.uniform();
                        z[k] = y;
                        const double ly = tau.local(k, z);
                        if (ly >= cand_local || rng.uniform() < std::exp(ly - cand_local)) {
                            cand = y;
                            cand_local = ly;
                        }
                    }
                }
                const double gain = inv * (cand_local - old_local);
                const bool accept = gain >= 0.0 || rng.uniform() < std::exp(gain);
                z[k] = accept ? cand : old_value;
            }
            test(tau.total(z));
        }
        trace.final_states.push_back(z);
    }
    return trace;
}

std::vector<Constraint> oracle_mcmc(const McmcConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp,
                                    double gamma, Rng& rng) {
    return run_mcmc(cfg, v, mdp, gamma, rng.next_u64()).violated;
}

double grid_resolution_for_delta(double delta, int term_count, double k_loc) {
    if (!(delta > 0.0) || term_count < 1 || !(k_loc > 0.0)) {
        throw ContractViolation("grid_resolution_for_delta: arguments must be positive");
    }
    return 2.0 * delta / (static_cast<double>(term_count) * k_loc);
}

}  // namespace halp
