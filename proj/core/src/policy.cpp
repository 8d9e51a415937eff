#include "halp/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "halp/bench.hpp"
#include "halp/costnet.hpp"
#include "halp/error.hpp"
#include "halp/numerics.hpp"

namespace halp {

namespace {

constexpr std::size_t kEnumerateLimit = 64;

bool touches_action(const BasisFunction& f, const HybridMDP& mdp) {
    for (int k : coefficient_scope(f, mdp)) {
        if (k >= mdp.state_count()) return true;
    }
    return false;
}

std::vector<double> greedy_by_elimination(const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                                          std::span<const double> x) {
    GridSpec grid;
    for (int s = 0; s < mdp.state_count(); ++s) grid.values.push_back({x[s]});
    for (const auto& a : mdp.actions()) {
        std::vector<double> lv(static_cast<std::size_t>(a.levels));
        for (int l = 0; l < a.levels; ++l) lv[l] = l;
        grid.values.push_back(std::move(lv));
    }
    std::vector<BasisFunction> basis;
    std::vector<double> w;
    for (std::size_t i = 0; i < v.basis.size(); ++i) {
        if (v.weights[i] == 0.0 || !touches_action(v.basis[i], mdp)) continue;
        basis.push_back(v.basis[i]);
        w.push_back(v.weights[i]);
    }
    const ViolationTables tables(basis, mdp, gamma, grid);
    const CostNetwork net = tables.network(w, ViolationSense::MostViolated);
    const auto res = eliminate_argmin(net, min_degree_order(net));
    const auto z = grid.point(res.assignment);
    return {z.begin() + mdp.state_count(), z.end()};
}

}  // namespace

std::vector<double> greedy_action(const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                                  std::span<const double> x) {
    for (const auto& a : mdp.actions()) {
        if (!a.discrete()) throw CapabilityError("greedy policy over continuous action '" + a.name + "'");
    }
    if (v.basis.size() != v.weights.size()) throw ContractViolation("value function: basis and weight counts differ");
    if (static_cast<int>(x.size()) != mdp.state_count()) throw ContractViolation("greedy_action: state has the wrong size");
    const std::size_t na = mdp.action_space_size();
    if (mdp.action_count() > 1 && na > kEnumerateLimit) return greedy_by_elimination(v, mdp, gamma, x);

    // Action-independent terms shift every Q value equally and are skipped.
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < v.basis.size(); ++i) {
        if (v.weights[i] != 0.0 && touches_action(v.basis[i], mdp)) live.push_back(i);
    }
    std::vector<double> best;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
        auto act = mdp.action_from_index(a);
        const auto z = mdp.joint(x, act);
        double q = reward_joint(mdp, z);
        for (std::size_t i : live) q += gamma * v.weights[i] * backproject(v.basis[i], mdp, z);
        if (q > best_q) {
            best_q = q;
            best = std::move(act);
        }
    }
    return best;
}

std::vector<double> act(const Policy& pi, const HybridMDP& mdp, std::span<const double> x, Rng& rng) {
    struct Visitor {
        const HybridMDP& mdp;
        std::span<const double> x;
        Rng& rng;
        std::vector<double> operator()(const GreedyPolicy& p) const { return greedy_action(p.v, mdp, p.gamma, x); }
        std::vector<double> operator()(const FixedPolicy& p) const { return p.action; }
        std::vector<double> operator()(const RandomPolicy&) const {
            std::vector<double> a;
            for (const auto& v : mdp.actions()) {
                a.push_back(v.discrete() ? static_cast<double>(rng.below(static_cast<std::uint64_t>(v.levels)))
                                         : rng.uniform());
            }
            return a;
        }
        std::vector<double> operator()(const DummyPolicy&) const {
            if (!mdp.noop_action()) throw ConfigError("model has no designated no-op action");
            return *mdp.noop_action();
        }
        std::vector<double> operator()(const GridGreedyPolicy& p) const {
            return mdp.action_from_index(p.value->greedy_action(x));
        }
    };
    return std::visit(Visitor{mdp, x, rng}, pi);
}

TrajectoryStats evaluate_policy(const HybridMDP& mdp, const Policy& pi, double gamma, std::size_t n_traj,
                                int horizon, std::uint64_t seed) {
    if (n_traj < 1) throw ConfigError("policy evaluation needs at least one trajectory");
    if (horizon < 1) throw ConfigError("policy evaluation needs a positive horizon");
    std::vector<double> returns(n_traj);
    for (std::size_t k = 0; k < n_traj; ++k) {
        Rng rng(derive_seed(seed, k));
        std::vector<double> x = sample_initial_state(mdp, rng);
        double discount = 1.0;
        double total = 0.0;
        for (int t = 0; t < horizon; ++t) {
            const auto a = act(pi, mdp, x, rng);
            total += discount * reward(mdp, x, a);
            discount *= gamma;
            if (t + 1 < horizon) x = sample_transition(mdp, x, a, rng);
        }
        returns[k] = total;
    }
    TrajectoryStats st;
    st.count = n_traj;
    st.horizon = horizon;
    st.seed = seed;
    for (double r : returns) st.mean += r;
    st.mean /= static_cast<double>(n_traj);
    if (n_traj > 1) {
        double ss = 0.0;
        for (double r : returns) ss += (r - st.mean) * (r - st.mean);
        st.std = std::sqrt(ss / static_cast<double>(n_traj - 1));
    }
    return st;
}

double utopian_bound_ring(int n, double gamma) {
    if (n < 1) throw ConfigError("ring size must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("discount must lie in [0, 1)");
    return (n + 1) / (1.0 - gamma) * expect_monomial({20.0, 2.0}, 2, 0);
}

double utopian_bound_irrigation(const Topology& t, double gamma) {
    if (!is_irrigation(t)) throw ConfigError("utopian irrigation bound needs an irrigation topology");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("discount must lie in [0, 1)");
    const IrrigationShape shape = irrigation_shape(t);
    const std::array<double, 2> knots{0.4, 0.55};
    double best = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = i * 1e-3;
        const BetaParams p{46.0 * x + 2.0, 46.0 * (1.0 - x) + 2.0};
        const auto q = integrate([&](double u) { return beta_pdf(u, p) * irrigation_reward(u); }, 0.0, 1.0, knots,
                                 1e-12, 1e-10);
        best = std::max(best, q.value);
    }
    return (0.2 * shape.inflow + (shape.channels - shape.outflow) * best) / (1.0 - gamma);
}

}  // namespace halp
