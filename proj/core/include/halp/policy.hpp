#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "halp/baselines.hpp"
#include "halp/basis.hpp"
#include "halp/model.hpp"
#include "halp/topology.hpp"

namespace halp {

struct GreedyPolicy {
    LinearValueFunction v;
    double gamma = 0.95;
};
struct FixedPolicy {
    std::vector<double> action;
};
struct RandomPolicy {};
/// Emits the model's designated no-op action.
struct DummyPolicy {};
struct GridGreedyPolicy {
    std::shared_ptr<const GridValue> value;
};

using Policy = std::variant<GreedyPolicy, FixedPolicy, RandomPolicy, DummyPolicy, GridGreedyPolicy>;

/// argmax_a R(x, a) + gamma E[V(x') | x, a], ties broken toward the
/// lexicographically smallest action. Enumerates a single action variable;
/// factored action spaces go through variable elimination with x fixed.
std::vector<double> greedy_action(const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                                  std::span<const double> x);

/// Stateless per-step decision; rng feeds the random policy.
std::vector<double> act(const Policy& pi, const HybridMDP& mdp, std::span<const double> x, Rng& rng);

struct TrajectoryStats {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation across trajectories
    std::size_t count = 0;
    int horizon = 0;
    std::uint64_t seed = 0;
};

inline constexpr int kDefaultHorizon = 300;

/// Discounted returns sum_{t<H} gamma^t R(x_t, a_t) of n_traj rollouts from
/// the model's initial-state distribution. Trajectory k draws from its own
/// stream derived from `seed`.
TrajectoryStats evaluate_policy(const HybridMDP& mdp, const Policy& pi, double gamma, std::size_t n_traj,
                                int horizon, std::uint64_t seed);

/// (n + 1) / (1 - gamma) E_{Beta(20,2)}[x^2].
double utopian_bound_ring(int n, double gamma = 0.95);

/// (1 - gamma)^{-1} [0.2 n_in + (n - n_out) max_x E_{Beta(46x+2, 46(1-x)+2)}[R]].
double utopian_bound_irrigation(const Topology& t, double gamma = 0.95);

}  // namespace halp
