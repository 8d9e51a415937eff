#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "halp/expr.hpp"
#include "halp/random.hpp"
#include "halp/special_fn.hpp"

namespace halp {

enum class VarKind { Discrete, Continuous };

/// A state or action variable. Continuous variables always live on [0, 1].
struct VariableSpec {
    std::string name;
    VarKind kind = VarKind::Continuous;
    int levels = 0;  ///< domain size for discrete variables, 0 otherwise

    bool discrete() const { return kind == VarKind::Discrete; }

    static VariableSpec continuous(std::string name) { return {std::move(name), VarKind::Continuous, 0}; }
    static VariableSpec discrete(std::string name, int levels) {
        return {std::move(name), VarKind::Discrete, levels};
    }
};

struct BetaComponent {
    double weight = 1.0;
    Expr alpha;
    Expr beta;
};

/// Beta-mixture transition for a continuous child.
struct ContinuousTransition {
    int child = 0;             ///< state index
    std::vector<int> parents;  ///< joint ids (state index, or state count + action index)
    std::vector<BetaComponent> components;
};

/// Discriminant transition for a discrete child: P(x' = j) = theta_j / sum theta.
struct DiscreteTransition {
    int child = 0;
    std::vector<int> parents;
    std::vector<Expr> thetas;
};

using TransitionFactor = std::variant<ContinuousTransition, DiscreteTransition>;

/// One additive reward term. Scopes hold joint ids.
struct RewardFactor {
    std::vector<int> state_scope;
    std::vector<int> action_scope;
    Expr term;
};

/// Hybrid factored MDP. Variables are addressed by a joint id: state i has
/// id i, action k has id state_count() + k. Assignments are plain vectors of
/// doubles with discrete values stored as integers.
class HybridMDP {
public:
    HybridMDP() = default;
    HybridMDP(std::vector<VariableSpec> states, std::vector<VariableSpec> actions,
              std::vector<TransitionFactor> transitions, std::vector<RewardFactor> rewards, double discount,
              double r_max);

    const std::vector<VariableSpec>& states() const { return states_; }
    const std::vector<VariableSpec>& actions() const { return actions_; }
    const std::vector<TransitionFactor>& transitions() const { return transitions_; }
    const std::vector<RewardFactor>& rewards() const { return rewards_; }
    double discount() const { return discount_; }
    double r_max() const { return r_max_; }

    int state_count() const { return static_cast<int>(states_.size()); }
    int action_count() const { return static_cast<int>(actions_.size()); }
    int joint_count() const { return state_count() + action_count(); }
    const VariableSpec& variable(int joint_id) const;
    std::string variable_name(int joint_id) const;
    std::optional<int> find_variable(std::string_view name) const;

    /// Transition factor for state variable `child`, or nullptr if missing.
    const TransitionFactor* transition_of(int child) const;

    /// Number of joint action assignments (product of action domain sizes).
    std::size_t action_space_size() const;
    /// Decode a joint action index into an action assignment (last variable fastest).
    std::vector<double> action_from_index(std::size_t index) const;

    /// Action treated as "do nothing" by the dummy heuristic.
    const std::optional<std::vector<double>>& noop_action() const { return noop_; }
    void set_noop_action(std::vector<double> a);

    /// Fixed initial state; uniform over the state space when absent.
    const std::optional<std::vector<double>>& initial_state() const { return initial_; }
    void set_initial_state(std::vector<double> x);

    void set_discount(double gamma);

    /// Concatenate state and action into a joint assignment.
    std::vector<double> joint(std::span<const double> x, std::span<const double> a) const;

private:
    std::vector<VariableSpec> states_;
    std::vector<VariableSpec> actions_;
    std::vector<TransitionFactor> transitions_;
    std::vector<RewardFactor> rewards_;
    std::vector<int> transition_index_;
    double discount_ = 0.95;
    double r_max_ = 1.0;
    std::optional<std::vector<double>> noop_;
    std::optional<std::vector<double>> initial_;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Structural checks plus deterministic probing of corner assignments
/// (all discrete values x continuous {0, 0.5, 1}, capped) and 1000 seeded
/// random assignments. Probing is a heuristic, not a proof of positivity.
ValidationReport validate(const HybridMDP& mdp, std::uint64_t seed = 0x5eed);

/// R(x, a) = sum_j R_j(x_j, a_j).
double reward(const HybridMDP& mdp, std::span<const double> x, std::span<const double> a);
/// Same on a joint assignment z.
double reward_joint(const HybridMDP& mdp, std::span<const double> z);

/// Evaluated shape parameters of every mixture component. Throws
/// NumericError naming the factor when a parameter is not positive.
std::vector<MixtureComponent> mixture_at(const HybridMDP& mdp, const ContinuousTransition& t,
                                         std::span<const double> z);

/// Normalized child distribution of a discrete factor.
std::vector<double> distribution_at(const HybridMDP& mdp, const DiscreteTransition& t, std::span<const double> z);

std::vector<double> sample_transition(const HybridMDP& mdp, std::span<const double> x, std::span<const double> a,
                                      Rng& rng);

/// Draw a state uniformly (discrete uniform x U[0,1]) or return the fixed
/// initial state when the model has one.
std::vector<double> sample_initial_state(const HybridMDP& mdp, Rng& rng);

/// Draw a uniform state and action as a joint assignment.
std::vector<double> sample_uniform_joint(const HybridMDP& mdp, Rng& rng);

}  // namespace halp
