#include "halp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "halp/error.hpp"

namespace halp {

HybridMDP::HybridMDP(std::vector<VariableSpec> states, std::vector<VariableSpec> actions,
                     std::vector<TransitionFactor> transitions, std::vector<RewardFactor> rewards, double discount,
                     double r_max)
    : states_(std::move(states)),
      actions_(std::move(actions)),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      transition_index_(states_.size(), -1),
      discount_(discount),
      r_max_(r_max) {
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        const int child = std::visit([](const auto& t) { return t.child; }, transitions_[i]);
        if (child >= 0 && child < state_count() && transition_index_[child] < 0) {
            transition_index_[child] = static_cast<int>(i);
        }
    }
}

const VariableSpec& HybridMDP::variable(int joint_id) const {
    if (joint_id < 0 || joint_id >= joint_count()) {
        throw ContractViolation("variable id " + std::to_string(joint_id) + " out of range");
    }
    return joint_id < state_count() ? states_[joint_id] : actions_[joint_id - state_count()];
}

std::string HybridMDP::variable_name(int joint_id) const {
    return variable(joint_id).name;
}

std::optional<int> HybridMDP::find_variable(std::string_view name) const {
    for (int i = 0; i < joint_count(); ++i) {
        if (variable(i).name == name) return i;
    }
    return std::nullopt;
}

const TransitionFactor* HybridMDP::transition_of(int child) const {
    if (child < 0 || child >= state_count() || transition_index_[child] < 0) return nullptr;
    return &transitions_[transition_index_[child]];
}

std::size_t HybridMDP::action_space_size() const {
    std::size_t n = 1;
    for (const auto& a : actions_) {
        if (!a.discrete()) throw CapabilityError("continuous action variable '" + a.name + "' cannot be enumerated");
        n *= static_cast<std::size_t>(a.levels);
    }
    return n;
}

std::vector<double> HybridMDP::action_from_index(std::size_t index) const {
    std::vector<double> a(actions_.size());
    for (std::size_t k = actions_.size(); k-- > 0;) {
        const auto levels = static_cast<std::size_t>(actions_[k].levels);
        a[k] = static_cast<double>(index % levels);
        index /= levels;
    }
    return a;
}

void HybridMDP::set_noop_action(std::vector<double> a) {
    if (a.size() != actions_.size()) throw ContractViolation("no-op action has the wrong arity");
    noop_ = std::move(a);
}

void HybridMDP::set_initial_state(std::vector<double> x) {
    if (x.size() != states_.size()) throw ContractViolation("initial state has the wrong arity");
    initial_ = std::move(x);
}

void HybridMDP::set_discount(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("discount must lie in [0, 1)");
    discount_ = gamma;
}

std::vector<double> HybridMDP::joint(std::span<const double> x, std::span<const double> a) const {
    if (x.size() != states_.size()) {
        throw ContractViolation("state assignment has " + std::to_string(x.size()) + " values, model has " +
                                std::to_string(states_.size()));
    }
    if (a.size() != actions_.size()) {
        throw ContractViolation("action assignment has " + std::to_string(a.size()) + " values, model has " +
                                std::to_string(actions_.size()));
    }
    std::vector<double> z(x.begin(), x.end());
    z.insert(z.end(), a.begin(), a.end());
    return z;
}

double reward_joint(const HybridMDP& mdp, std::span<const double> z) {
    if (static_cast<int>(z.size()) != mdp.joint_count()) throw ContractViolation("reward: joint assignment has the wrong size");
    double r = 0.0;
    for (const auto& f : mdp.rewards()) r += f.term.eval(z);
    return r;
}

double reward(const HybridMDP& mdp, std::span<const double> x, std::span<const double> a) {
    const auto z = mdp.joint(x, a);
    return reward_joint(mdp, z);
}

std::vector<MixtureComponent> mixture_at(const HybridMDP& mdp, const ContinuousTransition& t,
                                         std::span<const double> z) {
    std::vector<MixtureComponent> out;
    out.reserve(t.components.size());
    for (const auto& c : t.components) {
        const double a = c.alpha.eval(z);
        const double b = c.beta.eval(z);
        if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
            throw NumericError("transition factor for '" + mdp.variable_name(t.child) +
                               "': non-positive beta parameter (alpha=" + format_double(a) +
                               ", beta=" + format_double(b) + ")");
        }
        out.push_back({c.weight, {a, b}});
    }
    return out;
}

std::vector<double> distribution_at(const HybridMDP& mdp, const DiscreteTransition& t, std::span<const double> z) {
    std::vector<double> p(t.thetas.size());
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        p[j] = t.thetas[j].eval(z);
        if (!(p[j] >= 0.0) || !std::isfinite(p[j])) {
            throw NumericError("transition factor for '" + mdp.variable_name(t.child) + "': negative discriminant");
        }
        s += p[j];
    }
    if (!(s > 0.0)) {
        throw NumericError("transition factor for '" + mdp.variable_name(t.child) + "': discriminants sum to zero");
    }
    for (double& v : p) v /= s;
    return p;
}

std::vector<double> sample_transition(const HybridMDP& mdp, std::span<const double> x, std::span<const double> a,
                                      Rng& rng) {
    const auto z = mdp.joint(x, a);
    std::vector<double> next(x.size());
    for (int i = 0; i < mdp.state_count(); ++i) {
        const TransitionFactor* f = mdp.transition_of(i);
        if (!f) throw ContractViolation("no transition factor for '" + mdp.variable_name(i) + "'");
        if (const auto* c = std::get_if<ContinuousTransition>(f)) {
            const auto mix = mixture_at(mdp, *c, z);
            std::size_t pick = 0;
            if (mix.size() > 1) {
                double u = rng.uniform();
                while (pick + 1 < mix.size() && u >= mix[pick].weight) {
                    u -= mix[pick].weight;
                    ++pick;
                }
            }
            next[i] = std::clamp(rng.beta(mix[pick].params.alpha, mix[pick].params.beta), 0.0, 1.0);
        } else {
            const auto p = distribution_at(mdp, std::get<DiscreteTransition>(*f), z);
            double u = rng.uniform();
            std::size_t j = 0;
            while (j + 1 < p.size() && u >= p[j]) {
                u -= p[j];
                ++j;
            }
            next[i] = static_cast<double>(j);
        }
    }
    return next;
}

namespace {

double uniform_value(const VariableSpec& v, Rng& rng) {
    if (v.discrete()) return static_cast<double>(rng.below(static_cast<std::uint64_t>(v.levels)));
    return rng.uniform();
}

}  // namespace

std::vector<double> sample_initial_state(const HybridMDP& mdp, Rng& rng) {
    if (mdp.initial_state()) return *mdp.initial_state();
    std::vector<double> x(mdp.states().size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = uniform_value(mdp.states()[i], rng);
    return x;
}

std::vector<double> sample_uniform_joint(const HybridMDP& mdp, Rng& rng) {
    std::vector<double> z(static_cast<std::size_t>(mdp.joint_count()));
    for (int i = 0; i < mdp.joint_count(); ++i) z[i] = uniform_value(mdp.variable(i), rng);
    return z;
}

namespace {

constexpr std::size_t kCornerCap = 1u << 16;

class Validator {
public:
    Validator(const HybridMDP& mdp) : mdp_(mdp) {}

    ValidationReport run(std::uint64_t seed) {
        structure();
        if (!report_.ok()) return std::move(report_);
        corners();
        Rng rng(seed);
        for (int k = 0; k < 1000; ++k) probe(sample_uniform_joint(mdp_, rng), true);
        return std::move(report_);
    }

private:
    void add(std::string msg) {
        if (seen_.insert(msg).second) report_.violations.push_back(std::move(msg));
    }

    bool valid_id(int id) const { return id >= 0 && id < mdp_.joint_count(); }

    void check_reads(const std::vector<int>& reads, const std::vector<int>& scope, const std::string& where) {
        for (int v : reads) {
            if (!valid_id(v)) {
                add(where + " reads an undeclared variable");
            } else if (std::find(scope.begin(), scope.end(), v) == scope.end()) {
                add(where + " reads '" + mdp_.variable_name(v) + "' outside its declared scope");
            }
        }
    }

    void structure() {
        std::set<std::string> names;
        for (int i = 0; i < mdp_.joint_count(); ++i) {
            const auto& v = mdp_.variable(i);
            if (v.name.empty()) add("variable " + std::to_string(i) + " has an empty name");
            if (!names.insert(v.name).second) add("duplicate variable name '" + v.name + "'");
            if (v.discrete() && v.levels < 2) add("discrete variable '" + v.name + "' needs at least 2 values");
        }
        if (!(mdp_.discount() >= 0.0 && mdp_.discount() < 1.0)) add("discount outside [0, 1)");
        if (!(mdp_.r_max() > 0.0)) add("R_max must be positive");

        std::vector<int> count(mdp_.states().size(), 0);
        for (const auto& tf : mdp_.transitions()) {
            const int child = std::visit([](const auto& t) { return t.child; }, tf);
            if (child < 0 || child >= mdp_.state_count()) {
                add("transition factor child out of range");
                continue;
            }
            const std::string where = "transition factor for '" + mdp_.variable_name(child) + "'";
            if (++count[child] == 2) add("duplicate transition factor for '" + mdp_.variable_name(child) + "'");
            const auto& parents = std::visit([](const auto& t) -> const std::vector<int>& { return t.parents; }, tf);
            for (int p : parents) {
                if (!valid_id(p)) add(where + " has an undeclared parent");
            }
            if (const auto* c = std::get_if<ContinuousTransition>(&tf)) {
                if (mdp_.states()[child].discrete()) add(where + ": beta mixture on a discrete child");
                if (c->components.empty()) add(where + " has no mixture components");
                double total = 0.0;
                for (const auto& comp : c->components) {
                    if (!(comp.weight >= 0.0)) add(where + ": negative mixture weight");
                    total += comp.weight;
                    check_reads(comp.alpha.variables(), parents, where);
                    check_reads(comp.beta.variables(), parents, where);
                }
                if (std::fabs(total - 1.0) > 1e-9) add(where + ": mixture weights do not sum to 1");
            } else {
                const auto& d = std::get<DiscreteTransition>(tf);
                const auto& spec = mdp_.states()[child];
                if (!spec.discrete()) {
                    add(where + ": discriminants on a continuous child");
                } else if (static_cast<int>(d.thetas.size()) != spec.levels) {
                    add(where + ": expected " + std::to_string(spec.levels) + " discriminants");
                }
                for (const auto& th : d.thetas) check_reads(th.variables(), parents, where);
            }
        }
        for (int i = 0; i < mdp_.state_count(); ++i) {
            if (count[i] == 0) add("missing transition factor for '" + mdp_.variable_name(i) + "'");
        }
        for (std::size_t j = 0; j < mdp_.rewards().size(); ++j) {
            const auto& r = mdp_.rewards()[j];
            std::vector<int> scope = r.state_scope;
            scope.insert(scope.end(), r.action_scope.begin(), r.action_scope.end());
            const std::string where = "reward factor " + std::to_string(j);
            for (int v : r.state_scope) {
                if (!(v >= 0 && v < mdp_.state_count())) add(where + ": state scope holds a non-state variable");
            }
            for (int v : r.action_scope) {
                if (!(v >= mdp_.state_count() && v < mdp_.joint_count())) {
                    add(where + ": action scope holds a non-action variable");
                }
            }
            check_reads(r.term.variables(), scope, where);
        }
    }

    // Enumerate each factor's local scope over discrete values and {0, 0.5, 1}.
    void corners() {
        for (const auto& tf : mdp_.transitions()) {
            const auto& parents = std::visit([](const auto& t) -> const std::vector<int>& { return t.parents; }, tf);
            enumerate_local(parents, [&](const std::vector<double>& z) { probe_factor(tf, z); });
        }
        for (const auto& r : mdp_.rewards()) {
            std::vector<int> scope = r.state_scope;
            scope.insert(scope.end(), r.action_scope.begin(), r.action_scope.end());
            enumerate_local(scope, [&](const std::vector<double>& z) {
                const double v = r.term.eval(z);
                if (!std::isfinite(v)) add("reward factor evaluates to a non-finite value");
                if (v < -1e-12) add("reward factor evaluates to a negative value");
            });
        }
        // Whole-model corners: every action with all continuous values equal.
        std::size_t actions = 1;
        try {
            actions = std::min<std::size_t>(mdp_.action_space_size(), 1000);
        } catch (const CapabilityError&) {
            actions = 1;
        }
        for (double c : {0.0, 0.5, 1.0}) {
            for (std::size_t k = 0; k < actions; ++k) {
                std::vector<double> z(static_cast<std::size_t>(mdp_.joint_count()), 0.0);
                for (int i = 0; i < mdp_.state_count(); ++i) {
                    if (!mdp_.states()[i].discrete()) z[i] = c;
                }
                if (mdp_.action_count() > 0 && mdp_.actions().front().discrete()) {
                    const auto a = mdp_.action_from_index(k);
                    std::copy(a.begin(), a.end(), z.begin() + mdp_.state_count());
                }
                probe(z, true);
            }
        }
    }

    template <class F>
    void enumerate_local(const std::vector<int>& scope, F&& fn) {
        std::vector<std::vector<double>> values;
        std::size_t total = 1;
        for (int v : scope) {
            const auto& spec = mdp_.variable(v);
            std::vector<double> vals;
            if (spec.discrete()) {
                for (int k = 0; k < spec.levels; ++k) vals.push_back(k);
            } else {
                vals = {0.0, 0.5, 1.0};
            }
            total *= vals.size();
            values.push_back(std::move(vals));
            if (total > kCornerCap) return;
        }
        std::vector<double> z(static_cast<std::size_t>(mdp_.joint_count()), 0.0);
        std::vector<std::size_t> idx(scope.size(), 0);
        for (std::size_t n = 0; n < total; ++n) {
            for (std::size_t i = 0; i < scope.size(); ++i) z[scope[i]] = values[i][idx[i]];
            fn(z);
            for (std::size_t i = scope.size(); i-- > 0;) {
                if (++idx[i] < values[i].size()) break;
                idx[i] = 0;
            }
        }
    }

    void probe_factor(const TransitionFactor& tf, const std::vector<double>& z) {
        try {
            if (const auto* c = std::get_if<ContinuousTransition>(&tf)) {
                mixture_at(mdp_, *c, z);
            } else {
                distribution_at(mdp_, std::get<DiscreteTransition>(tf), z);
            }
        } catch (const NumericError& e) {
            add(std::string(e.what()).find("beta parameter") != std::string::npos
                    ? "non-positive beta parameter in transition factor for '" +
                          mdp_.variable_name(std::visit([](const auto& t) { return t.child; }, tf)) + "'"
                    : e.what());
        }
    }

    void probe(const std::vector<double>& z, bool check_reward) {
        for (const auto& tf : mdp_.transitions()) probe_factor(tf, z);
        if (!check_reward) return;
        const double r = reward_joint(mdp_, z);
        if (!std::isfinite(r)) add("reward evaluates to a non-finite value");
        else if (r < -1e-12) add("reward below zero");
        else if (r > mdp_.r_max() * (1.0 + 1e-12)) add("reward exceeds R_max");
    }

    const HybridMDP& mdp_;
    ValidationReport report_;
    std::set<std::string> seen_;
};

}  // namespace

ValidationReport validate(const HybridMDP& mdp, std::uint64_t seed) {
    return Validator(mdp).run(seed);
}

}  // namespace halp
