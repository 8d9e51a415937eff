#include "halp/basis.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "halp/error.hpp"
#include "halp/numerics.hpp"

namespace halp {

BasisFunction BasisFunction::constant() {
    return {};
}

BasisFunction BasisFunction::univariate(int target, UnivariateKernel k) {
    BasisFunction f;
    f.factors.push_back({target, std::move(k)});
    return f;
}

BasisFunction BasisFunction::product(std::vector<UnivariateFactor> factors) {
    BasisFunction f;
    f.factors = std::move(factors);
    return f;
}

BasisFunction BasisFunction::indicator(const HybridMDP& mdp, int var, int value) {
    const auto& spec = mdp.variable(var);
    if (!spec.discrete() || var >= mdp.state_count()) {
        throw ConfigError("indicator basis needs a discrete state variable");
    }
    BasisFunction f;
    f.discrete_vars = {var};
    f.discrete_sizes = {spec.levels};
    f.table.assign(static_cast<std::size_t>(spec.levels), 0.0);
    f.table.at(static_cast<std::size_t>(value)) = 1.0;
    return f;
}

std::vector<int> BasisFunction::scope() const {
    std::vector<int> s = discrete_vars;
    for (const auto& u : factors) s.push_back(u.target);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

void check_basis(const HybridMDP& mdp, const BasisFunction& f) {
    if (f.discrete_vars.size() != f.discrete_sizes.size()) throw ConfigError("basis: discrete sizes mismatch");
    std::size_t total = 1;
    for (std::size_t i = 0; i < f.discrete_vars.size(); ++i) {
        const int v = f.discrete_vars[i];
        if (v < 0 || v >= mdp.state_count() || !mdp.states()[v].discrete()) {
            throw ConfigError("basis: discrete part must reference discrete state variables");
        }
        if (f.discrete_sizes[i] != mdp.states()[v].levels) throw ConfigError("basis: table size disagrees with model");
        total *= static_cast<std::size_t>(f.discrete_sizes[i]);
    }
    if (f.table.size() != total) throw ConfigError("basis: table has the wrong number of entries");
    for (double t : f.table) {
        if (!std::isfinite(t)) throw ConfigError("basis: non-finite table entry");
    }
    std::vector<int> seen;
    for (const auto& u : f.factors) {
        if (u.target < 0 || u.target >= mdp.state_count() || mdp.states()[u.target].discrete()) {
            throw ConfigError("basis: univariate factors must target continuous state variables");
        }
        if (std::find(seen.begin(), seen.end(), u.target) != seen.end()) {
            throw ConfigError("basis: two factors on '" + mdp.variable_name(u.target) + "'");
        }
        seen.push_back(u.target);
        if (const auto* p = std::get_if<Pwl>(&u.kernel)) check_pwl(p->segments);
        if (const auto* b = std::get_if<BetaPdf>(&u.kernel)) {
            if (!(b->shape.alpha > 0.0 && b->shape.beta > 0.0)) throw ConfigError("basis: beta factor needs positive shape");
        }
        if (const auto* m = std::get_if<Monomial>(&u.kernel)) {
            if (m->n < 0 || m->m < 0) throw ConfigError("basis: monomial exponents must be nonnegative");
        }
    }
}

namespace {

double read_state(std::span<const double> x, int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= x.size()) {
        throw ContractViolation("basis function reads state variable " + std::to_string(id) +
                                " missing from the assignment");
    }
    return x[static_cast<std::size_t>(id)];
}

std::size_t table_index(const BasisFunction& f, std::span<const double> x) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < f.discrete_vars.size(); ++i) {
        const long v = std::lround(read_state(x, f.discrete_vars[i]));
        idx = idx * static_cast<std::size_t>(f.discrete_sizes[i]) + static_cast<std::size_t>(v);
    }
    return idx;
}

// Child transition parameters evaluated lazily and shared across basis functions.
class Backprojector {
public:
    Backprojector(const HybridMDP& mdp, std::span<const double> z)
        : mdp_(mdp), z_(z), mixtures_(mdp.states().size()), dists_(mdp.states().size()) {}

    double operator()(const BasisFunction& f) {
        double g = 1.0;
        for (const auto& u : f.factors) {
            g *= expect_mixture(mixture(u.target), u.kernel);
            if (g == 0.0) return 0.0;
        }
        if (f.discrete_vars.empty()) return g * f.table[0];
        std::vector<const std::vector<double>*> p;
        for (int v : f.discrete_vars) p.push_back(&distribution(v));
        double sum = 0.0;
        std::vector<int> idx(f.discrete_vars.size(), 0);
        for (std::size_t n = 0; n < f.table.size(); ++n) {
            double w = f.table[n];
            for (std::size_t i = 0; i < idx.size() && w != 0.0; ++i) w *= (*p[i])[idx[i]];
            sum += w;
            for (std::size_t i = idx.size(); i-- > 0;) {
                if (++idx[i] < f.discrete_sizes[i]) break;
                idx[i] = 0;
            }
        }
        return g * sum;
    }

private:
    const TransitionFactor& factor(int child) const {
        const TransitionFactor* t = mdp_.transition_of(child);
        if (!t) throw ContractViolation("no transition factor for '" + mdp_.variable_name(child) + "'");
        return *t;
    }

    const std::vector<MixtureComponent>& mixture(int child) {
        auto& slot = mixtures_[child];
        if (!slot) {
            const auto* c = std::get_if<ContinuousTransition>(&factor(child));
            if (!c) {
                throw CapabilityError("continuous basis factor on '" + mdp_.variable_name(child) +
                                      "' has no closed form against a discriminant transition");
            }
            slot = mixture_at(mdp_, *c, z_);
        }
        return *slot;
    }

    const std::vector<double>& distribution(int child) {
        auto& slot = dists_[child];
        if (!slot) {
            const auto* d = std::get_if<DiscreteTransition>(&factor(child));
            if (!d) {
                throw CapabilityError("discrete basis table on '" + mdp_.variable_name(child) +
                                      "' has no closed form against a beta-mixture transition");
            }
            slot = distribution_at(mdp_, *d, z_);
        }
        return *slot;
    }

    const HybridMDP& mdp_;
    std::span<const double> z_;
    std::vector<std::optional<std::vector<MixtureComponent>>> mixtures_;
    std::vector<std::optional<std::vector<double>>> dists_;
};

}  // namespace

double evaluate(const BasisFunction& f, std::span<const double> x) {
    double v = f.table[f.discrete_vars.empty() ? 0 : table_index(f, x)];
    for (const auto& u : f.factors) {
        if (v == 0.0) return 0.0;
        v *= eval_kernel(u.kernel, read_state(x, u.target));
    }
    return v;
}

double value(const LinearValueFunction& v, std::span<const double> x) {
    if (v.basis.size() != v.weights.size()) throw ContractViolation("value function: basis and weight counts differ");
    double s = 0.0;
    for (std::size_t i = 0; i < v.basis.size(); ++i) {
        if (v.weights[i] != 0.0) s += v.weights[i] * evaluate(v.basis[i], x);
    }
    return s;
}

double backproject(const BasisFunction& f, const HybridMDP& mdp, std::span<const double> z) {
    if (static_cast<int>(z.size()) != mdp.joint_count()) throw ContractViolation("backproject: joint assignment has the wrong size");
    return Backprojector(mdp, z)(f);
}

double constraint_coefficient(const BasisFunction& f, const HybridMDP& mdp, double gamma, std::span<const double> z) {
    const double fx = evaluate(f, z);
    if (gamma == 0.0) return fx;
    return fx - gamma * backproject(f, mdp, z);
}

std::vector<double> constraint_coefficients(std::span<const BasisFunction> basis, const HybridMDP& mdp, double gamma,
                                            std::span<const double> z) {
    if (static_cast<int>(z.size()) != mdp.joint_count()) {
        throw ContractViolation("constraint_coefficients: joint assignment has the wrong size");
    }
    Backprojector g(mdp, z);
    std::vector<double> out(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        out[i] = evaluate(basis[i], z);
        if (gamma != 0.0) out[i] -= gamma * g(basis[i]);
    }
    return out;
}

std::vector<int> coefficient_scope(const BasisFunction& f, const HybridMDP& mdp) {
    std::vector<int> s = f.scope();
    const std::size_t own = s.size();
    for (std::size_t i = 0; i < own; ++i) {
        const TransitionFactor* t = mdp.transition_of(s[i]);
        if (!t) continue;
        const auto& parents = std::visit([](const auto& tf) -> const std::vector<int>& { return tf.parents; }, *t);
        s.insert(s.end(), parents.begin(), parents.end());
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Integral over [0,1] of a PWL density times x^n (1-x)^m.
double pwl_monomial(const PwlSegments& density, const Monomial& mono) {
    double total = 0.0;
    for (const auto& s : density) {
        for (int k = 0; k <= mono.m; ++k) {
            const double c = binomial(mono.m, k) * ((k % 2) ? -1.0 : 1.0);
            const int p = mono.n + k;
            const auto antideriv = [&](double x) {
                return s.a * std::pow(x, p + 2) / (p + 2) + s.b * std::pow(x, p + 1) / (p + 1);
            };
            total += c * (antideriv(s.r) - antideriv(s.l));
        }
    }
    return total;
}

double expect_under(const MarginalDensity& d, const UnivariateKernel& k) {
    if (std::holds_alternative<UniformDensity>(d)) return expect_kernel({1.0, 1.0}, k);
    if (const auto* b = std::get_if<BetaPdf>(&d)) return expect_kernel(b->shape, k);
    if (const auto* p = std::get_if<Pwl>(&d)) {
        if (const auto* m = std::get_if<Monomial>(&k)) return pwl_monomial(p->segments, *m);
        throw CapabilityError("relevance weight: piecewise linear density pairs only with monomial factors");
    }
    throw ContractViolation("relevance weight: categorical density on a continuous variable");
}

}  // namespace

StateRelevanceDensity::StateRelevanceDensity(const HybridMDP& mdp, std::vector<RelevanceComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw ConfigError("relevance density needs at least one component");
    double total = 0.0;
    for (auto& c : components_) {
        if (!(c.weight >= 0.0)) throw ConfigError("relevance density: negative component weight");
        total += c.weight;
        if (static_cast<int>(c.marginals.size()) != mdp.state_count()) {
            throw ConfigError("relevance density: one marginal per state variable required");
        }
        for (int i = 0; i < mdp.state_count(); ++i) {
            auto& m = c.marginals[i];
            const auto& spec = mdp.states()[i];
            if (spec.discrete()) {
                if (std::holds_alternative<UniformDensity>(m)) {
                    m = Categorical{std::vector<double>(spec.levels, 1.0 / spec.levels)};
                }
                const auto* cat = std::get_if<Categorical>(&m);
                if (!cat || static_cast<int>(cat->probs.size()) != spec.levels) {
                    throw ConfigError("relevance density: '" + spec.name + "' needs a categorical marginal");
                }
                double s = 0.0;
                for (double p : cat->probs) {
                    if (!(p >= 0.0)) throw ConfigError("relevance density: negative probability");
                    s += p;
                }
                if (std::fabs(s - 1.0) > 1e-9) throw ConfigError("relevance density: marginal of '" + spec.name + "' does not sum to 1");
            } else if (const auto* p = std::get_if<Pwl>(&m)) {
                check_pwl(p->segments);
                std::vector<double> knots;
                for (const auto& s : p->segments) {
                    knots.push_back(s.l);
                    knots.push_back(s.r);
                }
                for (double u : knots) {
                    for (double x : {u, std::max(0.0, u - 1e-12)}) {
                        if (eval_pwl(p->segments, x) < -1e-12) {
                            throw ConfigError("relevance density: negative density for '" + spec.name + "'");
                        }
                    }
                }
                const auto q = integrate([&](double x) { return eval_pwl(p->segments, x); }, 0.0, 1.0, knots, 1e-12);
                if (std::fabs(q.value - 1.0) > 1e-8) {
                    throw ConfigError("relevance density: marginal of '" + spec.name + "' integrates to " +
                                      format_double(q.value));
                }
            } else if (const auto* b = std::get_if<BetaPdf>(&m)) {
                if (!(b->shape.alpha > 0.0 && b->shape.beta > 0.0)) {
                    throw ConfigError("relevance density: beta marginal needs positive shape");
                }
            } else if (!std::holds_alternative<UniformDensity>(m)) {
                throw ConfigError("relevance density: categorical marginal on continuous '" + spec.name + "'");
            }
        }
    }
    if (std::fabs(total - 1.0) > 1e-9) throw ConfigError("relevance density: component weights do not sum to 1");
}

StateRelevanceDensity StateRelevanceDensity::uniform(const HybridMDP& mdp) {
    RelevanceComponent c;
    c.weight = 1.0;
    c.marginals.assign(mdp.states().size(), UniformDensity{});
    return StateRelevanceDensity(mdp, {std::move(c)});
}

double relevance_weight(const BasisFunction& f, const StateRelevanceDensity& psi) {
    double total = 0.0;
    for (const auto& c : psi.components()) {
        if (c.weight == 0.0) continue;
        double e = 1.0;
        for (const auto& u : f.factors) e *= expect_under(c.marginals.at(u.target), u.kernel);
        double d = f.table[0];
        if (!f.discrete_vars.empty()) {
            d = 0.0;
            std::vector<int> idx(f.discrete_vars.size(), 0);
            for (std::size_t n = 0; n < f.table.size(); ++n) {
                double w = f.table[n];
                for (std::size_t i = 0; i < idx.size(); ++i) {
                    w *= std::get<Categorical>(c.marginals.at(f.discrete_vars[i])).probs[idx[i]];
                }
                d += w;
                for (std::size_t i = idx.size(); i-- > 0;) {
                    if (++idx[i] < f.discrete_sizes[i]) break;
                    idx[i] = 0;
                }
            }
        }
        total += c.weight * e * d;
    }
    return total;
}

}  // namespace halp
