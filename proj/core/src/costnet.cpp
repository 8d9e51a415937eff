#include "halp/costnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "halp/error.hpp"

namespace halp {

namespace {

std::vector<std::size_t> row_major_strides(const std::vector<int>& scope, const std::vector<int>& levels) {
    std::vector<std::size_t> s(scope.size());
    std::size_t acc = 1;
    for (std::size_t k = scope.size(); k-- > 0;) {
        s[k] = acc;
        acc *= static_cast<std::size_t>(levels[scope[k]]);
    }
    return s;
}

std::size_t table_size(const std::vector<int>& scope, const std::vector<int>& levels) {
    std::size_t n = 1;
    for (int v : scope) n *= static_cast<std::size_t>(levels[v]);
    return n;
}

}  // namespace

CostNetwork::CostNetwork(std::vector<int> levels) : levels_(std::move(levels)) {
    for (int l : levels_) {
        if (l < 1) throw ContractViolation("cost network variables need at least one level");
    }
}

void CostNetwork::add_factor(TableFactor f) {
    std::vector<int> sorted = f.scope;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw ContractViolation("table factor scope repeats a variable");
    }
    for (int v : f.scope) {
        if (v < 0 || v >= variable_count()) throw ContractViolation("table factor scope references an undeclared variable");
    }
    if (f.values.size() != table_size(f.scope, levels_)) {
        throw ContractViolation("table factor has " + std::to_string(f.values.size()) + " entries, expected " +
                                std::to_string(table_size(f.scope, levels_)));
    }
    for (double v : f.values) {
        if (!std::isfinite(v)) throw NumericError("table factor holds a non-finite entry");
    }
    factors_.push_back(std::move(f));
}

double CostNetwork::evaluate(std::span<const int> assignment) const {
    if (static_cast<int>(assignment.size()) != variable_count()) throw ContractViolation("assignment has the wrong size");
    double s = 0.0;
    for (const auto& f : factors_) {
        std::size_t idx = 0;
        for (int v : f.scope) idx = idx * static_cast<std::size_t>(levels_[v]) + static_cast<std::size_t>(assignment[v]);
        s += f.values[idx];
    }
    return s;
}

std::vector<std::vector<int>> CostNetwork::interaction_graph() const {
    std::vector<std::vector<char>> adj(levels_.size(), std::vector<char>(levels_.size(), 0));
    for (const auto& f : factors_) {
        for (int a : f.scope) {
            for (int b : f.scope) {
                if (a != b) adj[a][b] = 1;
            }
        }
    }
    std::vector<std::vector<int>> out(levels_.size());
    for (std::size_t a = 0; a < adj.size(); ++a) {
        for (std::size_t b = 0; b < adj.size(); ++b) {
            if (adj[a][b]) out[a].push_back(static_cast<int>(b));
        }
    }
    return out;
}

std::string CostNetwork::to_dot(const std::function<std::string(int)>& name_of) const {
    const auto g = interaction_graph();
    std::ostringstream os;
    os << "graph costnet {\n";
    for (int v = 0; v < variable_count(); ++v) {
        os << "  n" << v << " [label=\"" << (name_of ? name_of(v) : std::to_string(v)) << " (" << levels_[v]
           << ")\"];\n";
    }
    for (int a = 0; a < variable_count(); ++a) {
        for (int b : g[a]) {
            if (a < b) os << "  n" << a << " -- n" << b << ";\n";
        }
    }
    os << "}\n";
    return os.str();
}

namespace {

int width_of(std::vector<std::vector<char>> adj, const std::vector<int>& sequence) {
    const std::size_t n = adj.size();
    std::vector<char> gone(n, 0);
    int width = 0;
    for (int v : sequence) {
        std::vector<int> nb;
        for (std::size_t u = 0; u < n; ++u) {
            if (!gone[u] && adj[v][u]) nb.push_back(static_cast<int>(u));
        }
        width = std::max(width, static_cast<int>(nb.size()));
        for (int a : nb) {
            for (int b : nb) {
                if (a != b) adj[a][b] = 1;
            }
        }
        gone[v] = 1;
    }
    return width;
}

std::vector<std::vector<char>> adjacency(const CostNetwork& net) {
    const auto g = net.interaction_graph();
    std::vector<std::vector<char>> adj(g.size(), std::vector<char>(g.size(), 0));
    for (std::size_t a = 0; a < g.size(); ++a) {
        for (int b : g[a]) adj[a][b] = 1;
    }
    return adj;
}

}  // namespace

EliminationOrder make_order(const CostNetwork& net, std::vector<int> sequence) {
    std::vector<int> check = sequence;
    std::sort(check.begin(), check.end());
    for (int i = 0; i < static_cast<int>(check.size()); ++i) {
        if (check[i] != i) throw ContractViolation("elimination order is not a permutation of the variables");
    }
    if (static_cast<int>(check.size()) != net.variable_count()) {
        throw ContractViolation("elimination order does not cover every variable");
    }
    EliminationOrder o;
    o.induced_width = width_of(adjacency(net), sequence);
    o.sequence = std::move(sequence);
    return o;
}

EliminationOrder min_degree_order(const CostNetwork& net) {
    if (net.variable_count() == 0) throw ContractViolation("min_degree_order: empty network");
    auto adj = adjacency(net);
    const std::size_t n = adj.size();
    std::vector<char> gone(n, 0);
    EliminationOrder o;
    for (std::size_t step = 0; step < n; ++step) {
        int best = -1;
        int best_deg = std::numeric_limits<int>::max();
        for (std::size_t v = 0; v < n; ++v) {
            if (gone[v]) continue;
            int deg = 0;
            for (std::size_t u = 0; u < n; ++u) deg += (!gone[u] && adj[v][u]) ? 1 : 0;
            if (deg < best_deg) {
                best_deg = deg;
                best = static_cast<int>(v);
            }
        }
        std::vector<int> nb;
        for (std::size_t u = 0; u < n; ++u) {
            if (!gone[u] && adj[best][u]) nb.push_back(static_cast<int>(u));
        }
        for (int a : nb) {
            for (int b : nb) {
                if (a != b) adj[a][b] = 1;
            }
        }
        o.induced_width = std::max(o.induced_width, best_deg);
        o.sequence.push_back(best);
        gone[best] = 1;
    }
    return o;
}

namespace {

struct Table {
    std::vector<int> scope;
    std::vector<std::size_t> strides;
    std::vector<double> values;

    double at(const std::vector<int>& assignment) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < scope.size(); ++k) idx += strides[k] * static_cast<std::size_t>(assignment[scope[k]]);
        return values[idx];
    }
};
using TablePtr = std::shared_ptr<const Table>;

struct RunResult {
    double value = 0.0;
    std::vector<int> assignment;
    bool tie = false;
    int width = 0;
};

bool close(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * std::max(1.0, std::max(std::fabs(a), std::fabs(b)));
}

// Restrict a factor to the free variables; fixed[v] >= 0 pins v to a level.
TablePtr slice(const TableFactor& f, const std::vector<int>& levels, const std::vector<int>& fixed) {
    auto t = std::make_shared<Table>();
    const auto full_strides = row_major_strides(f.scope, levels);
    std::size_t base = 0;
    std::vector<std::size_t> free_strides;
    for (std::size_t k = 0; k < f.scope.size(); ++k) {
        const int v = f.scope[k];
        if (fixed[v] >= 0) {
            base += full_strides[k] * static_cast<std::size_t>(fixed[v]);
        } else {
            t->scope.push_back(v);
            free_strides.push_back(full_strides[k]);
        }
    }
    t->strides = row_major_strides(t->scope, levels);
    if (t->scope.size() == f.scope.size()) {
        t->values = f.values;
        return t;
    }
    const std::size_t n = table_size(t->scope, levels);
    t->values.resize(n);
    std::vector<int> ctr(t->scope.size(), 0);
    std::size_t src = base;
    for (std::size_t i = 0; i < n; ++i) {
        t->values[i] = f.values[src];
        for (std::size_t k = t->scope.size(); k-- > 0;) {
            src += free_strides[k];
            if (++ctr[k] < levels[t->scope[k]]) break;
            src -= free_strides[k] * static_cast<std::size_t>(levels[t->scope[k]]);
            ctr[k] = 0;
        }
    }
    return t;
}

RunResult run(const CostNetwork& net, const EliminationOrder& order, const std::vector<int>& fixed,
              const EliminationOptions& opts, bool decode) {
    const auto& levels = net.levels();
    const std::size_t n = levels.size();
    double constant = 0.0;
    std::vector<TablePtr> active;
    for (const auto& f : net.factors()) {
        auto t = slice(f, levels, fixed);
        if (t->scope.empty()) {
            constant += t->values[0];
        } else {
            active.push_back(std::move(t));
        }
    }

    RunResult res;
    std::vector<std::vector<TablePtr>> buckets(n);
    for (int v : order.sequence) {
        if (fixed[v] >= 0) continue;
        std::vector<TablePtr> involved;
        std::vector<TablePtr> rest;
        for (auto& t : active) {
            (std::find(t->scope.begin(), t->scope.end(), v) != t->scope.end() ? involved : rest).push_back(std::move(t));
        }
        active = std::move(rest);
        if (involved.empty()) continue;

        std::vector<int> scope;
        for (const auto& t : involved) scope.insert(scope.end(), t->scope.begin(), t->scope.end());
        std::sort(scope.begin(), scope.end());
        scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
        scope.erase(std::find(scope.begin(), scope.end(), v));
        res.width = std::max(res.width, static_cast<int>(scope.size()));

        double out_size = 1.0;
        for (int u : scope) out_size *= levels[u];
        if (out_size > static_cast<double>(opts.memory_cap)) {
            throw ResourceError("variable elimination needs an intermediate table of " +
                                format_double(out_size) + " entries, above the cap of " +
                                std::to_string(opts.memory_cap));
        }

        auto out = std::make_shared<Table>();
        out->scope = scope;
        out->strides = row_major_strides(scope, levels);
        out->values.assign(static_cast<std::size_t>(out_size), std::numeric_limits<double>::infinity());

        std::vector<int> u = scope;
        u.push_back(v);
        const std::size_t m = u.size();
        const std::size_t nf = involved.size();
        std::vector<std::size_t> fstride(nf * m, 0);
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& t = *involved[f];
            for (std::size_t k = 0; k < t.scope.size(); ++k) {
                const auto pos = std::find(u.begin(), u.end(), t.scope[k]) - u.begin();
                fstride[f * m + static_cast<std::size_t>(pos)] = t.strides[k];
            }
        }
        const std::size_t lv = static_cast<std::size_t>(levels[v]);
        const std::size_t total = out->values.size() * lv;
        std::vector<std::size_t> fidx(nf, 0);
        std::vector<int> ctr(m, 0);
        for (std::size_t t = 0; t < total; ++t) {
            double s = 0.0;
            for (std::size_t f = 0; f < nf; ++f) s += involved[f]->values[fidx[f]];
            double& slot = out->values[t / lv];
            if (s < slot) slot = s;
            for (std::size_t k = m; k-- > 0;) {
                for (std::size_t f = 0; f < nf; ++f) fidx[f] += fstride[f * m + k];
                if (++ctr[k] < levels[u[k]]) break;
                for (std::size_t f = 0; f < nf; ++f) fidx[f] -= fstride[f * m + k] * static_cast<std::size_t>(levels[u[k]]);
                ctr[k] = 0;
            }
        }
        buckets[v] = std::move(involved);
        if (out->scope.empty()) {
            constant += out->values[0];
        } else {
            active.push_back(std::move(out));
        }
    }
    res.value = constant;
    if (!decode) return res;

    res.assignment.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        if (fixed[v] >= 0) res.assignment[v] = fixed[v];
    }
    for (auto it = order.sequence.rbegin(); it != order.sequence.rend(); ++it) {
        const int v = *it;
        if (fixed[v] >= 0 || buckets[v].empty()) continue;
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> sums(static_cast<std::size_t>(levels[v]));
        for (int l = 0; l < levels[v]; ++l) {
            res.assignment[v] = l;
            double s = 0.0;
            for (const auto& t : buckets[v]) s += t->at(res.assignment);
            sums[l] = s;
            best = std::min(best, s);
        }
        int pick = -1;
        for (int l = 0; l < levels[v]; ++l) {
            if (close(sums[l], best, opts.tie_tolerance)) {
                if (pick < 0) pick = l;
                else res.tie = true;
            }
        }
        res.assignment[v] = pick;
    }
    // Variables no factor touches keep level 0, the lexicographic choice.
    return res;
}

}  // namespace

ArgminResult eliminate_argmin(const CostNetwork& net, const EliminationOrder& order, const EliminationOptions& opts) {
    const std::size_t n = static_cast<std::size_t>(net.variable_count());
    if (order.sequence.size() != n) throw ContractViolation("elimination order does not cover every variable");
    std::vector<int> fixed(n, -1);
    RunResult first = run(net, order, fixed, opts, true);
    if (first.width != order.induced_width) {
        throw ContractViolation("elimination produced width " + std::to_string(first.width) +
                                " but the order claims " + std::to_string(order.induced_width));
    }
    if (!first.tie) return {first.value, std::move(first.assignment)};

    // Several optima: pin variables one at a time to their smallest optimal level.
    for (std::size_t v = 0; v < n; ++v) {
        const int lv = net.levels()[v];
        bool found = false;
        for (int l = 0; l < lv; ++l) {
            fixed[v] = l;
            if (close(run(net, order, fixed, opts, false).value, first.value, opts.tie_tolerance)) {
                found = true;
                break;
            }
        }
        if (!found) throw NumericError("lexicographic decode lost the optimum");
    }
    return {first.value, fixed};
}

std::vector<int> GridSpec::level_counts() const {
    std::vector<int> out;
    out.reserve(values.size());
    for (const auto& v : values) out.push_back(static_cast<int>(v.size()));
    return out;
}

std::vector<double> GridSpec::point(std::span<const int> levels) const {
    if (levels.size() != values.size()) throw ContractViolation("grid point has the wrong arity");
    std::vector<double> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = values[i].at(static_cast<std::size_t>(levels[i]));
    return z;
}

GridSpec make_eps_grid(const HybridMDP& mdp, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("grid resolution must satisfy 0 < eps <= 1");
    const int count = static_cast<int>(std::ceil(1.0 / eps + 1.0 - 1e-9));
    GridSpec g;
    for (int i = 0; i < mdp.joint_count(); ++i) {
        const auto& spec = mdp.variable(i);
        std::vector<double> vals;
        if (spec.discrete()) {
            for (int k = 0; k < spec.levels; ++k) vals.push_back(k);
        } else {
            for (int k = 0; k < count; ++k) vals.push_back(static_cast<double>(k) / (count - 1));
        }
        g.values.push_back(std::move(vals));
    }
    return g;
}

namespace {

template <class F>
TableFactor fill_table(const std::vector<int>& scope, const GridSpec& grid, std::vector<double> z, F&& value_at) {
    TableFactor t;
    t.scope = scope;
    std::size_t n = 1;
    for (int v : scope) n *= grid.values[v].size();
    t.values.resize(n);
    std::vector<std::size_t> ctr(scope.size(), 0);
    for (std::size_t k = 0; k < scope.size(); ++k) z[scope[k]] = grid.values[scope[k]][0];
    for (std::size_t i = 0; i < n; ++i) {
        t.values[i] = value_at(z);
        for (std::size_t k = scope.size(); k-- > 0;) {
            const int v = scope[k];
            if (++ctr[k] < grid.values[v].size()) {
                z[v] = grid.values[v][ctr[k]];
                break;
            }
            ctr[k] = 0;
            z[v] = grid.values[v][0];
        }
    }
    return t;
}

// Remove scope variables the table does not vary with (for example a
// parent whose influence is switched off by a pinned action).
void drop_constant_axes(TableFactor& t, const std::vector<int>& levels) {
    for (std::size_t k = t.scope.size(); k-- > 0;) {
        const auto strides = row_major_strides(t.scope, levels);
        const std::size_t lk = static_cast<std::size_t>(levels[t.scope[k]]);
        const std::size_t stride = strides[k];
        const std::size_t block = stride * lk;
        bool constant = true;
        for (std::size_t i = 0; i < t.values.size() && constant; ++i) {
            if ((i / stride) % lk != 0 && t.values[i] != t.values[i - ((i / stride) % lk) * stride]) constant = false;
        }
        if (!constant) continue;
        std::vector<double> kept;
        kept.reserve(t.values.size() / lk);
        for (std::size_t base = 0; base < t.values.size(); base += block) {
            for (std::size_t j = 0; j < stride; ++j) kept.push_back(t.values[base + j]);
        }
        t.values = std::move(kept);
        t.scope.erase(t.scope.begin() + static_cast<long>(k));
    }
}

}  // namespace

ViolationTables::ViolationTables(std::span<const BasisFunction> basis, const HybridMDP& mdp, double gamma,
                                 const GridSpec& grid)
    : grid_(grid) {
    if (static_cast<int>(grid.values.size()) != mdp.joint_count()) throw ContractViolation("grid does not match the model");
    const auto levels = grid.level_counts();
    for (int l : levels) {
        if (l < 1) throw ContractViolation("grid variable without levels");
    }
    std::vector<double> z0(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) z0[i] = grid.values[i][0];
    const auto free_only = [&](std::vector<int> scope) {
        std::erase_if(scope, [&](int u) { return levels[u] == 1; });
        return scope;
    };
    for (const auto& f : basis) {
        auto t = fill_table(free_only(coefficient_scope(f, mdp)), grid, z0,
                            [&](const std::vector<double>& z) { return constraint_coefficient(f, mdp, gamma, z); });
        drop_constant_axes(t, levels);
        coefficient_tables_.push_back(std::move(t));
    }
    for (const auto& r : mdp.rewards()) {
        std::vector<int> scope = r.state_scope;
        scope.insert(scope.end(), r.action_scope.begin(), r.action_scope.end());
        std::sort(scope.begin(), scope.end());
        scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
        auto t = fill_table(free_only(std::move(scope)), grid, z0,
                            [&](const std::vector<double>& z) { return r.term.eval(z); });
        drop_constant_axes(t, levels);
        reward_tables_.push_back(std::move(t));
    }
}

CostNetwork ViolationTables::network(std::span<const double> weights, ViolationSense sense) const {
    if (weights.size() != coefficient_tables_.size()) throw ContractViolation("weight vector does not match the basis");
    CostNetwork net(grid_.level_counts());
    const double sign = sense == ViolationSense::MostViolated ? 1.0 : -1.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        TableFactor t = coefficient_tables_[i];
        for (double& v : t.values) v *= sign * weights[i];
        net.add_factor(std::move(t));
    }
    for (const auto& r : reward_tables_) {
        TableFactor t = r;
        for (double& v : t.values) v *= -sign;
        net.add_factor(std::move(t));
    }
    return net;
}

CostNetwork build_violation_network(const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                                    const GridSpec& grid, ViolationSense sense) {
    if (v.basis.size() != v.weights.size()) throw ContractViolation("value function: basis and weight counts differ");
    return ViolationTables(v.basis, mdp, gamma, grid).network(v.weights, sense);
}

}  // namespace halp
