#include "halp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "halp/error.hpp"

namespace halp {

namespace {

Expr x(int id) {
    return Expr::var(id);
}
Expr c(double v) {
    return Expr::constant(v);
}

}  // namespace

Benchmark make_ring_admin(int n) {
    if (n < 2) throw ConfigError("ring needs at least 2 computers");
    std::vector<VariableSpec> states;
    for (int i = 0; i < n; ++i) states.push_back(VariableSpec::continuous("x" + std::to_string(i + 1)));
    const int a = n;
    std::vector<VariableSpec> actions{VariableSpec::discrete("a", n + 1)};

    std::vector<TransitionFactor> transitions;
    for (int i = 0; i < n; ++i) {
        const int p = (i + n - 1) % n;
        const Expr reboot = Expr::indicator(a, i);
        const Expr keep = c(1.0) - reboot;
        const Expr xp = x(i) * x(p);
        ContinuousTransition t;
        t.child = i;
        t.parents = {std::min(i, p), std::max(i, p), a};
        t.components.push_back({1.0, c(20.0) * reboot + keep * (c(2.0) + c(13.0) * x(i) - c(5.0) * xp),
                                c(2.0) * reboot + keep * (c(10.0) - c(2.0) * x(i) - c(6.0) * xp)});
        transitions.push_back(std::move(t));
    }

    std::vector<RewardFactor> rewards;
    for (int i = 0; i < n; ++i) {
        rewards.push_back({{i}, {}, c(i == 0 ? 2.0 : 1.0) * Expr::pow(x(i), 2)});
    }

    Benchmark b{HybridMDP(std::move(states), std::move(actions), std::move(transitions), std::move(rewards), 0.95,
                          static_cast<double>(n + 1)),
                {}};
    b.mdp.set_noop_action({static_cast<double>(n)});

    b.basis.push_back(BasisFunction::constant());
    for (int i = 0; i < n; ++i) b.basis.push_back(BasisFunction::univariate(i, Monomial{1, 0}));
    for (int i = 0; i < n; ++i) {
        const int p = (i + n - 1) % n;
        b.basis.push_back(BasisFunction::product({{std::min(i, p), Monomial{1, 0}}, {std::max(i, p), Monomial{1, 0}}}));
    }
    return b;
}

Benchmark make_discrete_ring_admin(int n) {
    if (n < 2) throw ConfigError("ring needs at least 2 computers");
    std::vector<VariableSpec> states;
    for (int i = 0; i < n; ++i) states.push_back(VariableSpec::discrete("x" + std::to_string(i + 1), 2));
    const int a = n;
    std::vector<VariableSpec> actions{VariableSpec::discrete("a", n + 1)};

    std::vector<TransitionFactor> transitions;
    for (int i = 0; i < n; ++i) {
        const int p = (i + n - 1) % n;
        const Expr reboot = Expr::indicator(a, i);
        // P(up) by (own, parent): (0,0) 0.1, (0,1) 0.1, (1,0) 2/3, (1,1) 0.9
        const Expr up_table = Expr::table({i, p}, {2, 2}, {0.1, 0.1, 2.0 / 3.0, 0.9});
        const Expr up = c(0.95) * reboot + (c(1.0) - reboot) * up_table;
        DiscreteTransition t;
        t.child = i;
        t.parents = {std::min(i, p), std::max(i, p), a};
        t.thetas = {c(1.0) - up, up};
        transitions.push_back(std::move(t));
    }
    std::vector<RewardFactor> rewards;
    for (int i = 0; i < n; ++i) rewards.push_back({{i}, {}, c(i == 0 ? 2.0 : 1.0) * x(i)});

    Benchmark b{HybridMDP(std::move(states), std::move(actions), std::move(transitions), std::move(rewards), 0.95,
                          static_cast<double>(n + 1)),
                {}};
    b.mdp.set_noop_action({static_cast<double>(n)});
    b.basis.push_back(BasisFunction::constant());
    for (int i = 0; i < n; ++i) b.basis.push_back(BasisFunction::indicator(b.mdp, i, 1));
    return b;
}

namespace {

constexpr double kTauIn = 0.1;
constexpr double kTauInternal = 1.0 / 3.0;

struct Layout {
    std::vector<std::string> devices;
    std::vector<std::pair<int, int>> channels;

    int device(const std::string& name) {
        const auto it = std::find(devices.begin(), devices.end(), name);
        if (it != devices.end()) return static_cast<int>(it - devices.begin());
        devices.push_back(name);
        return static_cast<int>(devices.size()) - 1;
    }
    void link(const std::string& from, const std::string& to) {
        const int u = device(from);
        const int v = device(to);
        channels.emplace_back(u, v);
    }
    bool is_inflow(int d) const { return devices[d].rfind("In", 0) == 0; }
    bool is_outflow(int d) const { return devices[d].rfind("Out", 0) == 0; }
};

Layout layout_of(const Topology& t) {
    Layout l;
    if (const auto* r = std::get_if<IrrigationRing>(&t)) {
        if (r->n < 1) throw ConfigError("irrigation ring needs at least one device");
        for (int i = 1; i < r->n; ++i) l.link("D" + std::to_string(i), "D" + std::to_string(i + 1));
        l.link("D" + std::to_string(r->n), "Jin");
        l.link("Jin", "Jout");
        l.link("Jout", "D1");
        l.link("In", "Jin");
        l.link("Jout", "Out");
    } else if (const auto* rr = std::get_if<IrrigationRingOfRings>(&t)) {
        if (rr->n < 3 || rr->n % 3 != 0) throw ConfigError("ring-of-rings size must be a positive multiple of 3");
        const int groups = rr->n / 3;
        const auto name = [](int g, char k) { return std::string("D") + std::to_string(g + 1) + k; };
        for (int g = 0; g < groups; ++g) {
            l.link(name(g, 'a'), name(g, 'b'));
            l.link(name(g, 'b'), name(g, 'c'));
            l.link(name(g, 'c'), name(g, 'a'));
            if (g + 1 < groups) l.link(name(g, 'c'), name(g + 1, 'a'));
        }
        l.link(name(groups - 1, 'c'), "Jin");
        l.link("Jin", "Jout");
        l.link("Jout", name(0, 'a'));
        l.link("In", "Jin");
        l.link("Jout", "Out");
    } else if (const auto* g = std::get_if<IrrigationGrid>(&t)) {
        if (g->rows < 1 || g->cols < 2) throw ConfigError("irrigation grid needs at least 1 row and 2 columns");
        const auto name = [](int r, int c) { return "D" + std::to_string(r) + "_" + std::to_string(c); };
        for (int r = 0; r < g->rows; ++r) {
            for (int c2 = 0; c2 + 1 < g->cols; ++c2) l.link(name(r, c2), name(r, c2 + 1));
        }
        for (int c2 = 0; c2 < g->cols; ++c2) {
            for (int r = 0; r + 1 < g->rows; ++r) l.link(name(r, c2), name(r + 1, c2));
        }
        for (int r = 0; r < g->rows; ++r) l.link("In" + std::to_string(r), name(r, 0));
        l.link(name(g->rows / 2, g->cols - 1), "Out");
    } else {
        throw ConfigError("'" + topology_id(t) + "' is not an irrigation network");
    }
    return l;
}

double channel_reward_bound() {
    const double peak1 = 1.0 / (0.025 * std::sqrt(2.0 * std::numbers::pi)) / 25.6;
    const double peak2 = 1.0 / (0.05 * std::sqrt(2.0 * std::numbers::pi)) / 32.0;
    return peak1 + peak2;
}

PwlSegments hat(double left, double peak, double right) {
    PwlSegments s;
    if (peak > left) s.push_back({left, peak, 1.0 / (peak - left), -left / (peak - left)});
    if (right > peak) s.push_back({peak, right, -1.0 / (right - peak), right / (right - peak)});
    return s;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> irrigation_channels(const Topology& t) {
    const Layout l = layout_of(t);
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [u, v] : l.channels) out.emplace_back(l.devices[u], l.devices[v]);
    return out;
}

Benchmark make_irrigation(const Topology& t) {
    const Layout l = layout_of(t);
    const int nc = static_cast<int>(l.channels.size());
    const int nd = static_cast<int>(l.devices.size());
    std::vector<std::vector<int>> in(nd), out(nd);
    for (int e = 0; e < nc; ++e) {
        out[l.channels[e].first].push_back(e);
        in[l.channels[e].second].push_back(e);
    }

    std::vector<VariableSpec> states;
    for (const auto& [u, v] : l.channels) states.push_back(VariableSpec::continuous("c_" + l.devices[u] + "_" + l.devices[v]));
    std::vector<VariableSpec> actions;
    std::vector<int> action_of(nd, -1);
    for (int d = 0; d < nd; ++d) {
        if (in[d].empty() || out[d].empty()) continue;
        action_of[d] = nc + static_cast<int>(actions.size());
        actions.push_back(VariableSpec::discrete("A_" + l.devices[d], 1 + static_cast<int>(in[d].size() * out[d].size())));
    }
    const auto mode = [&](int d, int from, int to) {
        const auto hi = std::find(in[d].begin(), in[d].end(), from) - in[d].begin();
        const auto ko = std::find(out[d].begin(), out[d].end(), to) - out[d].begin();
        return 1 + static_cast<int>(hi * static_cast<long>(out[d].size()) + ko);
    };

    std::vector<TransitionFactor> transitions;
    for (int e = 0; e < nc; ++e) {
        const auto [u, v] = l.channels[e];
        std::vector<int> parents{e};
        // water leaving e through device v
        Expr drain = c(0.0);
        if (l.is_outflow(v)) {
            drain = x(e);
        } else if (action_of[v] >= 0) {
            std::vector<Expr> routes;
            for (int k : out[v]) routes.push_back(Expr::indicator(action_of[v], mode(v, e, k)));
            drain = Expr::nary(Expr::Kind::Add, std::move(routes)) * min(x(e), c(kTauInternal));
            parents.push_back(action_of[v]);
        }
        const Expr mu = x(e) - drain;
        // water entering e through device u
        Expr fill = c(0.0);
        if (l.is_inflow(u)) {
            fill = min(c(1.0) - mu, c(kTauIn));
        } else if (action_of[u] >= 0) {
            std::vector<Expr> terms;
            for (int h : in[u]) {
                terms.push_back(Expr::indicator(action_of[u], mode(u, h, e)) *
                                min(c(1.0) - mu, min(x(h), c(kTauInternal))));
                parents.push_back(h);
            }
            fill = Expr::nary(Expr::Kind::Add, std::move(terms));
            parents.push_back(action_of[u]);
        }
        const Expr next = Expr::clamp(mu + fill, 0.0, 1.0);
        std::sort(parents.begin(), parents.end());
        parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
        ContinuousTransition tr;
        tr.child = e;
        tr.parents = std::move(parents);
        tr.components.push_back({1.0, c(46.0) * next + c(2.0), c(48.0) - c(46.0) * next});
        transitions.push_back(std::move(tr));
    }

    std::vector<RewardFactor> rewards;
    double r_max = 0.0;
    for (int e = 0; e < nc; ++e) {
        if (l.is_outflow(l.channels[e].second)) {
            rewards.push_back({{e}, {}, c(2.0) * x(e)});
            r_max += 2.0;
        } else {
            rewards.push_back({{e}, {}, c(1.0 / 25.6) * Expr::normal(x(e), 0.4, 0.025) +
                                            c(1.0 / 32.0) * Expr::normal(x(e), 0.55, 0.05)});
            r_max += channel_reward_bound();
        }
    }

    const int na = static_cast<int>(actions.size());
    Benchmark b{HybridMDP(std::move(states), std::move(actions), std::move(transitions), std::move(rewards), 0.95,
                          r_max),
                {}};
    b.mdp.set_noop_action(std::vector<double>(static_cast<std::size_t>(na), 0.0));

    b.basis.push_back(BasisFunction::constant());
    const double k1 = 0.4;
    const double k2 = 0.55;
    for (int e = 0; e < nc; ++e) {
        b.basis.push_back(BasisFunction::univariate(e, Pwl{hat(0.0, 0.0, k1)}));
        b.basis.push_back(BasisFunction::univariate(e, Pwl{hat(0.0, k1, k2)}));
        b.basis.push_back(BasisFunction::univariate(e, Pwl{hat(k1, k2, 1.0)}));
        b.basis.push_back(BasisFunction::univariate(e, Pwl{hat(k2, 1.0, 1.0)}));
    }
    return b;
}

Benchmark make_benchmark(const Topology& t) {
    if (const auto* r = std::get_if<RingAdmin>(&t)) return make_ring_admin(r->n);
    if (const auto* r = std::get_if<DiscreteRingAdmin>(&t)) return make_discrete_ring_admin(r->n);
    return make_irrigation(t);
}

double irrigation_reward(double x) {
    const auto normal = [](double v, double mu, double sigma) {
        const double d = (v - mu) / sigma;
        return std::exp(-0.5 * d * d) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    return normal(x, 0.4, 0.025) / 25.6 + normal(x, 0.55, 0.05) / 32.0;
}

Policy heuristic(std::string_view name, const HybridMDP& mdp) {
    if (name == "dummy") {
        if (!mdp.noop_action()) throw ConfigError("dummy policy: model has no no-op action");
        return DummyPolicy{};
    }
    if (name == "random") return RandomPolicy{};
    if (name == "server") {
        if (mdp.action_count() != 1 || !mdp.actions()[0].discrete()) {
            throw ConfigError("server policy needs a single discrete action variable");
        }
        return FixedPolicy{{0.0}};
    }
    throw ConfigError("unknown heuristic '" + std::string(name) + "' (expected dummy, random, or server)");
}

}  // namespace halp
