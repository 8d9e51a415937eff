#include "halp/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "halp/error.hpp"

namespace halp {

using nlohmann::json;

namespace {

constexpr const char* kProblemFormat = "halp-problem";
constexpr const char* kArchiveFormat = "halp-solution";

json variable_json(const VariableSpec& v) {
    json j{{"name", v.name}, {"kind", v.discrete() ? "discrete" : "continuous"}};
    if (v.discrete()) j["levels"] = v.levels;
    return j;
}

VariableSpec variable_from(const json& j) {
    const std::string kind = j.at("kind");
    if (kind == "continuous") return VariableSpec::continuous(j.at("name"));
    if (kind == "discrete") return VariableSpec::discrete(j.at("name"), j.at("levels").get<int>());
    throw ConfigError("unknown variable kind '" + kind + "'");
}

json kernel_json(const UnivariateKernel& k) {
    if (const auto* m = std::get_if<Monomial>(&k)) return {{"type", "monomial"}, {"n", m->n}, {"m", m->m}};
    if (const auto* b = std::get_if<BetaPdf>(&k)) {
        return {{"type", "beta-pdf"}, {"alpha", b->shape.alpha}, {"beta", b->shape.beta}};
    }
    json segs = json::array();
    for (const auto& s : std::get<Pwl>(k).segments) segs.push_back({s.l, s.r, s.a, s.b});
    return {{"type", "pwl"}, {"segments", segs}};
}

UnivariateKernel kernel_from(const json& j) {
    const std::string type = j.at("type");
    if (type == "monomial") return Monomial{j.at("n").get<int>(), j.at("m").get<int>()};
    if (type == "beta-pdf") return BetaPdf{{j.at("alpha").get<double>(), j.at("beta").get<double>()}};
    if (type == "pwl") {
        Pwl p;
        for (const auto& s : j.at("segments")) {
            p.segments.push_back({s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>(),
                                  s.at(3).get<double>()});
        }
        return p;
    }
    throw ConfigError("unknown basis kernel type '" + type + "'");
}

json names(const HybridMDP& mdp, const std::vector<int>& ids) {
    json a = json::array();
    for (int id : ids) a.push_back(mdp.variable_name(id));
    return a;
}

int lookup(const HybridMDP& mdp, const std::string& name) {
    const auto id = mdp.find_variable(name);
    if (!id) throw ConfigError("unknown variable '" + name + "'");
    return *id;
}

std::vector<int> ids(const std::vector<VariableSpec>& states, const std::vector<VariableSpec>& actions,
                     const json& list) {
    std::vector<int> out;
    for (const auto& n : list) {
        const std::string name = n;
        int id = -1;
        for (std::size_t i = 0; i < states.size() && id < 0; ++i) {
            if (states[i].name == name) id = static_cast<int>(i);
        }
        for (std::size_t i = 0; i < actions.size() && id < 0; ++i) {
            if (actions[i].name == name) id = static_cast<int>(states.size() + i);
        }
        if (id < 0) throw ConfigError("unknown variable '" + name + "'");
        out.push_back(id);
    }
    return out;
}

}  // namespace

std::string problem_to_json(const Benchmark& b) {
    const HybridMDP& mdp = b.mdp;
    const auto name_of = [&](int id) { return mdp.variable_name(id); };
    json j;
    j["format"] = kProblemFormat;
    j["version"] = 1;
    j["discount"] = mdp.discount();
    j["r_max"] = mdp.r_max();
    for (const auto& v : mdp.states()) j["states"].push_back(variable_json(v));
    j["actions"] = json::array();
    for (const auto& v : mdp.actions()) j["actions"].push_back(variable_json(v));
    for (const auto& tf : mdp.transitions()) {
        json t;
        if (const auto* c = std::get_if<ContinuousTransition>(&tf)) {
            t["child"] = mdp.variable_name(c->child);
            t["parents"] = names(mdp, c->parents);
            t["type"] = "beta-mixture";
            for (const auto& m : c->components) {
                t["components"].push_back(
                    {{"weight", m.weight}, {"alpha", to_text(m.alpha, name_of)}, {"beta", to_text(m.beta, name_of)}});
            }
        } else {
            const auto& d = std::get<DiscreteTransition>(tf);
            t["child"] = mdp.variable_name(d.child);
            t["parents"] = names(mdp, d.parents);
            t["type"] = "discriminant";
            for (const auto& e : d.thetas) t["thetas"].push_back(to_text(e, name_of));
        }
        j["transitions"].push_back(t);
    }
    for (const auto& r : mdp.rewards()) {
        j["rewards"].push_back({{"states", names(mdp, r.state_scope)},
                                {"actions", names(mdp, r.action_scope)},
                                {"term", to_text(r.term, name_of)}});
    }
    if (mdp.noop_action()) j["noop_action"] = *mdp.noop_action();
    if (mdp.initial_state()) j["initial_state"] = *mdp.initial_state();
    j["basis"] = json::array();
    for (const auto& f : b.basis) {
        json bj;
        bj["discrete"] = names(mdp, f.discrete_vars);
        bj["table"] = f.table;
        bj["factors"] = json::array();
        for (const auto& u : f.factors) {
            bj["factors"].push_back({{"var", mdp.variable_name(u.target)}, {"kernel", kernel_json(u.kernel)}});
        }
        j["basis"].push_back(bj);
    }
    return j.dump(2) + "\n";
}

Benchmark problem_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("problem file is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != kProblemFormat) throw ConfigError("not a halp problem document");
        std::vector<VariableSpec> states, actions;
        for (const auto& v : j.at("states")) states.push_back(variable_from(v));
        for (const auto& v : j.at("actions")) actions.push_back(variable_from(v));
        const VarLookup lookup_var = [&](std::string_view name) -> std::optional<VarRef> {
            for (std::size_t i = 0; i < states.size(); ++i) {
                if (states[i].name == name) return VarRef{static_cast<int>(i), states[i].levels};
            }
            for (std::size_t i = 0; i < actions.size(); ++i) {
                if (actions[i].name == name) return VarRef{static_cast<int>(states.size() + i), actions[i].levels};
            }
            return std::nullopt;
        };
        std::vector<TransitionFactor> transitions;
        for (const auto& t : j.at("transitions")) {
            const int child = ids(states, actions, json::array({t.at("child")}))[0];
            const auto parents = ids(states, actions, t.at("parents"));
            const std::string type = t.at("type");
            if (type == "beta-mixture") {
                ContinuousTransition c{child, parents, {}};
                for (const auto& m : t.at("components")) {
                    c.components.push_back({m.at("weight").get<double>(),
                                            parse_expr(m.at("alpha").get<std::string>(), lookup_var),
                                            parse_expr(m.at("beta").get<std::string>(), lookup_var)});
                }
                transitions.emplace_back(std::move(c));
            } else if (type == "discriminant") {
                DiscreteTransition d{child, parents, {}};
                for (const auto& e : t.at("thetas")) d.thetas.push_back(parse_expr(e.get<std::string>(), lookup_var));
                transitions.emplace_back(std::move(d));
            } else {
                throw ConfigError("unknown transition type '" + type + "'");
            }
        }
        std::vector<RewardFactor> rewards;
        for (const auto& r : j.at("rewards")) {
            rewards.push_back({ids(states, actions, r.at("states")), ids(states, actions, r.at("actions")),
                               parse_expr(r.at("term").get<std::string>(), lookup_var)});
        }
        Benchmark b{HybridMDP(states, actions, std::move(transitions), std::move(rewards),
                              j.at("discount").get<double>(), j.at("r_max").get<double>()),
                    {}};
        if (j.contains("noop_action")) b.mdp.set_noop_action(j["noop_action"].get<std::vector<double>>());
        if (j.contains("initial_state")) b.mdp.set_initial_state(j["initial_state"].get<std::vector<double>>());
        for (const auto& bj : j.at("basis")) {
            BasisFunction f;
            for (const auto& n : bj.at("discrete")) {
                const int id = lookup(b.mdp, n.get<std::string>());
                f.discrete_vars.push_back(id);
                f.discrete_sizes.push_back(b.mdp.variable(id).levels);
            }
            f.table = bj.at("table").get<std::vector<double>>();
            for (const auto& u : bj.at("factors")) {
                f.factors.push_back({lookup(b.mdp, u.at("var").get<std::string>()), kernel_from(u.at("kernel"))});
            }
            check_basis(b.mdp, f);
            b.basis.push_back(std::move(f));
        }
        return b;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed problem document: ") + e.what());
    }
}

SolutionArchive make_archive(const HalpSolution& s) {
    SolutionArchive a;
    a.weights = s.weights;
    a.objective = s.objective;
    a.iterations = s.iterations;
    a.cuts = s.cuts;
    a.status = to_string(s.status);
    for (const auto& c : s.rows) a.cut_provenance.push_back(c.provenance);
    return a;
}

std::string archive_to_json(const SolutionArchive& a) {
    json j;
    j["format"] = kArchiveFormat;
    j["version"] = 1;
    j["problem"] = a.problem;
    j["solver"] = a.solver;
    j["config"] = json::object();
    for (const auto& [k, v] : a.config) j["config"][k] = v;
    j["gamma"] = a.gamma;
    j["seed"] = a.seed;
    j["weights"] = a.weights;
    j["objective"] = a.objective;
    j["iterations"] = a.iterations;
    j["cuts"] = a.cuts;
    j["status"] = a.status;
    j["cut_provenance"] = a.cut_provenance;
    j["timing"] = a.seconds ? json{{"recorded", true}, {"seconds", *a.seconds}} : json{{"recorded", false}};
    return j.dump() + "\n";
}

SolutionArchive archive_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.value("format", "") != kArchiveFormat) throw ConfigError("not a halp solution archive");
        SolutionArchive a;
        a.problem = j.at("problem");
        a.solver = j.at("solver");
        for (const auto& [k, v] : j.at("config").items()) a.config.emplace_back(k, v.get<std::string>());
        a.gamma = j.at("gamma");
        a.seed = j.at("seed");
        a.weights = j.at("weights").get<std::vector<double>>();
        a.objective = j.at("objective");
        a.iterations = j.at("iterations");
        a.cuts = j.at("cuts");
        a.status = j.at("status");
        a.cut_provenance = j.at("cut_provenance").get<std::vector<std::vector<double>>>();
        if (j.at("timing").at("recorded").get<bool>()) a.seconds = j["timing"].at("seconds").get<double>();
        return a;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed solution archive: ") + e.what());
    }
}

void write_file_atomic(const std::string& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace halp
