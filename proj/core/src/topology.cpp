#include "halp/topology.hpp"

#include <charconv>
#include <optional>

#include "halp/error.hpp"

namespace halp {

namespace {

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 1) return std::nullopt;
    return v;
}

bool consume(std::string_view& s, std::string_view prefix) {
    if (s.substr(0, prefix.size()) != prefix) return false;
    s.remove_prefix(prefix.size());
    return true;
}

}  // namespace

Topology parse_topology(std::string_view id) {
    std::string_view s = id;
    const auto bad = [&]() { return ConfigError("unknown benchmark '" + std::string(id) + "'"); };
    if (consume(s, "irrigation-ring-of-rings")) {
        const auto n = parse_int(s);
        if (!n || *n % 3 != 0) throw ConfigError("ring-of-rings size must be a positive multiple of 3");
        return IrrigationRingOfRings{*n};
    }
    if (consume(s, "irrigation-ring")) {
        if (const auto n = parse_int(s)) return IrrigationRing{*n};
        throw bad();
    }
    if (consume(s, "irrigation-grid")) {
        const auto x = s.find('x');
        if (x == std::string_view::npos) throw bad();
        const auto r = parse_int(s.substr(0, x));
        const auto c = parse_int(s.substr(x + 1));
        if (!r || !c) throw bad();
        return IrrigationGrid{*r, *c};
    }
    if (consume(s, "discrete-ring")) {
        if (const auto n = parse_int(s); n && *n >= 2) return DiscreteRingAdmin{*n};
        throw bad();
    }
    if (consume(s, "ring")) {
        if (const auto n = parse_int(s); n && *n >= 2) return RingAdmin{*n};
        throw bad();
    }
    throw bad();
}

std::string topology_id(const Topology& t) {
    struct Visitor {
        std::string operator()(const RingAdmin& r) const { return "ring" + std::to_string(r.n); }
        std::string operator()(const DiscreteRingAdmin& r) const { return "discrete-ring" + std::to_string(r.n); }
        std::string operator()(const IrrigationRing& r) const { return "irrigation-ring" + std::to_string(r.n); }
        std::string operator()(const IrrigationRingOfRings& r) const {
            return "irrigation-ring-of-rings" + std::to_string(r.n);
        }
        std::string operator()(const IrrigationGrid& g) const {
            return "irrigation-grid" + std::to_string(g.rows) + "x" + std::to_string(g.cols);
        }
    };
    return std::visit(Visitor{}, t);
}

bool is_irrigation(const Topology& t) {
    return std::holds_alternative<IrrigationRing>(t) || std::holds_alternative<IrrigationRingOfRings>(t) ||
           std::holds_alternative<IrrigationGrid>(t);
}

IrrigationShape irrigation_shape(const Topology& t) {
    if (const auto* r = std::get_if<IrrigationRing>(&t)) return {r->n + 4, 1, 1};
    if (const auto* r = std::get_if<IrrigationRingOfRings>(&t)) return {4 * r->n / 3 + 4, 1, 1};
    if (const auto* g = std::get_if<IrrigationGrid>(&t)) {
        return {g->rows * (g->cols - 1) + g->cols * (g->rows - 1) + g->rows + 1, g->rows, 1};
    }
    throw ConfigError("'" + topology_id(t) + "' is not an irrigation network");
}

}  // namespace halp
