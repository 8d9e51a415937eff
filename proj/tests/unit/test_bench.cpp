#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "halp/bench.hpp"
#include "halp/error.hpp"
#include "halp/topology.hpp"

using namespace halp;

namespace {

double mode_of(const MixtureComponent& c) {
    return (c.params.alpha - 1.0) / (c.params.alpha + c.params.beta - 2.0);
}

}  // namespace

TEST_CASE("ring transition modes") {
    const auto b = make_ring_admin(4);
    const auto& t1 = std::get<ContinuousTransition>(*b.mdp.transition_of(0));
    const auto& t2 = std::get<ContinuousTransition>(*b.mdp.transition_of(1));
    const std::vector<double> z{1.0, 1.0, 0.0, 0.0, 0.0};
    CHECK(mode_of(mixture_at(b.mdp, t1, z)[0]) == doctest::Approx(0.95));
    CHECK(mode_of(mixture_at(b.mdp, t2, z)[0]) == doctest::Approx(0.90));
    CHECK(b.basis.size() == 1 + 4 + 4);
    CHECK(b.basis.front().is_constant());
    CHECK(b.mdp.noop_action() == std::vector<double>{4.0});
}

TEST_CASE("discrete ring") {
    const auto b = make_discrete_ring_admin(4);
    CHECK(reward(b.mdp, std::vector<double>{1, 1, 1, 1}, std::vector<double>{4}) == 5.0);
    const auto& t = std::get<DiscreteTransition>(*b.mdp.transition_of(1));
    // up with the parent down
    const auto p = distribution_at(b.mdp, t, std::vector<double>{0, 1, 0, 0, 4});
    CHECK(p[1] == doctest::Approx(2.0 / 3.0));
    CHECK(b.basis.front().is_constant());
}

TEST_CASE("irrigation ring structure") {
    const Topology t = IrrigationRing{6};
    const auto channels = irrigation_channels(t);
    std::set<std::string> devices;
    for (const auto& [u, v] : channels) {
        devices.insert(u);
        devices.insert(v);
    }
    CHECK(devices.size() == 6 + 4);
    const auto b = make_irrigation(t);
    CHECK(b.mdp.state_count() == static_cast<int>(channels.size()));
    CHECK(b.basis.size() == 1 + 4 * channels.size());
    CHECK(validate(b.mdp).ok());
    const auto shape = irrigation_shape(t);
    CHECK(shape.channels == static_cast<int>(channels.size()));
    CHECK(shape.inflow == 1);
    CHECK(shape.outflow == 1);
}

TEST_CASE("idle routing conserves interior water levels") {
    const Topology t = IrrigationRing{6};
    const auto b = make_irrigation(t);
    const auto channels = irrigation_channels(t);
    Rng rng(9);
    for (int k = 0; k < 20; ++k) {
        const auto x = sample_initial_state(b.mdp, rng);
        const auto z = b.mdp.joint(x, *b.mdp.noop_action());
        for (int e = 0; e < b.mdp.state_count(); ++e) {
            const auto& [from, to] = channels[static_cast<std::size_t>(e)];
            if (from.rfind("In", 0) == 0 || to.rfind("Out", 0) == 0) continue;
            const auto& tr = std::get<ContinuousTransition>(*b.mdp.transition_of(e));
            const auto mix = mixture_at(b.mdp, tr, z);
            CHECK((mix[0].params.alpha - 2.0) / 46.0 == doctest::Approx(x[e]).epsilon(1e-12));
        }
    }
}

TEST_CASE("irrigation parameters stay positive at corners") {
    for (const Topology& t : {Topology{IrrigationRing{6}}, Topology{IrrigationRingOfRings{6}}, Topology{IrrigationGrid{3, 3}}}) {
        const auto b = make_irrigation(t);
        for (double level : {0.0, 1.0}) {
            const std::vector<double> x(static_cast<std::size_t>(b.mdp.state_count()), level);
            for (std::size_t a = 0; a < std::min<std::size_t>(b.mdp.action_space_size(), 200); ++a) {
                const auto z = b.mdp.joint(x, b.mdp.action_from_index(a));
                for (const auto& tf : b.mdp.transitions()) CHECK_NOTHROW(mixture_at(b.mdp, std::get<ContinuousTransition>(tf), z));
            }
        }
    }
}

TEST_CASE("topology ids") {
    CHECK(topology_id(parse_topology("irrigation-ring-of-rings12")) == "irrigation-ring-of-rings12");
    CHECK(std::holds_alternative<IrrigationGrid>(parse_topology("irrigation-grid3x3")));
    CHECK(std::holds_alternative<DiscreteRingAdmin>(parse_topology("discrete-ring2")));
    CHECK_THROWS_AS(parse_topology("torus5"), ConfigError);
    CHECK_THROWS_AS(make_ring_admin(1), ConfigError);
}

TEST_CASE("heuristic pairing") {
    const auto ring = make_ring_admin(4);
    CHECK(std::holds_alternative<DummyPolicy>(heuristic("dummy", ring.mdp)));
    CHECK(std::get<FixedPolicy>(heuristic("server", ring.mdp)).action == std::vector<double>{0.0});
    const auto irr = make_irrigation(IrrigationRing{6});
    CHECK_THROWS_AS(heuristic("server", irr.mdp), ConfigError);
    CHECK_THROWS_AS(heuristic("greedy", ring.mdp), ConfigError);

    Rng r1(6), r2(6);
    const auto pi = heuristic("random", irr.mdp);
    const std::vector<double> x(static_cast<std::size_t>(irr.mdp.state_count()), 0.5);
    for (int k = 0; k < 10; ++k) CHECK(act(pi, irr.mdp, x, r1) == act(pi, irr.mdp, x, r2));
}

TEST_CASE("every generated model validates and carries the constant basis") {
    std::vector<Benchmark> all{make_ring_admin(2), make_ring_admin(6), make_discrete_ring_admin(2),
                               make_discrete_ring_admin(5)};
    for (const Topology& t : {Topology{IrrigationRing{6}}, Topology{IrrigationRing{12}},
                              Topology{IrrigationRingOfRings{6}}, Topology{IrrigationGrid{3, 3}}}) {
        all.push_back(make_irrigation(t));
    }
    for (const auto& b : all) {
        CHECK(validate(b.mdp).ok());
        CHECK(std::any_of(b.basis.begin(), b.basis.end(), [](const BasisFunction& f) { return f.is_constant(); }));
    }
}
