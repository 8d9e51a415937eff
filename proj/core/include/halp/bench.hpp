#pragma once

#include <string>
#include <vector>

#include "halp/basis.hpp"
#include "halp/model.hpp"
#include "halp/policy.hpp"
#include "halp/topology.hpp"

namespace halp {

struct Benchmark {
    HybridMDP mdp;
    std::vector<BasisFunction> basis;
};

/// Continuous network administration on an n-ring. X_i's parent is X_{i-1}
/// (cyclically); action k < n reboots X_{k+1}, action n does nothing.
Benchmark make_ring_admin(int n);

/// Binary variant with success probabilities 0.95 (reboot), 0.9 (up, parent
/// up), 2/3 (up, parent down) and 0.1 (down).
Benchmark make_discrete_ring_admin(int n);

/// One continuous variable per channel, one discrete action per device that
/// has both inbound and outbound channels. Mode 0 is idle; mode 1 + i*|out| + o
/// routes inbound channel i to outbound channel o (both in channel order).
Benchmark make_irrigation(const Topology& t);

Benchmark make_benchmark(const Topology& t);

/// Directed channel list of an irrigation topology as (from, to) device names.
std::vector<std::pair<std::string, std::string>> irrigation_channels(const Topology& t);

/// Reward of a non-outflow irrigation channel at water level x.
double irrigation_reward(double x);

/// Heuristic policies: "dummy" (the no-op action), "random", and "server"
/// (always the first action value of a single action variable).
Policy heuristic(std::string_view name, const HybridMDP& mdp);

}  // namespace halp
