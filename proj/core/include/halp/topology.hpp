#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace halp {

struct RingAdmin {
    int n = 4;
};
struct DiscreteRingAdmin {
    int n = 4;
};
struct IrrigationRing {
    int n = 6;
};
struct IrrigationRingOfRings {
    int n = 6;
};
struct IrrigationGrid {
    int rows = 3;
    int cols = 3;
};

using Topology = std::variant<RingAdmin, DiscreteRingAdmin, IrrigationRing, IrrigationRingOfRings, IrrigationGrid>;

/// Benchmark ids: ring<n>, discrete-ring<n>, irrigation-ring<n>,
/// irrigation-ring-of-rings<n>, irrigation-grid<r>x<c>.
Topology parse_topology(std::string_view id);
std::string topology_id(const Topology& t);

bool is_irrigation(const Topology& t);

/// Channel counts used by the irrigation utopian bound.
struct IrrigationShape {
    int channels = 0;
    int inflow = 0;   ///< channels fed by an inflow device
    int outflow = 0;  ///< channels draining into an outflow device
};

IrrigationShape irrigation_shape(const Topology& t);

}  // namespace halp
