#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "halp/basis.hpp"
#include "halp/model.hpp"

namespace halp {

/// Dense table over `scope`, row-major with the last scope variable fastest.
struct TableFactor {
    std::vector<int> scope;
    std::vector<double> values;
};

struct EliminationOrder {
    std::vector<int> sequence;
    int induced_width = 0;
};

/// Additive network of table factors over discretized variables.
class CostNetwork {
public:
    CostNetwork() = default;
    explicit CostNetwork(std::vector<int> levels);

    /// Validates the scope and table size; scopes may be given in any order.
    void add_factor(TableFactor f);

    int variable_count() const { return static_cast<int>(levels_.size()); }
    const std::vector<int>& levels() const { return levels_; }
    const std::vector<TableFactor>& factors() const { return factors_; }

    /// Sum of all factors at a full level assignment.
    double evaluate(std::span<const int> assignment) const;

    /// Adjacency lists of the interaction graph (sorted).
    std::vector<std::vector<int>> interaction_graph() const;

    /// Graphviz text of the interaction graph.
    std::string to_dot(const std::function<std::string(int)>& name_of = {}) const;

private:
    std::vector<int> levels_;
    std::vector<TableFactor> factors_;
};

/// Greedy minimum-degree order, ties to the smallest variable id.
EliminationOrder min_degree_order(const CostNetwork& net);

/// Wrap an explicit permutation and compute its induced width.
EliminationOrder make_order(const CostNetwork& net, std::vector<int> sequence);

struct EliminationOptions {
    std::size_t memory_cap = std::size_t{1} << 26;  ///< max entries of one intermediate table
    double tie_tolerance = 1e-12;                   ///< relative; values this close count as ties
};

struct ArgminResult {
    double value = 0.0;
    std::vector<int> assignment;
};

/// Global minimum of the factor sum and the lexicographically smallest
/// assignment attaining it. Throws ResourceError when an intermediate table
/// would exceed the memory cap.
ArgminResult eliminate_argmin(const CostNetwork& net, const EliminationOrder& order,
                              const EliminationOptions& opts = {});

/// Level values for each joint variable of a model.
struct GridSpec {
    std::vector<std::vector<double>> values;

    std::vector<int> level_counts() const;
    /// Joint assignment for a level assignment.
    std::vector<double> point(std::span<const int> levels) const;
};

/// Continuous variables get ceil(1/eps + 1) equally spaced levels including
/// both endpoints; discrete variables get their full domain.
GridSpec make_eps_grid(const HybridMDP& mdp, double eps);

enum class ViolationSense {
    MostViolated,   ///< network sums to -tau; argmin is the most violated point
    LeastViolated,  ///< network sums to tau
};

/// Unscaled F_i tables and reward tables on a grid. Built once, then scaled
/// by a weight vector for each cutting-plane round.
class ViolationTables {
public:
    ViolationTables(std::span<const BasisFunction> basis, const HybridMDP& mdp, double gamma, const GridSpec& grid);

    /// Network summing to -tau (MostViolated) or tau (LeastViolated).
    CostNetwork network(std::span<const double> weights, ViolationSense sense = ViolationSense::MostViolated) const;

    const GridSpec& grid() const { return grid_; }

private:
    GridSpec grid_;
    std::vector<TableFactor> coefficient_tables_;
    std::vector<TableFactor> reward_tables_;
};

/// Table factors for w_i F_i (one per nonzero weight) and -R_j. Variables
/// with a single level are constants and are left out of factor scopes, as
/// are variables a filled table turns out not to vary with.
CostNetwork build_violation_network(const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                                    const GridSpec& grid, ViolationSense sense = ViolationSense::MostViolated);

}  // namespace halp
