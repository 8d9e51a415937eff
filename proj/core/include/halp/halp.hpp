#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "halp/basis.hpp"
#include "halp/lp.hpp"
#include "halp/model.hpp"
#include "halp/oracles.hpp"

namespace halp {

enum class HalpStatus { Optimal, IterationCapped, Infeasible, Unbounded };

const char* to_string(HalpStatus s) noexcept;

struct HalpSolution {
    std::vector<double> weights;
    double objective = 0.0;
    int iterations = 0;  ///< oracle rounds (one LP solve for MC-HALP)
    std::size_t cuts = 0;
    HalpStatus status = HalpStatus::Optimal;
    std::vector<Constraint> rows;  ///< the relaxed LP's constraint set
};

struct HalpLimits {
    int max_iterations = 500;
    bool box = true;  ///< |w_i| <= R_max / (1 - gamma)
    LpOptions lp;
};

/// alpha_i = E_psi[f_i].
std::vector<double> build_objective(std::span<const BasisFunction> basis, const StateRelevanceDensity& psi);

/// R_max / (1 - gamma).
double weight_box(const HybridMDP& mdp, double gamma);

/// Solve min alpha . w over a fixed row set.
HalpSolution solve_relaxed(std::span<const double> objective, std::vector<Constraint> rows, const HybridMDP& mdp,
                           double gamma, const HalpLimits& limits = {});

/// Samples cfg.samples joint assignments up front; every one becomes a row.
HalpSolution mc_halp(const HybridMDP& mdp, std::span<const BasisFunction> basis, const StateRelevanceDensity& psi,
                     double gamma, const McConfig& cfg, Rng& rng, const HalpLimits& limits = {});

/// Returns violated constraints for the current weights; empty ends the loop.
using Separator = std::function<std::vector<Constraint>(const LinearValueFunction&)>;

HalpSolution cutting_plane(const HybridMDP& mdp, std::span<const BasisFunction> basis,
                           const StateRelevanceDensity& psi, double gamma, const Separator& separator,
                           const HalpLimits& limits = {});

/// Cutting plane driven by one of the three oracles. The eps oracle reuses
/// its grid tables across rounds.
HalpSolution cutting_plane(const HybridMDP& mdp, std::span<const BasisFunction> basis,
                           const StateRelevanceDensity& psi, double gamma, const OracleConfig& oracle,
                           std::uint64_t seed, const HalpLimits& limits = {});

/// max(0, max tau^w) over a grid; exact for the grid.
double delta_infeasibility(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, const GridSpec& grid,
                           const EliminationOptions& opts = {});

/// max(0, max tau^w) over the points an oracle visits; a lower bound on delta.
double delta_infeasibility(const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                           const OracleConfig& probe, std::uint64_t seed);

}  // namespace halp
