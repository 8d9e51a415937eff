#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "halp/basis.hpp"
#include "halp/costnet.hpp"
#include "halp/lp.hpp"
#include "halp/model.hpp"
#include "halp/random.hpp"

namespace halp {

/// tau > kViolationTol counts as violated.
inline constexpr double kViolationTol = 1e-6;

struct McConfig {
    std::size_t samples = 1000;
};

struct EpsConfig {
    double eps = 0.125;
    EliminationOptions elimination;
};

struct McmcConfig {
    int chains = 50;
    int sweeps = 500;
    double temp_c = 0.2;
    int inner_steps = 10;
};

using OracleConfig = std::variant<McConfig, EpsConfig, McmcConfig>;

/// Throws ConfigError on out-of-range parameters.
void check_config(const OracleConfig& cfg);

/// tau^w(x, a) = -sum_i w_i F_i(x, a) + R(x, a); positive means violated.
double violation(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, std::span<const double> z);
double violation(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, std::span<const double> x,
                 std::span<const double> a);

/// The HALP row generated at joint assignment z.
Constraint make_constraint(std::span<const BasisFunction> basis, const HybridMDP& mdp, double gamma,
                           std::span<const double> z);

/// tau of weights w against a materialized row.
double row_violation(const Constraint& c, std::span<const double> w);

/// Additive decomposition of tau^w for local updates: changing z_k only
/// touches the terms listed for k.
class ViolationFunction {
public:
    ViolationFunction(const LinearValueFunction& v, const HybridMDP& mdp, double gamma);

    double total(std::span<const double> z) const;
    /// Sum of the terms whose scope contains joint variable k.
    double local(int k, std::span<const double> z) const;

private:
    // Weighted univariate PWL bases on one child are folded into a single
    // kernel so each knot is integrated once.
    struct Term {
        enum class Kind { Basis, MergedPwl, Reward } kind;
        std::size_t index = 0;  ///< basis or reward index, or child id for MergedPwl
        Pwl merged;
    };

    double term(const Term& t, std::span<const double> z) const;

    const LinearValueFunction& v_;
    const HybridMDP& mdp_;
    double gamma_;
    std::vector<Term> terms_;
    std::vector<std::vector<std::size_t>> terms_of_;
};

/// Uniform proposal: N joint assignments, every one materialized as a row.
std::vector<Constraint> sample_constraints(std::size_t n, std::span<const BasisFunction> basis, const HybridMDP& mdp,
                                           double gamma, Rng& rng);

/// N uniform samples; returns the violated ones.
std::vector<Constraint> oracle_mc(const McConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp,
                                  double gamma, Rng& rng);

struct GridArgmax {
    double tau = 0.0;
    std::vector<int> levels;
    std::vector<double> point;
};

/// Most violated grid point by variable elimination. Pass prebuilt tables to
/// reuse them across calls with the same basis.
GridArgmax most_violated_on_grid(const ViolationTables& tables, std::span<const double> weights,
                                 const EliminationOptions& opts = {});

std::optional<Constraint> oracle_eps(const EpsConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp,
                                     double gamma);

/// exp(log_weights) normalized to sum to one: the exact discrete conditional
/// of a Gibbs update.
std::vector<double> gibbs_conditional(std::span<const double> log_weights);

/// T_0 = c at initialization; sweep t >= 1 runs at c / ln(t + 2).
double cooling_temperature(double c, int t);

/// Annealed Gibbs chains over tau^w. Every post-sweep state with tau above
/// the tolerance is returned (consecutive repeats within a chain dropped).
std::vector<Constraint> oracle_mcmc(const McmcConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp,
                                    double gamma, Rng& rng);

/// Best tau each chain reached, for diagnostics.
struct McmcTrace {
    std::vector<Constraint> violated;
    double best_tau = -std::numeric_limits<double>::infinity();
    std::vector<double> best_point;
    std::vector<std::vector<double>> final_states;
};
McmcTrace run_mcmc(const McmcConfig& cfg, const LinearValueFunction& v, const HybridMDP& mdp, double gamma,
                   std::uint64_t seed);

/// eps <= 2 delta / (N K_loc).
double grid_resolution_for_delta(double delta, int term_count, double k_loc);

}  // namespace halp
