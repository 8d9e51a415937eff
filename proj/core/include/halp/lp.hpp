#pragma once

#include <optional>
#include <string>
#include <vector>

namespace halp {

/// One HALP row: sum_i w_i F_i(x, a) >= R(x, a), generated at `provenance`
/// (the joint state-action assignment).
struct Constraint {
    std::vector<double> coefficients;
    double rhs = 0.0;
    std::vector<double> provenance;
};

/// min objective . w  s.t.  rows,  and |w_i| <= box when a box is set.
struct RelaxedLP {
    std::vector<double> objective;
    std::vector<Constraint> rows;
    std::optional<double> box;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s) noexcept;

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    int max_iterations = 200000;
    int refactor_every = 50;
    int degenerate_before_bland = 20;  ///< consecutive degenerate pivots before switching to Bland's rule
    std::optional<std::vector<double>> warm_start;
};

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    std::vector<double> weights;
    double objective = 0.0;
    int iterations = 0;
    double max_violation = 0.0;  ///< largest row violation at the returned point
};

/// Dense primal simplex over the inequality form: vertices are described by
/// n active constraints, multipliers come from B^T lambda = c, and B^{-1} is
/// updated by rank-one corrections with periodic LU refactorization. An
/// auxiliary slack variable finds a feasible start when needed.
LpResult solve_lp(const RelaxedLP& lp, const LpOptions& opts = {});

}  // namespace halp
