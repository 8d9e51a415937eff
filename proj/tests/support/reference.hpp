#pragma once

// Independent reference implementations used only by the tests.

#include <functional>
#include <optional>
#include <vector>

#include "halp/basis.hpp"
#include "halp/costnet.hpp"
#include "halp/lp.hpp"
#include "halp/model.hpp"

namespace halp::ref {

/// Adaptive Simpson on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12);

/// E[g(x)] under Beta(alpha, beta) by tanh-sinh quadrature, which copes
/// with the endpoint singularities of alpha, beta < 1. tol is relative.
double beta_expectation(double alpha, double beta, const std::function<double(double)>& g, double tol = 1e-12);
/// Same over [lo, hi] only.
double beta_expectation(double alpha, double beta, const std::function<double(double)>& g, double lo, double hi,
                        double tol = 1e-12);

/// Beta density from std::lgamma.
double beta_density(double x, double alpha, double beta);

struct GridMax {
    double tau = -1e300;
    std::vector<double> point;
};

/// Every grid point visited; tau from the direct formula R - sum_i w_i F_i.
/// Ties keep the first point in row-major order (last variable fastest).
GridMax enumerate_violation(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, const GridSpec& grid);

/// All discrete states (row-major, last variable fastest).
std::vector<std::vector<double>> all_states(const HybridMDP& mdp);

/// Exact value iteration on a fully discrete model until the sup-norm change is below tol.
std::vector<double> exact_vi(const HybridMDP& mdp, double gamma, double tol = 1e-12);

/// Optimal value of a box-bounded LP by enumerating every vertex; nullopt when infeasible.
std::optional<double> vertex_lp(const RelaxedLP& lp);

/// Brute-force minimum of a cost network.
double enumerate_network(const CostNetwork& net, std::vector<int>* argmin = nullptr);

}  // namespace halp::ref
