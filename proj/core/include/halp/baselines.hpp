#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "halp/basis.hpp"
#include "halp/model.hpp"
#include "halp/random.hpp"

namespace halp {

/// Grid VI stores one dense N x N matrix per joint action.
inline constexpr std::size_t kMaxGridPoints = 20000;

/// Normalized grid transition model: P_a(j | i) proportional to the
/// transition density of point j from (point i, a).
struct GridModel {
    std::vector<std::vector<double>> points;
    std::size_t action_count = 0;
    std::vector<std::vector<double>> transition;  ///< per action, row-major N x N
    std::vector<std::vector<double>> reward;      ///< per action, N
};

GridModel build_grid_model(const HybridMDP& mdp, std::span<const std::vector<double>> points);

struct GridViResult {
    std::vector<double> values;
    std::vector<std::size_t> actions;  ///< greedy joint action index per point
    int iterations = 0;
    double residual = 0.0;  ///< final sup-norm Bellman residual
};

GridViResult grid_vi(const GridModel& g, double gamma, int max_iters = 10000, double bellman_tol = 1e-6);
GridViResult grid_vi(const HybridMDP& mdp, std::span<const std::vector<double>> points, double gamma,
                     int max_iters = 10000, double bellman_tol = 1e-6);

/// Grid value function extended off the grid by applying the normalized
/// backup at the query state.
class GridValue {
public:
    GridValue(const HybridMDP& mdp, std::vector<std::vector<double>> points, std::vector<double> values,
              double gamma);

    /// Joint action index maximizing R + gamma sum_j P_G(j | x, a) V_j.
    std::size_t greedy_action(std::span<const double> x) const;

private:
    const HybridMDP* mdp_;
    std::vector<std::vector<double>> points_;
    std::vector<double> values_;
    double gamma_;
    std::vector<std::vector<double>> log_x_;    ///< per state variable, ln x_j over points
    std::vector<std::vector<double>> log_1mx_;  ///< ln(1 - x_j)
};

/// N i.i.d. uniform states.
std::vector<std::vector<double>> uniform_random_grid(const HybridMDP& mdp, std::size_t n, Rng& rng);
/// Full eps-grid over the state space.
std::vector<std::vector<double>> uniform_state_grid(const HybridMDP& mdp, double eps);

struct L2ViResult {
    std::vector<double> weights;
    int iterations = 0;
    double residual = 0.0;  ///< RMS change of the fitted values in the last step
    double fit_residual = 0.0;  ///< RMS of X w - y for the last fit
};

/// Least-squares value iteration with closed-form backups. Throws
/// NumericError when the design matrix is rank deficient.
L2ViResult l2_vi(const HybridMDP& mdp, std::span<const BasisFunction> basis, double gamma,
                 std::span<const std::vector<double>> points, int max_iters = 1000, double tol = 1e-6);

}  // namespace halp
