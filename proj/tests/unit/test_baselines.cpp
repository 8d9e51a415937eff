#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "halp/baselines.hpp"
#include "halp/bench.hpp"
#include "halp/error.hpp"
#include "halp/policy.hpp"
#include "reference.hpp"

using namespace halp;

namespace {

// One continuous state, one action, x' ~ Beta(1 + x, 2), reward x.
HybridMDP drift_model(double c_reward_only = -1.0) {
    ContinuousTransition t{0, {0}, {{1.0, Expr::constant(1.0) + Expr::var(0), Expr::constant(2.0)}}};
    const Expr r = c_reward_only >= 0.0 ? Expr::constant(c_reward_only) : Expr::var(0);
    return HybridMDP({VariableSpec::continuous("x")}, {VariableSpec::discrete("a", 1)}, {t}, {{{0}, {}, r}}, 0.9, 1.0);
}

}  // namespace

TEST_CASE("single grid point fixed point") {
    const auto mdp = drift_model(3.0);
    const std::vector<std::vector<double>> points{{0.5}};
    const auto r = grid_vi(mdp, points, 0.9, 10000, 1e-12);
    CHECK(r.values[0] == doctest::Approx(30.0).epsilon(1e-10));
    CHECK(r.actions[0] == 0);
}

TEST_CASE("two-point chain matches the hand solution") {
    const auto mdp = drift_model();
    const std::vector<std::vector<double>> points{{0.25}, {0.75}};
    double p[2][2];
    for (int i = 0; i < 2; ++i) {
        const double a = 1.0 + points[i][0];
        const double d0 = ref::beta_density(0.25, a, 2.0), d1 = ref::beta_density(0.75, a, 2.0);
        p[i][0] = d0 / (d0 + d1);
        p[i][1] = d1 / (d0 + d1);
    }
    // (I - gamma P) V = R
    const double g = 0.9;
    const double a11 = 1 - g * p[0][0], a12 = -g * p[0][1], a21 = -g * p[1][0], a22 = 1 - g * p[1][1];
    const double det = a11 * a22 - a12 * a21;
    const double v0 = (0.25 * a22 - a12 * 0.75) / det;
    const double v1 = (a11 * 0.75 - a21 * 0.25) / det;

    const auto model = build_grid_model(mdp, points);
    CHECK(model.transition[0][1] == doctest::Approx(p[0][1]).epsilon(1e-12));
    const auto r = grid_vi(model, g, 100000, 1e-13);
    CHECK(r.values[0] == doctest::Approx(v0).epsilon(1e-10));
    CHECK(r.values[1] == doctest::Approx(v1).epsilon(1e-10));
    CHECK(r.residual < 1e-12);
}

TEST_CASE("grid VI on a discrete model is exact VI") {
    const auto b = make_discrete_ring_admin(2);
    const auto states = ref::all_states(b.mdp);
    const auto exact = ref::exact_vi(b.mdp, 0.95);
    const auto r = grid_vi(b.mdp, states, 0.95, 100000, 1e-12);
    for (std::size_t i = 0; i < states.size(); ++i) CHECK(std::fabs(r.values[i] - exact[i]) < 1e-8);
}

TEST_CASE("grid limits and degenerate inputs") {
    const auto b = make_ring_admin(2);
    Rng rng(1);
    const auto many = uniform_random_grid(b.mdp, kMaxGridPoints + 1, rng);
    CHECK_THROWS_AS(build_grid_model(b.mdp, many), ResourceError);
    CHECK(uniform_state_grid(b.mdp, 0.25).size() == 25);
    CHECK(uniform_random_grid(b.mdp, 10, rng).size() == 10);
}

TEST_CASE("grid value extends off the grid") {
    const auto b = make_ring_admin(2);
    Rng rng(2);
    const auto points = uniform_random_grid(b.mdp, 200, rng);
    const auto r = grid_vi(b.mdp, points, 0.95);
    const auto gv = std::make_shared<const GridValue>(b.mdp, points, r.values, 0.95);
    // at a grid point the extended backup picks the grid policy's action
    for (std::size_t i = 0; i < 20; ++i) CHECK(gv->greedy_action(points[i]) == r.actions[i]);
    const auto a = act(GridGreedyPolicy{gv}, b.mdp, std::vector<double>{0.2, 0.9}, rng);
    REQUIRE(a.size() == 1);
    CHECK((a[0] >= 0.0 && a[0] < 3.0));
}

TEST_CASE("L2 VI") {
    SUBCASE("constant basis converges to the scalar fixed point") {
        const auto mdp = drift_model(2.0);
        const std::vector<BasisFunction> basis{BasisFunction::constant()};
        const auto points = uniform_state_grid(mdp, 0.25);
        const auto r = l2_vi(mdp, basis, 0.9, points, 100000, 1e-12);
        CHECK(r.weights[0] == doctest::Approx(20.0).epsilon(1e-9));
        CHECK(r.fit_residual < 1e-9);
    }
    SUBCASE("rank deficient design") {
        const auto mdp = drift_model();
        const std::vector<BasisFunction> basis{BasisFunction::constant(), BasisFunction::constant()};
        CHECK_THROWS_AS(l2_vi(mdp, basis, 0.9, uniform_state_grid(mdp, 0.25)), NumericError);
    }
}

TEST_CASE("grid transition rows are distributions") {
    const auto b = make_ring_admin(4);
    Rng rng(12);
    const auto points = uniform_random_grid(b.mdp, 150, rng);
    const auto g = build_grid_model(b.mdp, points);
    const std::size_t n = points.size();
    REQUIRE(g.transition.size() == g.action_count);
    for (const auto& p : g.transition) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) sum += p[i * n + j];
            CHECK(std::fabs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("grid VI residuals contract by gamma") {
    const auto b = make_ring_admin(3);
    Rng rng(13);
    const auto g = build_grid_model(b.mdp, uniform_random_grid(b.mdp, 120, rng));
    double prev = grid_vi(g, 0.95, 1, 0.0).residual;
    for (int k = 2; k <= 40; ++k) {
        const double r = grid_vi(g, 0.95, k, 0.0).residual;
        CHECK(r <= 0.95 * prev * (1.0 + 1e-12) + 1e-13);
        prev = r;
    }
}

TEST_CASE("L2 VI with a tabular basis recovers exact VI") {
    const auto b = make_discrete_ring_admin(2);
    std::vector<BasisFunction> basis;
    for (int k = 0; k < 4; ++k) {
        BasisFunction f;
        f.discrete_vars = {0, 1};
        f.discrete_sizes = {2, 2};
        f.table.assign(4, 0.0);
        f.table[static_cast<std::size_t>(k)] = 1.0;
        basis.push_back(std::move(f));
    }
    const auto states = ref::all_states(b.mdp);
    const auto r = l2_vi(b.mdp, basis, 0.95, states, 100000, 1e-13);
    const auto exact = ref::exact_vi(b.mdp, 0.95);
    const LinearValueFunction v{basis, r.weights};
    for (std::size_t i = 0; i < states.size(); ++i) CHECK(std::fabs(value(v, states[i]) - exact[i]) < 1e-6);
}
