#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "halp/model.hpp"
#include "halp/special_fn.hpp"

namespace halp {

/// Univariate factor f_ij on a continuous state variable.
struct UnivariateFactor {
    int target = 0;
    UnivariateKernel kernel;
};

/// f(x) = table(x_D) * prod_j f_j(x_j). An empty discrete scope means the
/// table is the single value 1.
struct BasisFunction {
    std::vector<int> discrete_vars;
    std::vector<int> discrete_sizes;
    std::vector<double> table{1.0};
    std::vector<UnivariateFactor> factors;

    static BasisFunction constant();
    static BasisFunction univariate(int target, UnivariateKernel k);
    static BasisFunction product(std::vector<UnivariateFactor> factors);
    static BasisFunction indicator(const HybridMDP& mdp, int var, int value);

    bool is_constant() const { return discrete_vars.empty() && factors.empty() && table.size() == 1 && table[0] == 1.0; }

    /// Sorted state ids the function reads.
    std::vector<int> scope() const;
};

/// Throws ConfigError when a basis function is malformed for the model.
void check_basis(const HybridMDP& mdp, const BasisFunction& f);

struct LinearValueFunction {
    std::vector<BasisFunction> basis;
    std::vector<double> weights;
};

double evaluate(const BasisFunction& f, std::span<const double> x);
double value(const LinearValueFunction& v, std::span<const double> x);

/// g(x, a) = E[f(x') | x, a]; z is the joint state-action assignment.
double backproject(const BasisFunction& f, const HybridMDP& mdp, std::span<const double> z);

/// F(x, a) = f(x) - gamma g(x, a).
double constraint_coefficient(const BasisFunction& f, const HybridMDP& mdp, double gamma, std::span<const double> z);

/// All coefficients F_i at once, sharing transition parameter evaluations.
std::vector<double> constraint_coefficients(std::span<const BasisFunction> basis, const HybridMDP& mdp, double gamma,
                                            std::span<const double> z);

/// Joint ids that F_i(x, a) depends on: the basis scope plus the parents of
/// every child in that scope.
std::vector<int> coefficient_scope(const BasisFunction& f, const HybridMDP& mdp);

struct UniformDensity {
    friend bool operator==(const UniformDensity&, const UniformDensity&) = default;
};
struct Categorical {
    std::vector<double> probs;
};
using MarginalDensity = std::variant<UniformDensity, BetaPdf, Pwl, Categorical>;

struct RelevanceComponent {
    double weight = 1.0;
    std::vector<MarginalDensity> marginals;  ///< one per state variable
};

/// psi(x) = sum_l w_l prod_i psi_li(x_i).
class StateRelevanceDensity {
public:
    StateRelevanceDensity(const HybridMDP& mdp, std::vector<RelevanceComponent> components);

    /// Equal discrete mass and U[0,1] marginals.
    static StateRelevanceDensity uniform(const HybridMDP& mdp);

    const std::vector<RelevanceComponent>& components() const { return components_; }

private:
    std::vector<RelevanceComponent> components_;
};

/// alpha_i = E_psi[f_i].
double relevance_weight(const BasisFunction& f, const StateRelevanceDensity& psi);

}  // namespace halp
