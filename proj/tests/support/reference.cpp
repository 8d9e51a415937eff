#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "halp/oracles.hpp"

namespace halp::ref {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    // the relative floor stops refinement once pieces are at roundoff level
    if (depth <= 0 || std::fabs(diff) <= 15.0 * std::max(tol, 1e-15 * std::fabs(left + right))) {
        return left + right + diff / 15.0;
    }
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

double beta_density(double x, double alpha, double beta) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double lnorm = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
    return std::exp(lnorm + (alpha - 1.0) * std::log(x) + (beta - 1.0) * std::log(1.0 - x));
}

double beta_expectation(double alpha, double beta, const std::function<double(double)>& g, double lo, double hi,
                        double tol) {
    if (!(hi > lo)) return 0.0;
    const double lnorm = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
    // xc is the signed distance to the nearer end of [lo, hi]; it keeps x and
    // 1 - x accurate next to 0 and 1 where the density may be singular
    const auto f = [&](double x, double xc) {
        const double left = (lo == 0.0 && xc < 0.0) ? -xc : x;
        const double right = (hi == 1.0 && xc > 0.0) ? xc : 1.0 - x;
        if (left <= 0.0 || right <= 0.0) return 0.0;
        return std::exp(lnorm + (alpha - 1.0) * std::log(left) + (beta - 1.0) * std::log(right)) * g(x);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, lo, hi, tol);
}

double beta_expectation(double alpha, double beta, const std::function<double(double)>& g, double tol) {
    return beta_expectation(alpha, beta, g, 0.0, 1.0, tol);
}

GridMax enumerate_violation(const LinearValueFunction& v, const HybridMDP& mdp, double gamma, const GridSpec& grid) {
    GridMax best;
    const std::size_t n = grid.values.size();
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> z(n);
    for (;;) {
        for (std::size_t k = 0; k < n; ++k) z[k] = grid.values[k][idx[k]];
        double tau = reward_joint(mdp, z);
        for (std::size_t i = 0; i < v.basis.size(); ++i) {
            if (v.weights[i] == 0.0) continue;
            tau -= v.weights[i] * (evaluate(v.basis[i], z) - gamma * backproject(v.basis[i], mdp, z));
        }
        if (tau > best.tau) {
            best.tau = tau;
            best.point = z;
        }
        auto k = static_cast<std::ptrdiff_t>(n) - 1;
        while (k >= 0 && ++idx[k] == grid.values[k].size()) idx[k--] = 0;
        if (k < 0) return best;
    }
}

std::vector<std::vector<double>> all_states(const HybridMDP& mdp) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& v : mdp.states()) {
        if (!v.discrete()) throw std::invalid_argument("all_states needs a discrete model");
        std::vector<std::vector<double>> next;
        for (const auto& p : out) {
            for (int l = 0; l < v.levels; ++l) {
                auto q = p;
                q.push_back(l);
                next.push_back(std::move(q));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<double> exact_vi(const HybridMDP& mdp, double gamma, double tol) {
    const auto states = all_states(mdp);
    const std::size_t ns = states.size();
    const std::size_t na = mdp.action_space_size();
    // P[a][i][j] as products of per-child probabilities
    std::vector<std::vector<std::vector<double>>> p(na, std::vector<std::vector<double>>(ns, std::vector<double>(ns)));
    std::vector<std::vector<double>> r(na, std::vector<double>(ns));
    for (std::size_t a = 0; a < na; ++a) {
        const auto act = mdp.action_from_index(a);
        for (std::size_t i = 0; i < ns; ++i) {
            const auto z = mdp.joint(states[i], act);
            r[a][i] = reward(mdp, states[i], act);
            std::vector<std::vector<double>> child(mdp.states().size());
            for (const auto& tf : mdp.transitions()) {
                const auto& d = std::get<DiscreteTransition>(tf);
                child[d.child] = distribution_at(mdp, d, z);
            }
            for (std::size_t j = 0; j < ns; ++j) {
                double pr = 1.0;
                for (std::size_t s = 0; s < states[j].size(); ++s) pr *= child[s][static_cast<std::size_t>(states[j][s])];
                p[a][i][j] = pr;
            }
        }
    }
    std::vector<double> v(ns, 0.0), next(ns);
    for (int it = 0; it < 1000000; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < ns; ++i) {
            double best = -1e300;
            for (std::size_t a = 0; a < na; ++a) {
                double q = r[a][i];
                for (std::size_t j = 0; j < ns; ++j) q += gamma * p[a][i][j] * v[j];
                best = std::max(best, q);
            }
            next[i] = best;
            change = std::max(change, std::fabs(best - v[i]));
        }
        v.swap(next);
        if (change < tol) break;
    }
    return v;
}

std::optional<double> vertex_lp(const RelaxedLP& lp) {
    const std::size_t n = lp.objective.size();
    // rows a.w >= b, including both sides of the box
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    for (const auto& c : lp.rows) {
        a.push_back(c.coefficients);
        b.push_back(c.rhs);
    }
    if (lp.box) {
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> e(n, 0.0);
            e[i] = 1.0;
            a.push_back(e);
            b.push_back(-*lp.box);
            e[i] = -1.0;
            a.push_back(e);
            b.push_back(-*lp.box);
        }
    }
    const std::size_t m = a.size();
    std::optional<double> best;
    std::vector<std::size_t> pick(n);
    for (std::size_t i = 0; i < n; ++i) pick[i] = i;
    if (m < n) return std::nullopt;
    for (;;) {
        Eigen::MatrixXd mat(n, n);
        Eigen::VectorXd rhs(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) mat(r, c) = a[pick[r]][c];
            rhs[r] = b[pick[r]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(mat);
        if (lu.rank() == static_cast<Eigen::Index>(n)) {
            const Eigen::VectorXd w = lu.solve(rhs);
            bool feasible = true;
            for (std::size_t r = 0; r < m && feasible; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < n; ++c) s += a[r][c] * w[c];
                feasible = s >= b[r] - 1e-7;
            }
            if (feasible) {
                double obj = 0.0;
                for (std::size_t c = 0; c < n; ++c) obj += lp.objective[c] * w[c];
                if (!best || obj < *best) best = obj;
            }
        }
        std::size_t k = n;
        while (k > 0 && pick[k - 1] == m - n + k - 1) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t j = k; j < n; ++j) pick[j] = pick[j - 1] + 1;
    }
    return best;
}

double enumerate_network(const CostNetwork& net, std::vector<int>* argmin) {
    const auto& levels = net.levels();
    const std::size_t n = levels.size();
    std::vector<int> a(n, 0);
    double best = 1e300;
    for (;;) {
        double s = 0.0;
        for (const auto& f : net.factors()) {
            std::size_t idx = 0;
            for (int v : f.scope) idx = idx * static_cast<std::size_t>(levels[v]) + static_cast<std::size_t>(a[v]);
            s += f.values[idx];
        }
        if (s < best) {
            best = s;
            if (argmin) *argmin = a;
        }
        auto k = static_cast<std::ptrdiff_t>(n) - 1;
        while (k >= 0 && ++a[k] == levels[k]) a[k--] = 0;
        if (k < 0) return best;
    }
}

}  // namespace halp::ref
