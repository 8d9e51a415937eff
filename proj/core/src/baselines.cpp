#include "halp/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "halp/costnet.hpp"
#include "halp/error.hpp"

namespace halp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct LogColumns {
    std::vector<std::vector<double>> log_x;
    std::vector<std::vector<double>> log_1mx;
};

LogColumns log_columns(const HybridMDP& mdp, std::span<const std::vector<double>> points) {
    LogColumns c;
    c.log_x.resize(mdp.states().size());
    c.log_1mx.resize(mdp.states().size());
    for (int s = 0; s < mdp.state_count(); ++s) {
        if (mdp.states()[s].discrete()) continue;
        for (const auto& p : points) {
            c.log_x[s].push_back(std::log(p[s]));
            c.log_1mx[s].push_back(std::log1p(-p[s]));
        }
    }
    return c;
}

struct BetaTerm {
    double log_weight;
    double am1;
    double bm1;
    double log_norm;
};

// Transition densities from one state-action pair, evaluated at grid points.
class RowDensity {
public:
    RowDensity(const HybridMDP& mdp, std::span<const double> z) : mdp_(mdp), per_child_(mdp.states().size()) {
        for (const auto& tf : mdp.transitions()) {
            if (const auto* c = std::get_if<ContinuousTransition>(&tf)) {
                auto& terms = per_child_[c->child].beta;
                for (const auto& m : mixture_at(mdp, *c, z)) {
                    if (m.weight <= 0.0) continue;
                    terms.push_back({std::log(m.weight), m.params.alpha - 1.0, m.params.beta - 1.0,
                                     log_beta_fn(m.params.alpha, m.params.beta)});
                }
            } else {
                const auto& d = std::get<DiscreteTransition>(tf);
                for (double p : distribution_at(mdp, d, z)) per_child_[d.child].log_probs.push_back(std::log(p));
            }
        }
    }

    double log_density(const LogColumns& cols, std::span<const std::vector<double>> points, std::size_t j) const {
        double total = 0.0;
        for (int s = 0; s < mdp_.state_count(); ++s) {
            const auto& c = per_child_[s];
            if (!c.log_probs.empty()) {
                total += c.log_probs[static_cast<std::size_t>(points[j][s])];
                continue;
            }
            const double lx = cols.log_x[s][j];
            const double l1x = cols.log_1mx[s][j];
            double top = kNegInf;
            double acc = 0.0;
            for (const auto& t : c.beta) {
                const double v = t.log_weight + (t.am1 == 0.0 ? 0.0 : t.am1 * lx) +
                                 (t.bm1 == 0.0 ? 0.0 : t.bm1 * l1x) - t.log_norm;
                if (std::isnan(v) || v == kNegInf) continue;
                if (v > top) {
                    acc = acc * std::exp(top - v) + 1.0;
                    top = v;
                } else {
                    acc += std::exp(v - top);
                }
            }
            if (top == kNegInf) return kNegInf;
            total += top + std::log(acc);
        }
        return total;
    }

private:
    struct Child {
        std::vector<BetaTerm> beta;
        std::vector<double> log_probs;
    };
    const HybridMDP& mdp_;
    std::vector<Child> per_child_;
};

std::string describe(std::span<const double> x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
    return s + ")";
}

// Normalized row P_G(. | z) via log-sum-exp.
void normalized_row(const HybridMDP& mdp, std::span<const double> z, const LogColumns& cols,
                    std::span<const std::vector<double>> points, double* out) {
    const RowDensity rd(mdp, z);
    const std::size_t n = points.size();
    double top = kNegInf;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = rd.log_density(cols, points, j);
        top = std::max(top, out[j]);
    }
    if (top == kNegInf || std::isnan(top)) {
        throw NumericError("degenerate grid: zero transition mass from state-action " + describe(z));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = std::exp(out[j] - top);
        sum += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
}

void require_discrete_actions(const HybridMDP& mdp) {
    for (const auto& a : mdp.actions()) {
        if (!a.discrete()) throw CapabilityError("grid baselines need discrete action variables");
    }
}

}  // namespace

GridModel build_grid_model(const HybridMDP& mdp, std::span<const std::vector<double>> points) {
    require_discrete_actions(mdp);
    const std::size_t n = points.size();
    if (n == 0) throw ConfigError("grid must contain at least one point");
    if (n > kMaxGridPoints) {
        throw ResourceError("grid of " + std::to_string(n) + " points exceeds the dense limit of " +
                            std::to_string(kMaxGridPoints));
    }
    GridModel g;
    g.points.assign(points.begin(), points.end());
    g.action_count = mdp.action_space_size();
    const LogColumns cols = log_columns(mdp, points);
    g.transition.assign(g.action_count, std::vector<double>(n * n));
    g.reward.assign(g.action_count, std::vector<double>(n));
    for (std::size_t a = 0; a < g.action_count; ++a) {
        const auto act = mdp.action_from_index(a);
        for (std::size_t i = 0; i < n; ++i) {
            const auto z = mdp.joint(points[i], act);
            g.reward[a][i] = reward_joint(mdp, z);
            normalized_row(mdp, z, cols, points, g.transition[a].data() + i * n);
        }
    }
    return g;
}

GridViResult grid_vi(const GridModel& g, double gamma, int max_iters, double bellman_tol) {
    const auto n = static_cast<Eigen::Index>(g.points.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd next(n);
    GridViResult res;
    res.actions.assign(g.points.size(), 0);
    res.residual = std::numeric_limits<double>::infinity();
    for (res.iterations = 0; res.iterations < max_iters;) {
        next.setConstant(kNegInf);
        for (std::size_t a = 0; a < g.action_count; ++a) {
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> p(
                g.transition[a].data(), n, n);
            Eigen::Map<const Eigen::VectorXd> r(g.reward[a].data(), n);
            const Eigen::VectorXd q = r + gamma * (p * v);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (q[i] > next[i]) {
                    next[i] = q[i];
                    res.actions[i] = a;
                }
            }
        }
        ++res.iterations;
        res.residual = (next - v).lpNorm<Eigen::Infinity>();
        v.swap(next);
        if (res.residual < bellman_tol) break;
    }
    res.values.assign(v.data(), v.data() + n);
    return res;
}

GridViResult grid_vi(const HybridMDP& mdp, std::span<const std::vector<double>> points, double gamma,
                     int max_iters, double bellman_tol) {
    return grid_vi(build_grid_model(mdp, points), gamma, max_iters, bellman_tol);
}

GridValue::GridValue(const HybridMDP& mdp, std::vector<std::vector<double>> points, std::vector<double> values,
                     double gamma)
    : mdp_(&mdp), points_(std::move(points)), values_(std::move(values)), gamma_(gamma) {
    require_discrete_actions(mdp);
    if (points_.size() != values_.size()) throw ContractViolation("grid value: point and value counts differ");
    auto cols = log_columns(mdp, points_);
    log_x_ = std::move(cols.log_x);
    log_1mx_ = std::move(cols.log_1mx);
}

std::size_t GridValue::greedy_action(std::span<const double> x) const {
    const LogColumns cols{log_x_, log_1mx_};
    std::vector<double> row(points_.size());
    std::size_t best = 0;
    double best_q = kNegInf;
    for (std::size_t a = 0; a < mdp_->action_space_size(); ++a) {
        const auto z = mdp_->joint(x, mdp_->action_from_index(a));
        normalized_row(*mdp_, z, cols, points_, row.data());
        double ev = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) ev += row[j] * values_[j];
        const double q = reward_joint(*mdp_, z) + gamma_ * ev;
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

std::vector<std::vector<double>> uniform_random_grid(const HybridMDP& mdp, std::size_t n, Rng& rng) {
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(mdp.states().size());
        for (int s = 0; s < mdp.state_count(); ++s) {
            const auto& v = mdp.states()[s];
            x[s] = v.discrete() ? static_cast<double>(rng.below(static_cast<std::uint64_t>(v.levels))) : rng.uniform();
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

std::vector<std::vector<double>> uniform_state_grid(const HybridMDP& mdp, double eps) {
    const GridSpec full = make_eps_grid(mdp, eps);
    std::vector<std::vector<double>> axes(full.values.begin(), full.values.begin() + mdp.state_count());
    std::vector<std::vector<double>> pts;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (;;) {
        std::vector<double> x(axes.size());
        for (std::size_t s = 0; s < axes.size(); ++s) x[s] = axes[s][idx[s]];
        pts.push_back(std::move(x));
        auto s = static_cast<std::ptrdiff_t>(axes.size()) - 1;
        while (s >= 0 && ++idx[s] == axes[s].size()) idx[s--] = 0;
        if (s < 0) return pts;
    }
}

L2ViResult l2_vi(const HybridMDP& mdp, std::span<const BasisFunction> basis, double gamma,
                 std::span<const std::vector<double>> points, int max_iters, double tol) {
    require_discrete_actions(mdp);
    const auto n = static_cast<Eigen::Index>(points.size());
    const auto k = static_cast<Eigen::Index>(basis.size());
    if (n == 0 || k == 0) throw ConfigError("least-squares VI needs points and basis functions");
    Eigen::MatrixXd x(n, k);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < k; ++i) x(j, i) = evaluate(basis[i], points[j]);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < k) {
        throw NumericError("least-squares VI: design matrix has rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(k) + " basis functions; change the basis or add grid points");
    }
    const std::size_t na = mdp.action_space_size();
    std::vector<Eigen::MatrixXd> g(na, Eigen::MatrixXd(n, k));
    std::vector<Eigen::VectorXd> r(na, Eigen::VectorXd(n));
    for (std::size_t a = 0; a < na; ++a) {
        const auto act = mdp.action_from_index(a);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto z = mdp.joint(points[j], act);
            r[a][j] = reward_joint(mdp, z);
            for (Eigen::Index i = 0; i < k; ++i) g[a](j, i) = backproject(basis[i], mdp, z);
        }
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd fitted = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y(n);
    L2ViResult res;
    res.residual = std::numeric_limits<double>::infinity();
    while (res.iterations < max_iters) {
        y.setConstant(kNegInf);
        for (std::size_t a = 0; a < na; ++a) y = y.cwiseMax(r[a] + gamma * (g[a] * w));
        w = qr.solve(y);
        const Eigen::VectorXd next = x * w;
        ++res.iterations;
        res.residual = (next - fitted).norm() / std::sqrt(static_cast<double>(n));
        res.fit_residual = (next - y).norm() / std::sqrt(static_cast<double>(n));
        fitted = next;
        if (res.residual < tol) break;
    }
    res.weights.assign(w.data(), w.data() + k);
    return res;
}

}  // namespace halp
