#include "halp/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "halp/error.hpp"

namespace halp {

const char* to_string(LpStatus s) noexcept {
    switch (s) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
        case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

// min c.y  s.t.  G y >= h
struct Problem {
    Mat G;
    Vec h;
    Vec c;
};

enum class Outcome { Optimal, Unbounded, IterationLimit };

class ActiveSetSimplex {
public:
    ActiveSetSimplex(const Problem& p, const LpOptions& o, int& iterations)
        : p_(p), opts_(o), iterations_(iterations), dim_(static_cast<int>(p.c.size())) {
        const auto k = p_.G.rows();
        tol_.resize(k);
        row_norm_.resize(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            tol_[j] = opts_.feasibility_tol * (1.0 + std::fabs(p_.h[j]));
            row_norm_[j] = std::max(p_.G.row(j).cwiseAbs().maxCoeff(), 1e-300);
        }
    }

    Outcome solve(Vec& y) {
        y_ = y;
        slack_ = p_.G * y_ - p_.h;
        if (!crash()) {
            y = y_;
            return Outcome::Unbounded;
        }
        refactor();
        const Outcome out = iterate();
        y = y_;
        return out;
    }

private:
    int rows() const { return static_cast<int>(p_.G.rows()); }

    Vec row(int k) const {
        if (k < rows()) return p_.G.row(k).transpose();
        return pins_[k - rows()];
    }

    double rhs(int k) const { return k < rows() ? p_.h[k] : pin_rhs_[k - rows()]; }

    bool is_pin(int k) const { return k >= rows(); }

    // Add `a` to the orthonormal row-space basis if independent.
    bool extend(std::vector<Vec>& q, const Vec& a) const {
        Vec r = a;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& qi : q) r -= qi.dot(r) * qi;
        }
        const double n = r.norm();
        if (n <= 1e-9 * std::max(1.0, a.norm())) return false;
        q.push_back(r / n);
        return true;
    }

    Vec project_out(const std::vector<Vec>& q, Vec v) const {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& qi : q) v -= qi.dot(v) * qi;
        }
        return v;
    }

    // Smallest step along d before a nonactive row blocks; -1 if none.
    int ratio_test(const Vec& gd, const std::vector<char>& active, double d_norm, double& step, bool bland) const {
        int best = -1;
        step = std::numeric_limits<double>::infinity();
        double best_pivot = 0.0;
        for (int j = 0; j < rows(); ++j) {
            if (active[j]) continue;
            if (!(gd[j] < -1e-10 * row_norm_[j] * d_norm)) continue;
            const double t = std::max(0.0, slack_[j]) / -gd[j];
            if (best < 0 || t < step - 1e-12 * std::max(1.0, step)) {
                best = j;
                step = t;
                best_pivot = -gd[j] / row_norm_[j];
            } else if (!bland && t <= step + 1e-12 * std::max(1.0, step) && -gd[j] / row_norm_[j] > best_pivot) {
                best = j;
                step = std::min(step, t);
                best_pivot = -gd[j] / row_norm_[j];
            }
        }
        return best;
    }

    // Move from a feasible point to a vertex without increasing the objective.
    bool crash() {
        std::vector<Vec> q;
        std::vector<char> active(static_cast<std::size_t>(rows()), 0);
        basis_.clear();
        for (int j = 0; j < rows() && static_cast<int>(basis_.size()) < dim_; ++j) {
            if (slack_[j] <= tol_[j] && extend(q, p_.G.row(j).transpose())) {
                basis_.push_back(j);
                active[j] = 1;
            }
        }
        while (static_cast<int>(basis_.size()) < dim_) {
            Vec d = project_out(q, -p_.c);
            if (d.norm() <= 1e-12 * std::max(1.0, p_.c.norm())) {
                for (int j = 0; j < dim_; ++j) {
                    d = project_out(q, Vec::Unit(dim_, j));
                    if (d.norm() > 1e-6) break;
                }
            }
            d /= d.cwiseAbs().maxCoeff();
            Vec gd = p_.G * d;
            double step = 0.0;
            int block = ratio_test(gd, active, 1.0, step, true);
            if (block < 0) {
                if (p_.c.dot(d) < -opts_.optimality_tol) return false;
                d = -d;
                gd = -gd;
                block = ratio_test(gd, active, 1.0, step, true);
                if (block < 0) {
                    // d spans a line of the feasible set along which the objective is flat
                    pins_.push_back(d);
                    pin_rhs_.push_back(d.dot(y_));
                    extend(q, d);
                    basis_.push_back(rows() + static_cast<int>(pins_.size()) - 1);
                    continue;
                }
            }
            y_ += step * d;
            slack_ += step * gd;
            slack_[block] = 0.0;
            extend(q, p_.G.row(block).transpose());
            basis_.push_back(block);
            active[block] = 1;
        }
        return true;
    }

    void refactor() {
        Eigen::MatrixXd b(dim_, dim_);
        Vec hb(dim_);
        for (int i = 0; i < dim_; ++i) {
            b.row(i) = row(basis_[i]).transpose();
            hb[i] = rhs(basis_[i]);
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
        binv_ = lu.inverse();
        y_ = binv_ * hb;
        slack_ = p_.G * y_ - p_.h;
        for (int k : basis_) {
            if (!is_pin(k)) slack_[k] = 0.0;
        }
        since_refactor_ = 0;
    }

    Outcome iterate() {
        std::vector<char> active(static_cast<std::size_t>(rows()), 0);
        for (int k : basis_) {
            if (!is_pin(k)) active[k] = 1;
        }
        int degenerate = 0;
        for (;;) {
            if (iterations_ >= opts_.max_iterations) return Outcome::IterationLimit;
            const bool bland = degenerate >= opts_.degenerate_before_bland;
            const Vec lambda = binv_.transpose() * p_.c;
            int leave = -1;
            for (int i = 0; i < dim_; ++i) {
                if (is_pin(basis_[i]) || !(lambda[i] < -opts_.optimality_tol)) continue;
                if (leave < 0) {
                    leave = i;
                } else if (bland ? basis_[i] < basis_[leave] : lambda[i] < lambda[leave]) {
                    leave = i;
                }
            }
            if (leave < 0) return Outcome::Optimal;

            const Vec d = binv_.col(leave);
            const Vec gd = p_.G * d;
            double step = 0.0;
            const int enter = ratio_test(gd, active, d.cwiseAbs().maxCoeff(), step, bland);
            if (enter < 0) return Outcome::Unbounded;
            ++iterations_;

            y_ += step * d;
            slack_ += step * gd;
            slack_[enter] = 0.0;
            const Eigen::RowVectorXd u = p_.G.row(enter) * binv_;
            Eigen::RowVectorXd v = u;
            v[leave] -= 1.0;
            binv_ -= d * v / gd[enter];
            active[basis_[leave]] = 0;
            active[enter] = 1;
            basis_[leave] = enter;

            degenerate = step <= 1e-12 ? degenerate + 1 : 0;
            if (++since_refactor_ >= opts_.refactor_every) refactor();
        }
    }

    const Problem& p_;
    const LpOptions& opts_;
    int& iterations_;
    int dim_;
    Vec tol_;
    Vec row_norm_;
    Vec y_;
    Vec slack_;
    std::vector<int> basis_;
    std::vector<Vec> pins_;
    std::vector<double> pin_rhs_;
    Eigen::MatrixXd binv_;
    int since_refactor_ = 0;
};

}  // namespace

LpResult solve_lp(const RelaxedLP& lp, const LpOptions& opts) {
    const int n = static_cast<int>(lp.objective.size());
    if (n == 0) throw ContractViolation("solve_lp: empty objective");
    for (double v : lp.objective) {
        if (!std::isfinite(v)) throw NumericError("solve_lp: non-finite objective coefficient");
    }
    for (const auto& r : lp.rows) {
        if (static_cast<int>(r.coefficients.size()) != n) throw ContractViolation("solve_lp: row width differs from objective");
        if (!std::isfinite(r.rhs)) throw NumericError("solve_lp: non-finite right-hand side");
        for (double v : r.coefficients) {
            if (!std::isfinite(v)) throw NumericError("solve_lp: non-finite row coefficient");
        }
    }
    if (lp.box && !(*lp.box > 0.0)) throw ContractViolation("solve_lp: box bound must be positive");

    const int m = static_cast<int>(lp.rows.size());
    const int nbox = lp.box ? 2 * n : 0;

    Vec w0 = Vec::Zero(n);
    if (opts.warm_start) {
        if (static_cast<int>(opts.warm_start->size()) != n) throw ContractViolation("solve_lp: warm start has the wrong size");
        for (int i = 0; i < n; ++i) w0[i] = (*opts.warm_start)[i];
    }
    if (lp.box) w0 = w0.cwiseMax(-*lp.box).cwiseMin(*lp.box);

    double worst = 0.0;
    double max_rhs = 0.0;
    for (const auto& r : lp.rows) {
        double s = -r.rhs;
        for (int i = 0; i < n; ++i) s += r.coefficients[i] * w0[i];
        worst = std::max(worst, -s);
        max_rhs = std::max(max_rhs, std::fabs(r.rhs));
    }

    LpResult res;
    const auto fill_rows = [&](Problem& p, bool phase1) {
        const int dim = n + (phase1 ? 1 : 0);
        p.G.setZero(m + nbox + (phase1 ? 1 : 0), dim);
        p.h.setZero(p.G.rows());
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < n; ++i) p.G(j, i) = lp.rows[j].coefficients[i];
            if (phase1) p.G(j, n) = 1.0;
            p.h[j] = lp.rows[j].rhs;
        }
        for (int i = 0; i < nbox / 2; ++i) {
            p.G(m + 2 * i, i) = 1.0;
            p.h[m + 2 * i] = -*lp.box;
            p.G(m + 2 * i + 1, i) = -1.0;
            p.h[m + 2 * i + 1] = -*lp.box;
        }
        if (phase1) p.G(m + nbox, n) = 1.0;
    };

    Vec w = w0;
    if (worst > opts.feasibility_tol * (1.0 + max_rhs)) {
        Problem p1;
        fill_rows(p1, true);
        p1.c = Vec::Unit(n + 1, n);
        Vec y(n + 1);
        y.head(n) = w0;
        y[n] = worst;
        ActiveSetSimplex s1(p1, opts, res.iterations);
        const Outcome o1 = s1.solve(y);
        w = y.head(n);
        if (o1 == Outcome::IterationLimit) {
            res.status = LpStatus::IterationLimit;
        } else if (y[n] > opts.feasibility_tol * (1.0 + max_rhs) * 10.0) {
            res.status = LpStatus::Infeasible;
        }
    }
    if (res.status == LpStatus::Optimal) {
        Problem p2;
        fill_rows(p2, false);
        p2.c = Eigen::Map<const Vec>(lp.objective.data(), n);
        ActiveSetSimplex s2(p2, opts, res.iterations);
        switch (s2.solve(w)) {
            case Outcome::Optimal: res.status = LpStatus::Optimal; break;
            case Outcome::Unbounded: res.status = LpStatus::Unbounded; break;
            case Outcome::IterationLimit: res.status = LpStatus::IterationLimit; break;
        }
    }
    res.weights.assign(w.data(), w.data() + n);
    res.objective = 0.0;
    for (int i = 0; i < n; ++i) res.objective += lp.objective[i] * res.weights[i];
    for (const auto& r : lp.rows) {
        double s = -r.rhs;
        for (int i = 0; i < n; ++i) s += r.coefficients[i] * res.weights[i];
        res.max_violation = std::max(res.max_violation, -s);
    }
    return res;
}

}  // namespace halp
