#include "halp/special_fn.hpp"

#include <math.h>

#include <cmath>
#include <limits>
#include <string>

#include "halp/error.hpp"

namespace halp {

namespace {

void require_params(BetaParams p, const char* what) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0) || !std::isfinite(p.alpha) || !std::isfinite(p.beta)) {
        throw DomainError(std::string(what) + ": beta parameters must be positive and finite (alpha=" +
                          std::to_string(p.alpha) + ", beta=" + std::to_string(p.beta) + ")");
    }
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 20000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) return h;
    }
    throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive, got " + std::to_string(x));
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_beta_fn(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double log_beta_pdf(double x, BetaParams p) {
    require_params(p, "beta_pdf");
    if (x < 0.0 || x > 1.0) return -std::numeric_limits<double>::infinity();
    const double lx = (p.alpha == 1.0) ? 0.0 : (p.alpha - 1.0) * std::log(x);
    const double l1x = (p.beta == 1.0) ? 0.0 : (p.beta - 1.0) * std::log1p(-x);
    return lx + l1x - log_beta_fn(p.alpha, p.beta);
}

double beta_pdf(double x, BetaParams p) {
    return std::exp(log_beta_pdf(x, p));
}

double beta_cdf(double u, BetaParams p) {
    require_params(p, "beta_cdf");
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("beta_cdf: argument outside [0,1]: " + std::to_string(u));
    if (u == 0.0) return 0.0;
    if (u == 1.0) return 1.0;
    const double a = p.alpha;
    const double b = p.beta;
    const double log_front = a * std::log(u) + b * std::log1p(-u) - log_beta_fn(a, b);
    const double front = std::exp(log_front);
    if (u < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, u) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - u) / b;
}

double expect_monomial(BetaParams p, int n, int m) {
    require_params(p, "expect_monomial");
    if (n < 0 || m < 0) throw DomainError("expect_monomial: exponents must be nonnegative");
    const double a = p.alpha;
    const double b = p.beta;
    if (n + m <= 64) {
        // (a)_n (b)_m / (a+b)_{n+m}: the Gamma ratio written as a finite product
        double r = 1.0;
        for (int k = 0; k < n; ++k) r *= (a + k) / (a + b + k);
        for (int k = 0; k < m; ++k) r *= (b + k) / (a + b + n + k);
        return r;
    }
    return std::exp(log_beta_fn(a + n, b + m) - log_beta_fn(a, b));
}

double expect_beta_pdf(BetaParams p, BetaParams f) {
    require_params(p, "expect_beta_pdf");
    require_params(f, "expect_beta_pdf");
    const double a = p.alpha + f.alpha - 1.0;
    const double b = p.beta + f.beta - 1.0;
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DomainError("expect_beta_pdf: product of densities is not integrable (alpha sum " +
                          std::to_string(p.alpha + f.alpha) + ", beta sum " +
                          std::to_string(p.beta + f.beta) + ")");
    }
    return std::exp(log_beta_fn(a, b) - log_beta_fn(p.alpha, p.beta) - log_beta_fn(f.alpha, f.beta));
}

void check_pwl(const PwlSegments& f) {
    for (const auto& s : f) {
        if (!(s.l >= 0.0 && s.l <= s.r && s.r <= 1.0)) {
            throw DomainError("pwl segment bounds must satisfy 0 <= l <= r <= 1");
        }
        if (!std::isfinite(s.a) || !std::isfinite(s.b)) throw DomainError("pwl coefficients must be finite");
    }
}

double eval_pwl(const PwlSegments& f, double x) {
    double v = 0.0;
    for (const auto& s : f) {
        const bool inside = (x >= s.l && x < s.r) || (s.r == 1.0 && x == 1.0 && s.l <= 1.0);
        if (inside) v += s.a * x + s.b;
    }
    return v;
}

double expect_pwl(BetaParams p, const PwlSegments& f) {
    require_params(p, "expect_pwl");
    check_pwl(f);
    const double a = p.alpha;
    const double b = p.beta;
    const double mean = a / (a + b);
    const double lb = log_beta_fn(a, b);
    // I_u(a+1, b) = I_u(a, b) - u^a (1-u)^b / (a B(a, b))
    struct Point {
        double u = -1.0;
        double cdf = 0.0;
        double shift = 0.0;
    } cached;
    const auto at = [&](double u) {
        if (u != cached.u) {
            cached.u = u;
            cached.cdf = beta_cdf(u, p);
            cached.shift = (u <= 0.0 || u >= 1.0) ? 0.0 : std::exp(a * std::log(u) + b * std::log1p(-u) - lb) / a;
        }
        return cached;
    };
    double total = 0.0;
    for (const auto& s : f) {
        if (s.r <= s.l) continue;
        const Point lo = at(s.l);
        const Point hi = at(s.r);
        const double mass = hi.cdf - lo.cdf;
        const double mass_plus = mass - (hi.shift - lo.shift);
        total += s.a * mean * mass_plus + s.b * mass;
    }
    return total;
}

double eval_kernel(const UnivariateKernel& k, double x) {
    struct Visitor {
        double x;
        double operator()(const Monomial& m) const {
            return std::pow(x, m.n) * std::pow(1.0 - x, m.m);
        }
        double operator()(const BetaPdf& b) const { return beta_pdf(x, b.shape); }
        double operator()(const Pwl& p) const { return eval_pwl(p.segments, x); }
    };
    return std::visit(Visitor{x}, k);
}

double expect_kernel(BetaParams p, const UnivariateKernel& k) {
    struct Visitor {
        BetaParams p;
        double operator()(const Monomial& m) const { return expect_monomial(p, m.n, m.m); }
        double operator()(const BetaPdf& b) const { return expect_beta_pdf(p, b.shape); }
        double operator()(const Pwl& w) const { return expect_pwl(p, w.segments); }
    };
    return std::visit(Visitor{p}, k);
}

double expect_mixture(std::span<const MixtureComponent> components, const UnivariateKernel& k) {
    double total = 0.0;
    for (const auto& c : components) {
        if (c.weight == 0.0) continue;
        total += c.weight * expect_kernel(c.params, k);
    }
    return total;
}

}  // namespace halp
