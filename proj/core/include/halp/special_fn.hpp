#pragma once

#include <span>
#include <variant>
#include <vector>

namespace halp {

/// Shape parameters of a beta density; both strictly positive.
struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;

    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

/// One linear piece `a*x + b` active on [l, r].
struct PwlSegment {
    double l = 0.0;
    double r = 1.0;
    double a = 0.0;
    double b = 0.0;

    friend bool operator==(const PwlSegment&, const PwlSegment&) = default;
};

/// Sum of indicator-weighted linear pieces. Pieces may leave gaps or overlap.
using PwlSegments = std::vector<PwlSegment>;

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).
double log_beta_fn(double a, double b);

double beta_pdf(double x, BetaParams p);
double log_beta_pdf(double x, BetaParams p);

/// Regularized incomplete beta I_u(alpha, beta).
double beta_cdf(double u, BetaParams p);

/// E[x^n (1-x)^m] under Beta(alpha, beta).
double expect_monomial(BetaParams p, int n, int m);

/// E[Beta(x | f)] under Beta(x | p). Requires p.alpha + f.alpha > 1 and
/// p.beta + f.beta > 1.
double expect_beta_pdf(BetaParams p, BetaParams f);

/// E[f(x)] under Beta(x | p) for a piecewise linear f.
double expect_pwl(BetaParams p, const PwlSegments& f);

/// Throws DomainError unless 0 <= l <= r <= 1 and coefficients are finite.
void check_pwl(const PwlSegments& f);

/// Value of a piecewise linear function. Pieces are treated as half-open
/// [l, r) except that r == 1 includes the right endpoint, so adjacent pieces
/// sharing a knot are not double counted.
double eval_pwl(const PwlSegments& f, double x);

// Univariate factor families with closed-form beta expectations.

struct Monomial {
    int n = 0;
    int m = 0;
    friend bool operator==(const Monomial&, const Monomial&) = default;
};

struct BetaPdf {
    BetaParams shape;
    friend bool operator==(const BetaPdf&, const BetaPdf&) = default;
};

struct Pwl {
    PwlSegments segments;
    friend bool operator==(const Pwl&, const Pwl&) = default;
};

using UnivariateKernel = std::variant<Monomial, BetaPdf, Pwl>;

double eval_kernel(const UnivariateKernel& k, double x);

/// Closed-form E[k(x)] under Beta(x | p).
double expect_kernel(BetaParams p, const UnivariateKernel& k);

struct MixtureComponent {
    double weight = 1.0;
    BetaParams params;
};

double expect_mixture(std::span<const MixtureComponent> components, const UnivariateKernel& k);

}  // namespace halp
