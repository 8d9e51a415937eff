#pragma once

#include <functional>
#include <span>

namespace halp {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-10, double rel_tol = 1e-10, int max_depth = 50);

/// Same, with the interval split at the given interior breakpoints first.
/// Use it when f has kinks or narrow peaks at known locations.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double abs_tol = 1e-10,
                           double rel_tol = 1e-10, int max_depth = 50);

}  // namespace halp
