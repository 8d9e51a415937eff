#include "halp/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace halp {

namespace {

constexpr std::array<double, 8> kXk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double value;
    double error;
};

Panel kronrod(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * kWk[7];
    double g = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXk[j];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        k += kWk[j] * (f1 + f2);
        if (j % 2 == 1) g += kWg[j / 2] * (f1 + f2);
    }
    return {k * h, std::fabs((k - g) * h)};
}

void adapt(const std::function<double(double)>& f, double a, double b, Panel whole, double tol,
           int depth, QuadratureResult& out) {
    out.evaluations += 15;
    if (whole.error <= tol || depth <= 0 || b - a < 1e-15) {
        out.value += whole.value;
        out.error += whole.error;
        return;
    }
    const double m = 0.5 * (a + b);
    const Panel left = kronrod(f, a, m);
    const Panel right = kronrod(f, m, b);
    adapt(f, a, m, left, 0.5 * tol, depth - 1, out);
    adapt(f, m, b, right, 0.5 * tol, depth - 1, out);
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_depth) {
    QuadratureResult out;
    if (a == b) return out;
    const Panel whole = kronrod(f, a, b);
    const double tol = std::max(abs_tol, rel_tol * std::fabs(whole.value));
    adapt(f, a, b, whole, tol, max_depth, out);
    return out;
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double abs_tol, double rel_tol,
                           int max_depth) {
    std::vector<double> cuts{a};
    for (double p : breakpoints) {
        if (p > a && p < b) cuts.push_back(p);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    QuadratureResult total;
    const double per = abs_tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const QuadratureResult part = integrate(f, cuts[i], cuts[i + 1], per, rel_tol, max_depth);
        total.value += part.value;
        total.error += part.error;
        total.evaluations += part.evaluations;
    }
    return total;
}

}  // namespace halp
