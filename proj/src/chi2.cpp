#include "popsynth/chi2.hpp"

#include "popsynth/errors.hpp"

#include <cmath>
#include <limits>

namespace popsynth {

namespace {

constexpr int kMaxIter = 500;
constexpr double kEps = 3.0e-15;

// series expansion, converges fast for x < a + 1
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction (modified Lentz), for x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0) throw NumericError("gamma_p: a must be positive");
    if (x < 0.0) throw NumericError("gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, int df) {
    if (df < 1) throw NumericError("chi2_cdf: df must be >= 1");
    if (x <= 0.0) return 0.0;
    return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, int df) {
    if (df < 1) throw NumericError("chi2_quantile: df must be >= 1");
    if (p <= 0.0 || p >= 1.0) throw NumericError("chi2_quantile: p must be in (0,1)");

    // Wilson-Hilferty cube approximation for the bracket center
    const double z = [&] {
        // Acklam-style rational approximation of the normal quantile;
        // only used to seed the bracket, bisection does the real work.
        const double t = p < 0.5 ? std::sqrt(-2.0 * std::log(p)) : std::sqrt(-2.0 * std::log(1.0 - p));
        double zz = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                            (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
        return p < 0.5 ? -zz : zz;
    }();
    const double d = static_cast<double>(df);
    const double wh = d * std::pow(1.0 - 2.0 / (9.0 * d) + z * std::sqrt(2.0 / (9.0 * d)), 3.0);

    double lo = 0.0;
    double hi = std::max(wh * 4.0 + 16.0, 16.0);
    while (chi2_cdf(hi, df) < p) hi *= 2.0;

    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (chi2_cdf(mid, df) < p) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-12 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

double chi2_critical(int df) { return chi2_quantile(0.95, df); }

} // namespace popsynth
