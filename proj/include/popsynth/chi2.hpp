#pragma once

namespace popsynth {

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// CDF of the chi-square distribution with df degrees of freedom.
double chi2_cdf(double x, int df);

// Quantile: smallest x with chi2_cdf(x, df) >= p. Wilson-Hilferty start
// refined by bisection on the regularized incomplete gamma.
double chi2_quantile(double p, int df);

// Upper 5% critical value, i.e. chi2_quantile(0.95, df).
double chi2_critical(int df);

} // namespace popsynth
