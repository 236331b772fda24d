#pragma once

namespace psim::eval {

// Regularized lower and upper incomplete gamma functions, a > 0, x >= 0.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, double df);

double normal_pdf(double x);
double normal_cdf(double x);
double normal_sf(double x);

}  // namespace psim::eval
