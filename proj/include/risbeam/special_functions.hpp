#pragma once

namespace risbeam {

// Gaussian tail Q(x) = P(Z > x), Z ~ N(0, 1).
double q_function(double x);
// Inverse of q_function on (0, 1).
double q_inverse(double p);

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Central chi-square with k degrees of freedom.
double chi2_cdf(double k, double x);
double chi2_sf(double k, double x);
// x with chi2_sf(k, x) = p.
double chi2_sf_inverse(double k, double p);

// Noncentral chi-square with k degrees of freedom and noncentrality nc,
// summed as a Poisson mixture of central terms outward from the Poisson mode.
// Throws NumericalError("detection", terms) if the tail does not fall below
// the tolerance within the term cap.
double ncx2_cdf(double k, double nc, double x);
double ncx2_sf(double k, double nc, double x);

}  // namespace risbeam
