#pragma once

namespace spfp::special {

/// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double gamma_q(double a, double x);
/// Regularized incomplete beta I_x(a, b), a, b > 0, 0 <= x <= 1.
double beta_inc(double a, double b, double x);

/// Survival function of the chi-squared distribution with `df` degrees of freedom.
double chi2_sf(double x, double df);
/// Survival function P(T > t) of Student's t with `df` degrees of freedom.
double t_sf(double t, double df);
/// Two-sided p-value P(|T| >= |t|).
double t_two_sided(double t, double df);

}  // namespace spfp::special
