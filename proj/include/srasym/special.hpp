#pragma once

namespace srasym {

/// Regularized lower/upper incomplete gamma functions P(a,x), Q(a,x),
/// evaluated by series for x < a+1 and by Lentz continued fraction otherwise.
/// Relative accuracy ~1e-13.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

/// P(chi^2_dof > x) via the regularized upper incomplete gamma.
double chi_square_upper_tail(double dof, double x);

}  // namespace srasym
