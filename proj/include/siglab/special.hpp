// Special functions needed by the tests: log-beta, regularized incomplete
// beta (continued fraction), normal and Student-t CDFs.
#pragma once

namespace siglab {

// ln B(a, b)
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b), a,b > 0, x in [0,1].
// Evaluated with the Lentz modified continued fraction.
double incomplete_beta(double a, double b, double x);

// Standard normal CDF.
double normal_cdf(double z);

// CDF of Student's t with df degrees of freedom.
double student_t_cdf(double t, double df);

// Two-sided p-value for an observed t statistic: 2 * min(F(t), 1 - F(t)).
double student_t_two_sided_p(double t, double df);

}  // namespace siglab
