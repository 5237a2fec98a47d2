#pragma once

#include <span>

namespace perish::stats {

// I_x(a, b), the regularized incomplete beta function, by Lentz's continued
// fraction. a, b > 0; x in [0, 1].
double incomplete_beta(double a, double b, double x);

// Student-t CDF with `df` degrees of freedom (df > 0, not necessarily integer).
double student_t_cdf(double t, double df);

// P(|T| >= |t|). Infinite |t| gives 0, t = 0 gives 1.
double student_t_two_sided_p(double t, double df);

// Ordinary least squares of y on x, with or without an intercept. Inference
// uses n - k degrees of freedom (k = 1 or 2). When the residuals vanish the
// standard error is 0 and the t statistic is +-inf (p = 0), unless the slope
// is also exactly 0, in which case t = 0 and p = 1.
struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    double sse = 0.0;
    double r2 = 0.0;  // centered with an intercept, uncentered without
    int n = 0;
    int df = 0;
    bool has_intercept = false;
};

// Throws FitError when n <= k or x has no spread.
OlsFit ols(std::span<const double> x, std::span<const double> y, bool intercept);

}  // namespace perish::stats
