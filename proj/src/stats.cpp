#include "perish/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "perish/error.hpp"

namespace perish::stats {
namespace {

// Continued fraction for I_x(a, b); converges for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete_beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete_beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw Error("student_t: df must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    const double x = df / (df + t * t);
    return incomplete_beta(0.5 * df, 0.5, x);
}

double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_sided_p(t, df);
    return t >= 0.0 ? 1.0 - tail : tail;
}

OlsFit ols(std::span<const double> x, std::span<const double> y, bool intercept) {
    if (x.size() != y.size()) throw FitError("ols: x and y differ in length");
    const int n = static_cast<int>(x.size());
    const int k = intercept ? 2 : 1;
    if (n <= k) {
        throw FitError("ols: " + std::to_string(n) + " points leave no residual degrees of freedom");
    }
    OlsFit fit;
    fit.n = n;
    fit.df = n - k;
    fit.has_intercept = intercept;

    double xbar = 0.0, ybar = 0.0;
    if (intercept) {
        for (int i = 0; i < n; ++i) {
            xbar += x[i];
            ybar += y[i];
        }
        xbar /= n;
        ybar /= n;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - xbar;
        const double dy = y[i] - ybar;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw FitError("ols: regressor has no spread");
    fit.slope = sxy / sxx;
    fit.intercept = intercept ? ybar - fit.slope * xbar : 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        fit.sse += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - fit.sse / syy : 1.0;
    const double sigma2 = fit.sse / fit.df;
    fit.slope_se = std::sqrt(sigma2 / sxx);
    if (fit.slope_se > 0.0) {
        fit.t_stat = fit.slope / fit.slope_se;
        fit.p_value = student_t_two_sided_p(fit.t_stat, fit.df);
    } else if (fit.slope == 0.0) {
        fit.t_stat = 0.0;
        fit.p_value = 1.0;
    } else {
        fit.t_stat = std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
        fit.p_value = 0.0;
    }
    return fit;
}

}  // namespace perish::stats
