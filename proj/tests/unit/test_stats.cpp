#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "perish/error.hpp"
#include "perish/stats.hpp"

using namespace perish;

TEST_CASE("incomplete beta: closed forms") {
    for (double x : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
        CHECK(stats::incomplete_beta(2.5, 1.0, x) == doctest::Approx(std::pow(x, 2.5)).epsilon(1e-12));
        CHECK(stats::incomplete_beta(1.0, 3.0, x) == doctest::Approx(1.0 - std::pow(1.0 - x, 3.0)).epsilon(1e-12));
    }
    for (double a : {0.5, 1.0, 4.0, 30.0}) CHECK(stats::incomplete_beta(a, a, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("incomplete beta agrees with an independent implementation") {
    for (double a : {0.5, 1.5, 3.0, 12.0, 80.0}) {
        for (double b : {0.5, 2.0, 7.0, 40.0}) {
            for (double x : {0.01, 0.2, 0.5, 0.8, 0.99}) {
                CAPTURE(a);
                CAPTURE(b);
                CAPTURE(x);
                CHECK(stats::incomplete_beta(a, b, x) == doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("Student t: tabulated two-sided 5% critical values") {
    // Standard t-table entries (3 decimals), two-sided alpha = 0.05.
    const std::vector<std::pair<double, double>> table{
        {1, 12.706}, {2, 4.303}, {5, 2.571}, {10, 2.228}, {20, 2.086}, {30, 2.042}, {120, 1.980}};
    for (const auto& [df, t] : table) {
        CAPTURE(df);
        CHECK(std::abs(stats::student_t_two_sided_p(t, df) - 0.05) < 2e-4);
    }
    // two-sided alpha = 0.01
    CHECK(std::abs(stats::student_t_two_sided_p(3.169, 10) - 0.01) < 1e-4);
    CHECK(std::abs(stats::student_t_two_sided_p(2.750, 30) - 0.01) < 1e-4);
}

TEST_CASE("Student t CDF agrees with an independent implementation") {
    for (double df : {1.0, 2.5, 7.0, 33.0}) {
        const boost::math::students_t dist(df);
        for (double t : {-6.0, -1.3, 0.0, 0.4, 2.2, 9.0}) {
            CHECK(stats::student_t_cdf(t, df) == doctest::Approx(boost::math::cdf(dist, t)).epsilon(1e-10));
        }
    }
    CHECK(stats::student_t_two_sided_p(0.0, 5) == 1.0);
    CHECK(stats::student_t_two_sided_p(INFINITY, 5) == 0.0);
}

TEST_CASE("OLS with intercept matches textbook formulas") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6};
    const std::vector<double> y{2.1, 3.9, 6.2, 7.8, 10.1, 12.2};
    // oracle: simple-regression closed forms
    const double n = 6, mx = 3.5;
    double my = 0, sxx = 0, sxy = 0;
    for (double v : y) my += v / n;
    for (int i = 0; i < 6; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double slope = sxy / sxx, icpt = my - slope * mx;
    double sse = 0;
    for (int i = 0; i < 6; ++i) sse += std::pow(y[i] - icpt - slope * x[i], 2);
    const double se = std::sqrt(sse / (n - 2) / sxx);

    const auto f = stats::ols(x, y, true);
    CHECK(f.slope == doctest::Approx(slope).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(icpt).epsilon(1e-12));
    CHECK(f.slope_se == doctest::Approx(se).epsilon(1e-10));
    CHECK(f.df == 4);
    const boost::math::students_t dist(4);
    CHECK(f.p_value == doctest::Approx(2 * boost::math::cdf(boost::math::complement(dist, slope / se))).epsilon(1e-8));
}

TEST_CASE("OLS through the origin") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{1.1, 1.9, 3.2, 3.9};
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 4; ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
    }
    const double slope = sxy / sxx;
    double sse = 0;
    for (int i = 0; i < 4; ++i) sse += std::pow(y[i] - slope * x[i], 2);
    const auto f = stats::ols(x, y, false);
    CHECK(f.slope == doctest::Approx(slope).epsilon(1e-12));
    CHECK(f.intercept == 0.0);
    CHECK(f.df == 3);
    CHECK(f.slope_se == doctest::Approx(std::sqrt(sse / 3 / sxx)).epsilon(1e-10));
}

TEST_CASE("OLS degenerate cases") {
    const std::vector<double> x{1, 2, 3};
    CHECK_THROWS_AS(stats::ols(std::vector<double>{1, 2}, std::vector<double>{1, 2}, true), FitError);
    CHECK_THROWS_AS(stats::ols(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}, true), FitError);
    const auto exact = stats::ols(x, std::vector<double>{2, 4, 6}, false);
    CHECK(exact.slope_se == 0.0);
    CHECK(exact.p_value == 0.0);
    const auto flat = stats::ols(x, std::vector<double>{0, 0, 0}, false);
    CHECK(flat.t_stat == 0.0);
    CHECK(flat.p_value == 1.0);
}
