#include <doctest.h>

#include <cmath>

#include "perish/curves.hpp"
#include "perish/error.hpp"
#include "perish/rng.hpp"

using namespace perish;

namespace {

// Oracle: points straight from the closed form.
std::vector<LearningCurvePoint> closed_form(double a, double b, double c, std::vector<double> sizes) {
    std::vector<LearningCurvePoint> pts;
    for (double n : sizes) pts.push_back({n, a * std::pow(n, -b) + c});
    return pts;
}

std::vector<double> doubling(double from, int count) {
    std::vector<double> s;
    for (int i = 0; i < count; ++i) s.push_back(from * std::pow(2.0, i));
    return s;
}

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

LearningCurveFit fit_abc(double a, double b, double c) {
    LearningCurveFit f;
    f.a = a;
    f.b = b;
    f.c = c;
    f.min_size = 1e3;
    f.max_size = 64e3;
    return f;
}

const PeriodId kT1 = PeriodId::parse("2012-10");
const PeriodId kT0 = PeriodId::parse("2013-10");

}  // namespace

TEST_CASE("noiseless power law with floor is recovered") {
    const auto fit = fit_power_law(closed_form(2.0, 0.3, 1.0, doubling(1000, 7)));
    CHECK(rel(fit.a, 2.0) < 1e-3);
    CHECK(rel(fit.b, 0.3) < 1e-3);
    CHECK(rel(fit.c, 1.0) < 1e-3);
    CHECK(fit.point_count == 7);
    CHECK(fit.residual_sse < 1e-12);
    CHECK(fit.r2_log > 0.999999);
}

TEST_CASE("pure power law gives c near zero") {
    const auto fit = fit_power_law(closed_form(5.0, 0.5, 0.0, doubling(1000, 7)));
    CHECK(fit.c <= 1e-3);
    CHECK(rel(fit.b, 0.5) < 1e-3);
}

TEST_CASE("fit errors") {
    CHECK_THROWS_AS(fit_power_law(closed_form(2, 0.3, 1, {1000, 2000})), FitError);
    CHECK_THROWS_AS(fit_power_law(closed_form(2, 0.3, 1, {1000, 1000, 2000})), FitError);
    std::vector<LearningCurvePoint> rising{{1000, 2.0}, {2000, 2.1}, {4000, 2.2}};
    try {
        fit_power_law(rising);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(std::string(e.what()).find("2000") != std::string::npos);
    }
    CHECK_THROWS_AS(fit_power_law(std::vector<LearningCurvePoint>{{1000, 1.0}, {2000, 1.0}, {4000, 1.0}}), FitError);
}

TEST_CASE("inversion") {
    const auto fit = fit_abc(2.0, 0.3, 1.0);
    SUBCASE("round trip across a size grid") {
        for (double n = 1000; n <= 64000; n *= 1.37) {
            CHECK(rel(invert_curve(fit, fit.predict(n)).size, n) < 1e-9);
        }
    }
    SUBCASE("loss at the floor saturates") {
        CHECK_THROWS_AS(invert_curve(fit, 1.0), SaturationError);
        CHECK_THROWS_AS(invert_curve(fit, 0.5), SaturationError);
    }
    SUBCASE("L(1) = a + c inverts to 1") {
        CHECK(invert_curve(fit, 3.0).size == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(invert_curve(fit, 3.0).extrapolated);
    }
    SUBCASE("strictly decreasing in loss") {
        double prev = INFINITY;
        for (double loss = 1.01; loss < 3.0; loss += 0.01) {
            const double s = invert_curve(fit, loss).size;
            CHECK(s < prev);
            prev = s;
        }
    }
    SUBCASE("extrapolation flag") {
        CHECK_FALSE(invert_curve(fit, fit.predict(8000)).extrapolated);
        CHECK(invert_curve(fit, fit.predict(100)).extrapolated);
        CHECK(invert_curve(fit, fit.predict(1e6)).extrapolated);
    }
}

TEST_CASE("effective size: 50M-word model matching the 40M point is 80% effective") {
    auto fit = fit_abc(2.0, 0.3, 1.0);
    fit.backend_id = "ngram";
    const EvalRecord rec{TrainJob{"t", kT1, 50'000'000, "ngram", 0}, kT0, fit.predict(40e6), 100, 0.0};
    const auto pt = effective_size(rec, fit);
    CHECK(std::abs(pt.effectiveness - 0.8) < 1e-6);
    CHECK(pt.delta_months == 12);
    CHECK(pt.delta_t_years == 1.0);
    CHECK(pt.native_size == 50e6);
}

TEST_CASE("effective size: self-consistency, staleness, backend isolation") {
    auto fit = fit_abc(2.0, 0.3, 1.0);
    fit.backend_id = "ngram";
    const EvalRecord self{TrainJob{"t", kT0, 32000, "ngram", 0}, kT0, fit.predict(32000), 100, 0.0};
    CHECK(std::abs(effective_size(self, fit).effectiveness - 1.0) < 0.05);

    const EvalRecord stale{TrainJob{"t", kT1, 32000, "ngram", 0}, kT0, fit.predict(1000) + 0.1, 100, 0.0};
    const auto pt = effective_size(stale, fit);
    CHECK(pt.effectiveness < 1000.0 / 32000.0);
    CHECK(pt.extrapolated);

    const EvalRecord other{TrainJob{"t", kT1, 32000, "gpt", 0}, kT0, 2.0, 100, 0.0};
    CHECK_THROWS_AS(effective_size(other, fit), DataError);

    const EvalRecord below{TrainJob{"t", kT1, 32000, "ngram", 0}, kT0, 0.9, 100, 0.0};
    try {
        effective_size(below, fit);
        FAIL("expected SaturationError");
    } catch (const SaturationError& e) {
        CHECK(std::string(e.what()).find("2012-10") != std::string::npos);
        CHECK(std::string(e.what()).find("2013-10") != std::string::npos);
    }
}

// Three free parameters pin b only when the sizes span a wide range; on six
// or seven doublings b and c trade off and 10% is missed on a quarter of seeds.
TEST_CASE("exponent recovered within 10% under 1% multiplicative noise, 100 seeds") {
    const double a = 50.0, b = 0.3, c = 1.0;
    int within = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        auto pts = closed_form(a, b, c, doubling(1000, 10));
        for (auto& p : pts) p.loss *= std::exp(0.01 * rng.normal());
        const auto fit = fit_power_law(pts);
        if (rel(fit.b, b) <= 0.10) ++within;
    }
    CHECK(within == 100);
}

namespace {

std::vector<EvalRecord> grid_records(const std::string& backend = "ngram") {
    // Two periods; period 2 is "stale" for the period-1 models.
    const PeriodId p1 = PeriodId::parse("2012-10"), p2 = PeriodId::parse("2012-11");
    std::vector<EvalRecord> recs;
    for (std::size_t n : {8000u, 16000u, 32000u, 64000u}) {
        for (const auto& p : {p1, p2}) {
            recs.push_back({TrainJob{"t", p, n, backend, 0}, p, 2.0 * std::pow(n, -0.3) + 1.0, 100, 1.0});
        }
    }
    recs.push_back({TrainJob{"t", p1, 64000, backend, 0}, p2, 2.0 * std::pow(32000.0, -0.3) + 1.0, 100, 1.0});
    return recs;
}

}  // namespace

TEST_CASE("batch curves and effectiveness series") {
    const auto recs = grid_records();
    const auto curves = fit_learning_curves(recs);
    CHECK(curves.fits.size() == 2);
    CHECK(curves.warnings.empty());
    const auto series = build_effectiveness_series(recs, "t", PeriodId::parse("2012-10"), curves);
    CHECK(series.reference_size == 64000);
    REQUIRE(series.points.size() == 2);
    CHECK(series.points[0].delta_t_years == 0.0);
    CHECK(series.points[0].effectiveness == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(series.points[1].delta_months == 1);
    CHECK(series.points[1].effectiveness == doctest::Approx(0.5).epsilon(1e-6));

    SUBCASE("missing native curve skips the point with a warning") {
        CurveFitSet partial = curves;
        partial.fits.erase(CurveKey{"t", PeriodId::parse("2012-11"), PeriodId::parse("2012-11"), "ngram"});
        const auto s = build_effectiveness_series(recs, "t", PeriodId::parse("2012-10"), partial);
        CHECK(s.points.size() == 1);
        CHECK(s.warnings.size() == 1);
    }
    SUBCASE("mixed backends are rejected unless one is picked") {
        auto mixed = recs;
        const auto more = grid_records("other");
        mixed.insert(mixed.end(), more.begin(), more.end());
        const auto c2 = fit_learning_curves(mixed);
        CHECK(c2.fits.size() == 4);
        CHECK_THROWS_AS(build_effectiveness_series(mixed, "t", PeriodId::parse("2012-10"), c2), DataError);
        CHECK(build_effectiveness_series(mixed, "t", PeriodId::parse("2012-10"), c2, std::nullopt, "other").points.size() == 2);
    }
    SUBCASE("rising curve is a warning, not a failure") {
        auto noisy = recs;
        noisy.push_back({TrainJob{"t", PeriodId::parse("2012-10"), 128000, "ngram", 0}, PeriodId::parse("2012-10"), 2.0, 100, 1.0});
        const auto c3 = fit_learning_curves(noisy);
        CHECK_FALSE(c3.warnings.empty());
    }
}
