#include <doctest.h>

#include <cmath>

#include "perish/decay.hpp"
#include "perish/error.hpp"
#include "perish/rng.hpp"

using namespace perish;

namespace {

std::vector<TimedValue> exp_series(double mu, std::vector<double> ts, double scale = 1.0) {
    std::vector<TimedValue> s;
    for (double t : ts) s.push_back({t, scale * std::exp(-mu * t)});
    return s;
}

std::vector<double> half_years() {
    std::vector<double> ts;
    for (int k = 1; k <= 10; ++k) ts.push_back(0.5 * k);
    return ts;
}

}  // namespace

TEST_CASE("exact exponential recovers mu") {
    const auto f = fit_exponential_decay(exp_series(0.1, half_years()));
    CHECK(f.mu == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(f.std_error < 1e-12);
    CHECK(f.n_points == 10);
    CHECK_FALSE(f.intercept_used);
}

TEST_CASE("constant series has no decay") {
    std::vector<TimedValue> s;
    for (double t : half_years()) s.push_back({t, 1.0});
    const auto f = fit_exponential_decay(s);
    CHECK(f.mu == 0.0);
    CHECK(f.half_life.censored);
    CHECK(f.half_life.text == "∞");
}

TEST_CASE("clipping, dropping and the intercept option") {
    std::vector<TimedValue> s{{0, 1.2}, {1, 0.9}, {2, 0.8}, {3, -0.1}, {4, 0.6}};
    const auto f = fit_exponential_decay(s);
    CHECK(f.clipped == 1);
    CHECK(f.dropped == 1);
    CHECK(f.n_points == 4);
    DecayOptions raw;
    raw.clip_at_one = false;
    CHECK(fit_exponential_decay(s, raw).clipped == 0);
    DecayOptions icpt;
    icpt.intercept = true;
    const auto shifted = fit_exponential_decay(exp_series(0.2, half_years(), 0.7), icpt);
    CHECK(shifted.mu == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(shifted.intercept == doctest::Approx(std::log(0.7)).epsilon(1e-12));
    CHECK_THROWS_AS(fit_exponential_decay(std::vector<TimedValue>{{1, 0.5}, {2, 0.0}, {3, -1}}), FitError);
}

TEST_CASE("half-life formatting") {
    CHECK(half_life(0.151).text == "4.59");
    CHECK(half_life(0.245).text == "2.83");
    CHECK(half_life(0.004103).text == "100> (168.9)");
    CHECK(half_life(0.004103).censored);
    CHECK(half_life(0.004103).years == doctest::Approx(std::log(2.0) / 0.004103));
    CHECK(half_life(0.0).text == "∞");
    CHECK(half_life(-0.3).text == "∞");
    CHECK(half_life(std::log(2.0)).years == doctest::Approx(1.0));
}

TEST_CASE("significance bands") {
    CHECK(significance_band(0.0005) == Band::kP001);
    CHECK(significance_band(0.001) == Band::kP01);
    CHECK(significance_band(0.005) == Band::kP01);
    CHECK(significance_band(0.01) == Band::kP05);
    CHECK(significance_band(0.02) == Band::kP05);
    CHECK(significance_band(0.05) == Band::kNotSignificant);
    CHECK(significance_band(1.0) == Band::kNotSignificant);
    CHECK(significance_band(0.0) == Band::kP001);
    CHECK_THROWS_AS(significance_band(-0.1), DataError);
    CHECK_THROWS_AS(significance_band(1.5), DataError);
    CHECK_THROWS_AS(significance_band(NAN), DataError);

    SUBCASE("monotone non-increasing step function") {
        int prev = 3;
        for (int i = 0; i <= 10000; ++i) {
            const int b = static_cast<int>(significance_band(i / 10000.0));
            CHECK(b <= prev);
            prev = b;
        }
    }
}

TEST_CASE("pairwise decay difference") {
    const auto si = exp_series(0.2, half_years());
    const auto sj = exp_series(0.1, half_years());

    SUBCASE("identical series") {
        const auto f = pairwise_decay_difference(si, si);
        CHECK(f.beta == 0.0);
        CHECK(f.band == Band::kNotSignificant);
    }
    SUBCASE("noiseless gap of 0.1") {
        const auto f = pairwise_decay_difference(si, sj);
        CHECK(std::abs(f.beta - 0.1) < 1e-9);
        CHECK(f.band == Band::kP001);
        CHECK(f.n_common_points == 10);
    }
    SUBCASE("swap negates beta, keeps p") {
        Rng rng(3);
        auto ni = si, nj = sj;
        for (auto& v : ni) v.y *= std::exp(0.05 * rng.normal());
        for (auto& v : nj) v.y *= std::exp(0.05 * rng.normal());
        const auto a = pairwise_decay_difference(ni, nj);
        const auto b = pairwise_decay_difference(nj, ni);
        CHECK(a.beta == -b.beta);
        CHECK(a.p_value == b.p_value);
        CHECK(a.std_error == b.std_error);
    }
    SUBCASE("common scaling of the ratio leaves beta unchanged") {
        DecayOptions raw;
        raw.clip_at_one = false;
        const auto base = pairwise_decay_difference(si, sj, raw);
        auto si2 = si, sj2 = sj;
        for (std::size_t k = 0; k < si2.size(); ++k) {
            const double g = 0.3 + 0.05 * static_cast<double>(k);
            si2[k].y *= g;
            sj2[k].y *= g;
        }
        CHECK(pairwise_decay_difference(si2, sj2, raw).beta == doctest::Approx(base.beta).epsilon(1e-12));
        DecayOptions icpt = raw;
        icpt.intercept = true;
        auto si3 = si;
        for (auto& v : si3) v.y *= 0.5;
        CHECK(pairwise_decay_difference(si3, sj, icpt).beta ==
              doctest::Approx(pairwise_decay_difference(si, sj, icpt).beta).epsilon(1e-12));
    }
    SUBCASE("inner join on t") {
        std::vector<TimedValue> partial(sj.begin(), sj.begin() + 2);
        CHECK_THROWS_AS(pairwise_decay_difference(si, partial), FitError);
        partial.push_back(sj[5]);
        CHECK(pairwise_decay_difference(si, partial).n_common_points == 3);
    }
}

TEST_CASE("functional form verdicts") {
    std::vector<double> ts;
    for (int k = 0; k <= 10; ++k) ts.push_back(0.5 * k);
    int exp_ok = 0, pow_ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<TimedValue> e, p;
        for (double t : ts) {
            e.push_back({t, std::exp(-0.3 * t) * (1.0 + 0.01 * rng.normal())});
            p.push_back({t, std::pow(1.0 + t, -1.0) * (1.0 + 0.01 * rng.normal())});
        }
        DecayOptions raw;
        raw.clip_at_one = false;
        if (compare_functional_forms(e, raw).verdict == FormVerdict::kExponential) ++exp_ok;
        if (compare_functional_forms(p, raw).verdict == FormVerdict::kPowerLaw) ++pow_ok;
    }
    CHECK(exp_ok >= 95);
    CHECK(pow_ok >= 95);

    const auto cmp = compare_functional_forms(exp_series(0.3, ts));
    CHECK(cmp.exp_points == 11);
    CHECK(cmp.pow_points == 10);
    CHECK(cmp.t_zero_handling.find("1 point") != std::string::npos);
    CHECK_THROWS_AS(compare_functional_forms(exp_series(0.3, {0.5, 1.0, 1.5})), FitError);
    CHECK(to_string(FormVerdict::kPowerLaw) == "power_law");
}

TEST_CASE("report rendering") {
    const std::string header = "topic,estimate_per_year,half_life_years,stderr,p_value\n";
    CHECK(render_decay_table({}) == header);

    DecayFit politics;
    politics.mu = 0.151;
    politics.std_error = 0.004;
    politics.p_value = 1e-6;
    politics.half_life = half_life(0.151);
    DecayFit history;
    history.mu = 0.004103;
    history.std_error = 6.56e-4;
    history.p_value = 1e-5;
    history.half_life = half_life(0.004103);
    const std::vector<TopicDecay> rows{{"politics", politics}, {"history", history}};
    const auto table = render_decay_table(rows);
    CHECK(table.rfind(header, 0) == 0);
    const auto second = table.find('\n', header.size());
    CHECK(table.substr(header.size(), second - header.size()).rfind("history,-0.004,100> (168.9),", 0) == 0);
    CHECK(table.find("politics,-0.151,4.59,0.004,") != std::string::npos);

    const std::vector<std::string> topics{"a", "b"};
    const std::vector<PairwiseFit> pairs{{"a", "b", 0.1, 0.01, 1e-5, Band::kP001, 10}};
    CHECK(render_band_matrix(topics, pairs) == "topic,a,b\na,0,3\nb,3,0\n");
    CHECK(render_band_matrix({}, {}) == "topic\n");
    CHECK(render_pairwise_table(pairs).find("a,b,0.1,0.01,1e-05,3,10") != std::string::npos);
}
