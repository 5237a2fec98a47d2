#pragma once

#include <span>
#include <string>
#include <vector>

#include "perish/curves.hpp"

namespace perish {

// A (Δt in years, effectiveness) observation.
struct TimedValue {
    double t = 0.0;
    double y = 0.0;
};

std::vector<TimedValue> timed_values(const EffectivenessSeries& series);

struct DecayOptions {
    bool intercept = false;
    bool clip_at_one = true;  // y > 1 (and saturated +inf) become 1 before the log
};

struct HalfLife {
    double years = 0.0;  // raw ln2/mu, +inf when mu <= 0
    bool censored = false;
    std::string text;  // "4.59", "100> (168.9)" above the cap, "∞" for mu <= 0
};

HalfLife half_life(double mu, double cap = 100.0);

struct DecayFit {
    double mu = 0.0;  // per year; effectiveness ~ exp(-mu t)
    double std_error = 0.0;
    double t_stat = 0.0;
    double p_value = 1.0;
    double intercept = 0.0;
    double r2 = 0.0;
    HalfLife half_life;
    int n_points = 0;
    int dropped = 0;  // y <= 0 or not finite
    int clipped = 0;
    bool intercept_used = false;
};

// OLS of log y on t (through the origin unless opts.intercept). Throws
// FitError with fewer than three usable points.
DecayFit fit_exponential_decay(std::span<const TimedValue> series, const DecayOptions& opts = {},
                               double half_life_cap = 100.0);

// ---------------------------------------------------------------------------

enum class Band : int {
    kNotSignificant = 0,  // p >= 0.05
    kP05 = 1,             // p < 0.05
    kP01 = 2,             // p < 0.01
    kP001 = 3,            // p < 0.001
};

struct SignificanceThresholds {
    double p001 = 1e-3;
    double p01 = 0.01;
    double p05 = 0.05;
};

// Strict inequalities. Throws DataError for p outside [0, 1].
Band significance_band(double p, const SignificanceThresholds& th = {});

struct PairwiseFit {
    std::string topic_i;
    std::string topic_j;
    double beta = 0.0;  // per year; log y_i - log y_j ~ -beta t
    double std_error = 0.0;
    double p_value = 1.0;
    Band band = Band::kNotSignificant;
    int n_common_points = 0;
};

// Inner-joins the series on t (|Δ| <= 1e-9 years) and regresses the log ratio
// on t. Throws FitError with fewer than three common points.
PairwiseFit pairwise_decay_difference(std::span<const TimedValue> series_i, std::span<const TimedValue> series_j,
                                      const DecayOptions& opts = {}, const SignificanceThresholds& th = {},
                                      std::string topic_i = "i", std::string topic_j = "j");

// ---------------------------------------------------------------------------

enum class FormVerdict { kExponential, kPowerLaw, kInconclusive };

std::string to_string(FormVerdict v);

struct FormComparison {
    double exp_sse = 0.0;
    double exp_r2 = 0.0;
    double pow_sse = 0.0;
    double pow_r2 = 0.0;
    int exp_points = 0;
    int pow_points = 0;
    FormVerdict verdict = FormVerdict::kInconclusive;
    std::string t_zero_handling;
};

// Straight-line fits (with intercept) of log y on t and of log y on log t.
// Δt = 0 points enter the exponential fit only. Verdict is the lower SSE
// unless the two are within `margin` (relative) of each other.
FormComparison compare_functional_forms(std::span<const TimedValue> series, const DecayOptions& opts = {},
                                        double margin = 0.05);

// ---------------------------------------------------------------------------

struct TopicDecay {
    std::string topic;
    DecayFit fit;
};

// Header `topic,estimate_per_year,half_life_years,stderr,p_value`; rows sorted
// by |mu| ascending, estimate printed as -mu.
std::string render_decay_table(std::span<const TopicDecay> fits);

// Square matrix of band codes 0-3; first row and column are topic names.
std::string render_band_matrix(std::span<const std::string> topics, std::span<const PairwiseFit> pairs);

// Long form: topic_i,topic_j,beta,stderr,p_value,band,n_common_points
std::string render_pairwise_table(std::span<const PairwiseFit> pairs);

}  // namespace perish
