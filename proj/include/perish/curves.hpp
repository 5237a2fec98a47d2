#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perish/backend.hpp"
#include "perish/corpus.hpp"

namespace perish {

struct LearningCurvePoint {
    double size = 0.0;  // words
    double loss = 0.0;  // nats per token
};

// loss(n) = a * n^(-b) + c
struct LearningCurveFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double residual_sse = 0.0;  // in log-loss space
    double r2_log = 0.0;        // 1 - SSE / centered SS of log loss
    std::size_t point_count = 0;
    double min_size = 0.0;
    double max_size = 0.0;
    std::string backend_id;

    double predict(double size) const;
};

struct PowerLawOptions {
    int grid_points = 400;        // coarse scan of c over [0, min_loss)
    double golden_tolerance = 1e-15;  // relative to min_loss
};

// Minimizes sum_i (log loss_i - log(a n_i^-b + c))^2. For each candidate c the
// pair (a, b) comes from regressing log(loss - c) on log n; c itself is found
// by a grid scan refined with golden-section search. Throws FitError for fewer
// than three distinct sizes, non-positive losses, or a curve that does not
// decrease.
LearningCurveFit fit_power_law(std::span<const LearningCurvePoint> points, const PowerLawOptions& opts = {});

struct Inversion {
    double size = 0.0;
    bool extrapolated = false;  // outside the sizes the curve was fitted on
};

// size = ((loss - c) / a)^(-1/b). Throws SaturationError when loss <= c.
Inversion invert_curve(const LearningCurveFit& fit, double loss);

struct EffectivenessPoint {
    PeriodId train_period;
    PeriodId test_period;
    int delta_months = 0;
    double delta_t_years = 0.0;
    double native_size = 0.0;     // |A|
    double effective_size = 0.0;  // |B|, +inf when saturated
    double effectiveness = 0.0;   // |B| / |A|
    bool extrapolated = false;
    bool noise = false;      // effectiveness > 1 inside the fitted range
    bool saturated = false;  // loss below the native curve's irreducible term
};

// Inverts the test period's own learning curve at the cross-period loss of a
// model. Throws SaturationError (with both periods named) when the model beats
// every finite same-period dataset, and DataError when the record and curve
// come from different backends.
EffectivenessPoint effective_size(const EvalRecord& model_eval, const LearningCurveFit& native_fit);

// ---------------------------------------------------------------------------
// Batch fitting from a manifest.

struct CurveKey {
    std::string topic;
    PeriodId train_period;
    PeriodId test_period;
    std::string backend_id;

    bool native() const { return train_period == test_period; }
    auto operator<=>(const CurveKey&) const = default;
};

struct CurveFitSet {
    std::map<CurveKey, LearningCurveFit> fits;
    std::map<CurveKey, std::vector<LearningCurvePoint>> points;
    std::vector<std::string> warnings;
};

// Groups best-model records by (topic, train period, test period, backend)
// and fits one curve per group with at least three sizes. Failed fits and
// non-monotone curves (rises above `monotone_tolerance` nats) become warnings.
CurveFitSet fit_learning_curves(const std::vector<EvalRecord>& records, bool native_only = true,
                                double monotone_tolerance = 0.05);

struct EffectivenessSeries {
    std::string topic;
    std::string backend_id;
    PeriodId reference_period;
    std::size_t reference_size = 0;
    std::vector<EffectivenessPoint> points;  // ascending delta_t
    std::vector<std::string> warnings;
};

// One point per test period at or after the reference period, from the best
// reference-period model of size reference_size (default: the largest size
// trained for that period). Test periods without a native curve are skipped
// with a warning; saturated inversions are kept with effective_size = inf.
EffectivenessSeries build_effectiveness_series(const std::vector<EvalRecord>& records, const std::string& topic,
                                               const PeriodId& reference_period, const CurveFitSet& native_fits,
                                               std::optional<std::size_t> reference_size = std::nullopt,
                                               const std::string& backend_id = "");

}  // namespace perish
