#include "perish/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "perish/error.hpp"
#include "perish/manifest.hpp"
#include "perish/stats.hpp"

namespace perish {

double LearningCurveFit::predict(double size) const { return a * std::pow(size, -b) + c; }

namespace {

struct Candidate {
    double c = 0.0;
    double a = 0.0;
    double b = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

Candidate evaluate_c(std::span<const LearningCurvePoint> pts, double c) {
    Candidate cand;
    cand.c = c;
    std::vector<double> x, y;
    x.reserve(pts.size());
    y.reserve(pts.size());
    for (const auto& p : pts) {
        const double gap = p.loss - c;
        if (!(gap > 0.0)) return cand;
        x.push_back(std::log(p.size));
        y.push_back(std::log(gap));
    }
    const auto reg = stats::ols(x, y, true);
    if (!(reg.slope < 0.0)) return cand;
    cand.a = std::exp(reg.intercept);
    cand.b = -reg.slope;
    double sse = 0.0;
    for (const auto& p : pts) {
        const double r = std::log(p.loss) - std::log(cand.a * std::pow(p.size, -cand.b) + c);
        sse += r * r;
    }
    cand.sse = sse;
    return cand;
}

std::string describe_rises(std::span<const LearningCurvePoint> pts) {
    std::ostringstream os;
    bool any = false;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].loss >= pts[i - 1].loss) {
            os << (any ? ", " : "") << "(" << pts[i - 1].size << ": " << pts[i - 1].loss << ") -> (" << pts[i].size
               << ": " << pts[i].loss << ")";
            any = true;
        }
    }
    return any ? os.str() : "overall trend";
}

}  // namespace

LearningCurveFit fit_power_law(std::span<const LearningCurvePoint> points, const PowerLawOptions& opts) {
    std::vector<LearningCurvePoint> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const auto& l, const auto& r) { return l.size < r.size; });
    std::set<double> distinct;
    for (const auto& p : pts) {
        if (!(p.size > 0.0)) throw FitError("learning curve point with non-positive size");
        if (!(p.loss > 0.0) || !std::isfinite(p.loss)) throw FitError("learning curve point with non-positive loss");
        distinct.insert(p.size);
    }
    if (distinct.size() < 3) {
        throw FitError("power-law fit needs at least 3 distinct sizes, got " + std::to_string(distinct.size()));
    }
    if (pts.back().loss >= pts.front().loss) {
        throw FitError("degenerate learning curve (loss does not decrease with size): " + describe_rises(pts));
    }

    double min_loss = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) min_loss = std::min(min_loss, p.loss);

    const int grid = std::max(opts.grid_points, 8);
    Candidate best;
    int best_j = -1;
    for (int j = 0; j < grid; ++j) {
        const auto cand = evaluate_c(pts, min_loss * j / grid);
        if (cand.sse < best.sse) {
            best = cand;
            best_j = j;
        }
    }
    if (best_j < 0) {
        throw FitError("degenerate learning curve (no decreasing power law fits): " + describe_rises(pts));
    }

    // Golden-section refinement on the bracket around the best grid cell.
    const double step = min_loss / grid;
    double lo = std::max(0.0, (best_j - 1) * step);
    double hi = std::min(min_loss * (1.0 - 1e-12), (best_j + 1) * step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    auto f1 = evaluate_c(pts, x1);
    auto f2 = evaluate_c(pts, x2);
    const double tol = opts.golden_tolerance * min_loss;
    while (hi - lo > tol) {
        if (f1.sse <= f2.sse) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = evaluate_c(pts, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = evaluate_c(pts, x2);
        }
        if (f1.sse < best.sse) best = f1;
        if (f2.sse < best.sse) best = f2;
    }
    for (double edge : {lo, hi}) {
        const auto cand = evaluate_c(pts, edge);
        if (cand.sse < best.sse) best = cand;
    }

    LearningCurveFit fit;
    fit.a = best.a;
    fit.b = best.b;
    fit.c = best.c;
    fit.residual_sse = best.sse;
    fit.point_count = pts.size();
    fit.min_size = pts.front().size;
    fit.max_size = pts.back().size;
    double mean = 0.0;
    for (const auto& p : pts) mean += std::log(p.loss);
    mean /= static_cast<double>(pts.size());
    double sst = 0.0;
    for (const auto& p : pts) sst += (std::log(p.loss) - mean) * (std::log(p.loss) - mean);
    fit.r2_log = sst > 0.0 ? 1.0 - best.sse / sst : 1.0;
    return fit;
}

Inversion invert_curve(const LearningCurveFit& fit, double loss) {
    if (!(loss > fit.c)) {
        std::ostringstream os;
        os << "loss " << loss << " is at or below the irreducible loss " << fit.c
           << "; no finite dataset from this period reaches it";
        throw SaturationError(os.str());
    }
    Inversion inv;
    inv.size = std::pow((loss - fit.c) / fit.a, -1.0 / fit.b);
    constexpr double kRel = 1e-9;
    inv.extrapolated = inv.size < fit.min_size * (1.0 - kRel) || inv.size > fit.max_size * (1.0 + kRel);
    return inv;
}

EffectivenessPoint effective_size(const EvalRecord& model_eval, const LearningCurveFit& native_fit) {
    if (!native_fit.backend_id.empty() && native_fit.backend_id != model_eval.job.backend_id) {
        throw DataError("backend mismatch: record from '" + model_eval.job.backend_id + "', curve from '" +
                        native_fit.backend_id + "'");
    }
    EffectivenessPoint pt;
    pt.train_period = model_eval.job.train_period;
    pt.test_period = model_eval.test_period;
    pt.delta_months = pt.train_period.months_until(pt.test_period);
    pt.delta_t_years = pt.delta_months / 12.0;
    pt.native_size = static_cast<double>(model_eval.job.subset_size);
    if (!(pt.native_size > 0.0)) throw DataError("record with zero native size");
    Inversion inv;
    try {
        inv = invert_curve(native_fit, model_eval.loss);
    } catch (const SaturationError& e) {
        throw SaturationError("train " + pt.train_period.to_string() + " -> test " + pt.test_period.to_string() +
                              ": " + e.what());
    }
    pt.effective_size = inv.size;
    pt.effectiveness = inv.size / pt.native_size;
    pt.extrapolated = inv.extrapolated;
    pt.noise = pt.effectiveness > 1.0 && !pt.extrapolated;
    return pt;
}

// ---------------------------------------------------------------------------

CurveFitSet fit_learning_curves(const std::vector<EvalRecord>& records, bool native_only,
                                double monotone_tolerance) {
    CurveFitSet out;
    for (const auto& [key, rec] : best_records(records)) {
        if (native_only && key.train_period != key.test_period) continue;
        out.points[CurveKey{key.topic, key.train_period, key.test_period, key.backend_id}].push_back(
            LearningCurvePoint{static_cast<double>(key.subset_size), rec.loss});
    }
    for (auto& [key, pts] : out.points) {
        std::sort(pts.begin(), pts.end(), [](const auto& l, const auto& r) { return l.size < r.size; });
        const std::string label = key.topic + " " + key.train_period.to_string() + "->" +
                                  key.test_period.to_string() + " [" + key.backend_id + "]";
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (pts[i].loss > pts[i - 1].loss + monotone_tolerance) {
                std::ostringstream os;
                os << label << ": loss rises from " << pts[i - 1].loss << " at " << pts[i - 1].size << " to "
                   << pts[i].loss << " at " << pts[i].size;
                out.warnings.push_back(os.str());
            }
        }
        if (pts.size() < 3) {
            out.warnings.push_back(label + ": fewer than 3 sizes, no curve");
            continue;
        }
        try {
            auto fit = fit_power_law(pts);
            fit.backend_id = key.backend_id;
            out.fits.emplace(key, fit);
        } catch (const FitError& e) {
            out.warnings.push_back(label + ": " + e.what());
        }
    }
    return out;
}

EffectivenessSeries build_effectiveness_series(const std::vector<EvalRecord>& records, const std::string& topic,
                                               const PeriodId& reference_period, const CurveFitSet& native_fits,
                                               std::optional<std::size_t> reference_size,
                                               const std::string& backend_id) {
    EffectivenessSeries series;
    series.topic = topic;
    series.reference_period = reference_period;

    std::set<std::string> backends;
    for (const auto& r : records) {
        if (r.job.topic == topic && r.job.train_period == reference_period) backends.insert(r.job.backend_id);
    }
    if (!backend_id.empty()) {
        series.backend_id = backend_id;
    } else if (backends.size() > 1) {
        throw DataError("topic '" + topic + "' period " + reference_period.to_string() +
                        " has records from several backends; pick one");
    } else if (backends.size() == 1) {
        series.backend_id = *backends.begin();
    } else {
        series.warnings.push_back("no records for topic '" + topic + "' reference " + reference_period.to_string());
        return series;
    }

    const auto best = best_records(records);
    std::size_t size = reference_size.value_or(0);
    if (!reference_size) {
        for (const auto& [key, _] : best) {
            if (key.topic == topic && key.train_period == reference_period && key.backend_id == series.backend_id) {
                size = std::max(size, key.subset_size);
            }
        }
    }
    series.reference_size = size;

    for (const auto& [key, rec] : best) {
        if (key.topic != topic || key.train_period != reference_period || key.backend_id != series.backend_id ||
            key.subset_size != size || key.test_period < reference_period) {
            continue;
        }
        const CurveKey native{topic, key.test_period, key.test_period, series.backend_id};
        auto fit = native_fits.fits.find(native);
        if (fit == native_fits.fits.end()) {
            series.warnings.push_back("no native curve for " + key.test_period.to_string() + "; point skipped");
            continue;
        }
        try {
            series.points.push_back(effective_size(rec, fit->second));
        } catch (const SaturationError& e) {
            EffectivenessPoint pt;
            pt.train_period = reference_period;
            pt.test_period = key.test_period;
            pt.delta_months = reference_period.months_until(key.test_period);
            pt.delta_t_years = pt.delta_months / 12.0;
            pt.native_size = static_cast<double>(size);
            pt.effective_size = std::numeric_limits<double>::infinity();
            pt.effectiveness = std::numeric_limits<double>::infinity();
            pt.saturated = true;
            series.points.push_back(pt);
            series.warnings.push_back(e.what());
        }
    }
    std::sort(series.points.begin(), series.points.end(),
              [](const auto& l, const auto& r) { return l.delta_months < r.delta_months; });
    return series;
}

}  // namespace perish
