#include "perish/decay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "perish/error.hpp"
#include "perish/stats.hpp"

namespace perish {

std::vector<TimedValue> timed_values(const EffectivenessSeries& series) {
    std::vector<TimedValue> out;
    out.reserve(series.points.size());
    for (const auto& p : series.points) out.push_back(TimedValue{p.delta_t_years, p.effectiveness});
    return out;
}

namespace {

std::string format(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

struct Prepared {
    std::vector<double> t;
    std::vector<double> log_y;
    int dropped = 0;
    int clipped = 0;
};

Prepared prepare(std::span<const TimedValue> series, const DecayOptions& opts) {
    Prepared p;
    for (const auto& v : series) {
        double y = v.y;
        if (opts.clip_at_one && y > 1.0) {
            y = 1.0;
            ++p.clipped;
        }
        if (!(y > 0.0) || !std::isfinite(y) || !std::isfinite(v.t)) {
            ++p.dropped;
            continue;
        }
        p.t.push_back(v.t);
        p.log_y.push_back(std::log(y));
    }
    return p;
}

}  // namespace

HalfLife half_life(double mu, double cap) {
    HalfLife h;
    if (!(mu > 0.0)) {
        h.years = std::numeric_limits<double>::infinity();
        h.censored = true;
        h.text = "∞";
        return h;
    }
    h.years = std::log(2.0) / mu;
    if (h.years > cap) {
        h.censored = true;
        h.text = format("%g", cap) + "> (" + format("%.1f", h.years) + ")";
    } else {
        h.text = format("%.2f", h.years);
    }
    return h;
}

DecayFit fit_exponential_decay(std::span<const TimedValue> series, const DecayOptions& opts, double half_life_cap) {
    const auto p = prepare(series, opts);
    if (p.t.size() < 3) {
        throw FitError("decay fit needs at least 3 usable points, got " + std::to_string(p.t.size()));
    }
    const auto reg = stats::ols(p.t, p.log_y, opts.intercept);
    DecayFit fit;
    fit.mu = -reg.slope;
    fit.std_error = reg.slope_se;
    fit.t_stat = -reg.t_stat;
    fit.p_value = reg.p_value;
    fit.intercept = reg.intercept;
    fit.r2 = reg.r2;
    fit.n_points = reg.n;
    fit.dropped = p.dropped;
    fit.clipped = p.clipped;
    fit.intercept_used = opts.intercept;
    fit.half_life = half_life(fit.mu, half_life_cap);
    return fit;
}

Band significance_band(double p, const SignificanceThresholds& th) {
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("p-value " + format("%g", p) + " outside [0, 1]");
    if (p < th.p001) return Band::kP001;
    if (p < th.p01) return Band::kP01;
    if (p < th.p05) return Band::kP05;
    return Band::kNotSignificant;
}

PairwiseFit pairwise_decay_difference(std::span<const TimedValue> series_i, std::span<const TimedValue> series_j,
                                      const DecayOptions& opts, const SignificanceThresholds& th,
                                      std::string topic_i, std::string topic_j) {
    const auto pi = prepare(series_i, opts);
    const auto pj = prepare(series_j, opts);
    std::vector<double> t, diff;
    for (std::size_t a = 0; a < pi.t.size(); ++a) {
        for (std::size_t b = 0; b < pj.t.size(); ++b) {
            if (std::abs(pi.t[a] - pj.t[b]) <= 1e-9) {
                t.push_back(pi.t[a]);
                diff.push_back(pi.log_y[a] - pj.log_y[b]);
                break;
            }
        }
    }
    if (t.size() < 3) {
        throw FitError("pairwise test " + topic_i + " vs " + topic_j + " needs at least 3 common points, got " +
                       std::to_string(t.size()));
    }
    const auto reg = stats::ols(t, diff, opts.intercept);
    PairwiseFit fit;
    fit.topic_i = std::move(topic_i);
    fit.topic_j = std::move(topic_j);
    fit.beta = -reg.slope;
    fit.std_error = reg.slope_se;
    fit.p_value = reg.p_value;
    fit.band = significance_band(reg.p_value, th);
    fit.n_common_points = reg.n;
    return fit;
}

std::string to_string(FormVerdict v) {
    switch (v) {
        case FormVerdict::kExponential: return "exponential";
        case FormVerdict::kPowerLaw: return "power_law";
        case FormVerdict::kInconclusive: return "inconclusive";
    }
    return "inconclusive";
}

FormComparison compare_functional_forms(std::span<const TimedValue> series, const DecayOptions& opts,
                                        double margin) {
    const auto p = prepare(series, opts);
    std::vector<double> log_t, log_y_pos;
    int zeros = 0;
    for (std::size_t i = 0; i < p.t.size(); ++i) {
        if (p.t[i] > 0.0) {
            log_t.push_back(std::log(p.t[i]));
            log_y_pos.push_back(p.log_y[i]);
        } else {
            ++zeros;
        }
    }
    if (log_t.size() < 4) {
        throw FitError("form comparison needs at least 4 points with t > 0 and y > 0, got " +
                       std::to_string(log_t.size()));
    }
    const auto e = stats::ols(p.t, p.log_y, true);
    const auto w = stats::ols(log_t, log_y_pos, true);
    FormComparison cmp;
    cmp.exp_sse = e.sse;
    cmp.exp_r2 = e.r2;
    cmp.pow_sse = w.sse;
    cmp.pow_r2 = w.r2;
    cmp.exp_points = e.n;
    cmp.pow_points = w.n;
    cmp.t_zero_handling = std::to_string(zeros) + " point(s) at t <= 0 used in the exponential fit, excluded from the power-law fit";
    const double hi = std::max(cmp.exp_sse, cmp.pow_sse);
    if (std::abs(cmp.exp_sse - cmp.pow_sse) <= margin * hi) {
        cmp.verdict = FormVerdict::kInconclusive;
    } else {
        cmp.verdict = cmp.exp_sse < cmp.pow_sse ? FormVerdict::kExponential : FormVerdict::kPowerLaw;
    }
    return cmp;
}

// ---------------------------------------------------------------------------

std::string render_decay_table(std::span<const TopicDecay> fits) {
    std::vector<TopicDecay> rows(fits.begin(), fits.end());
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& l, const auto& r) { return std::abs(l.fit.mu) < std::abs(r.fit.mu); });
    std::ostringstream os;
    os << "topic,estimate_per_year,half_life_years,stderr,p_value\n";
    for (const auto& r : rows) {
        const double estimate = r.fit.mu == 0.0 ? 0.0 : -r.fit.mu;
        os << r.topic << ',' << format("%.3f", estimate) << ',' << r.fit.half_life.text << ','
           << format("%.3g", r.fit.std_error) << ',' << format("%.3g", r.fit.p_value) << '\n';
    }
    return os.str();
}

std::string render_band_matrix(std::span<const std::string> topics, std::span<const PairwiseFit> pairs) {
    std::map<std::pair<std::string, std::string>, Band> bands;
    for (const auto& p : pairs) {
        bands[{p.topic_i, p.topic_j}] = p.band;
        bands[{p.topic_j, p.topic_i}] = p.band;
    }
    std::ostringstream os;
    os << "topic";
    for (const auto& t : topics) os << ',' << t;
    os << '\n';
    for (const auto& row : topics) {
        os << row;
        for (const auto& col : topics) {
            os << ',';
            if (row == col) {
                os << static_cast<int>(Band::kNotSignificant);
            } else if (auto it = bands.find({row, col}); it != bands.end()) {
                os << static_cast<int>(it->second);
            }
        }
        os << '\n';
    }
    return os.str();
}

std::string render_pairwise_table(std::span<const PairwiseFit> pairs) {
    std::ostringstream os;
    os << "topic_i,topic_j,beta_per_year,stderr,p_value,band,n_common_points\n";
    for (const auto& p : pairs) {
        os << p.topic_i << ',' << p.topic_j << ',' << format("%.6g", p.beta) << ',' << format("%.3g", p.std_error)
           << ',' << format("%.3g", p.p_value) << ',' << static_cast<int>(p.band) << ',' << p.n_common_points << '\n';
    }
    return os.str();
}

}  // namespace perish
