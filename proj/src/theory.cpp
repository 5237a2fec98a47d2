#include "perish/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "perish/error.hpp"
#include "perish/rng.hpp"

namespace perish::theory {
namespace {

constexpr double kStrictMargin = 1e-12;
constexpr double kMassTolerance = 1e-9;

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

SamplingDensity::SamplingDensity(double window, std::vector<DensityBin> bins)
    : window_(window), bins_(std::move(bins)) {
    if (!(window_ >= 0.0)) throw DataError("sampling window must be >= 0");
    if (bins_.empty()) throw DataError("sampling density needs at least one bin");
    std::sort(bins_.begin(), bins_.end(), [](const auto& l, const auto& r) { return l.start < r.start; });
    for (std::size_t i = 0; i < bins_.size(); ++i) {
        const auto& b = bins_[i];
        if (b.start < 0.0 || b.end < b.start || b.end > window_ * (1.0 + 1e-12)) {
            throw DataError("density bin [" + num(b.start) + ", " + num(b.end) + "] outside [0, " + num(window_) + "]");
        }
        if (b.mass < 0.0) throw DataError("negative density mass");
        if (i > 0 && b.start < bins_[i - 1].end - 1e-12) throw DataError("overlapping density bins");
    }
    if (std::abs(total_mass() - 1.0) > kMassTolerance) {
        throw DataError("density masses sum to " + num(total_mass()) + ", not 1");
    }
}

SamplingDensity SamplingDensity::from_masses(double window, std::span<const double> masses) {
    if (masses.empty()) throw DataError("sampling density needs at least one bin");
    const double total = std::accumulate(masses.begin(), masses.end(), 0.0);
    if (!(total > 0.0)) throw DataError("density masses must have positive total");
    std::vector<DensityBin> bins;
    const double w = window / static_cast<double>(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) {
        const double end = i + 1 == masses.size() ? window : w * static_cast<double>(i + 1);
        bins.push_back(DensityBin{w * static_cast<double>(i), end, masses[i] / total});
    }
    return SamplingDensity(window, std::move(bins));
}

SamplingDensity SamplingDensity::uniform(double window, std::size_t bins) {
    std::vector<double> masses(std::max<std::size_t>(bins, 1), 1.0);
    return from_masses(window, masses);
}

SamplingDensity SamplingDensity::point_mass(double window, double age) {
    return SamplingDensity(window, {DensityBin{age, age, 1.0}});
}

double SamplingDensity::density(std::size_t i) const {
    const auto& b = bins_.at(i);
    return b.width() > 0.0 ? b.mass / b.width() : std::numeric_limits<double>::infinity();
}

double SamplingDensity::total_mass() const {
    double s = 0.0;
    for (const auto& b : bins_) s += b.mass;
    return s;
}

std::vector<double> net_distribution(const SamplingDensity& density, std::span<const std::vector<double>> per_bin) {
    if (per_bin.size() != density.bins().size()) {
        throw DataError("net_distribution: " + std::to_string(per_bin.size()) + " distributions for " +
                        std::to_string(density.bins().size()) + " density bins");
    }
    const std::size_t support = per_bin.front().size();
    std::vector<double> out(support, 0.0);
    for (std::size_t i = 0; i < per_bin.size(); ++i) {
        if (per_bin[i].size() != support) throw DataError("net_distribution: support mismatch between bins");
        const double m = density.bins()[i].mass;
        for (std::size_t x = 0; x < support; ++x) out[x] += m * per_bin[i][x];
    }
    return out;
}

// ---------------------------------------------------------------------------

double DriftFunction::operator()(double age) const {
    const double term = age > 0.0 ? scale * std::pow(age, power) : (power == 0.0 ? scale : 0.0);
    return offset + term;
}

double DriftFunction::mean(double lo, double hi) const {
    const double w = hi - lo;
    if (!(w > 0.0)) return (*this)(lo);
    const double q = power + 1.0;
    return offset + scale * (std::pow(hi, q) - std::pow(lo, q)) / (q * w);
}

EquivalenceModel EquivalenceModel::pure_exponential(double mu) {
    if (!(mu >= 0.0)) throw DataError("decay rate mu must be >= 0");
    return EquivalenceModel(PureExponential{mu});
}

EquivalenceModel EquivalenceModel::drift_shift(double a, double b, DriftFunction d) {
    if (!(a > 0.0) || !(b > 0.0)) throw DataError("drift_shift needs a > 0 and b > 0");
    if (d.offset < 0.0 || d.scale < 0.0 || d.power < 0.0) {
        throw DataError("drift function must be non-negative and non-decreasing");
    }
    return EquivalenceModel(DriftShift{a, b, d});
}

std::string EquivalenceModel::describe() const {
    if (const auto* e = std::get_if<PureExponential>(&kind_)) return "pure_exponential(mu=" + num(e->mu) + ")";
    const auto& s = std::get<DriftShift>(kind_);
    return "drift_shift(a=" + num(s.a) + ", b=" + num(s.b) + ", d=" + num(s.d.offset) + "+" + num(s.d.scale) +
           "*age^" + num(s.d.power) + ")";
}

double EquivalenceModel::effectiveness(double n, double age) const {
    if (const auto* e = std::get_if<PureExponential>(&kind_)) return std::exp(-e->mu * age);
    const auto& s = std::get<DriftShift>(kind_);
    const double x = s.d(age) * std::pow(n, s.b) / s.a;
    return std::exp(-std::log1p(x) / s.b);
}

double EquivalenceModel::equivalent_size(double n, double age) const {
    if (!(n > 0.0)) throw DataError("equivalent_size needs n > 0");
    if (!(age >= 0.0)) throw DataError("equivalent_size needs age >= 0");
    return n * effectiveness(n, age);
}

double EquivalenceModel::mean_effectiveness(double n, double lo, double hi) const {
    const double w = hi - lo;
    if (!(w > 0.0)) return effectiveness(n, lo);
    if (const auto* e = std::get_if<PureExponential>(&kind_)) {
        if (e->mu == 0.0) return 1.0;
        const double x = e->mu * w;
        return std::exp(-e->mu * lo) * (-std::expm1(-x)) / x;
    }
    using Gauss = boost::math::quadrature::gauss<double, 20>;
    return Gauss::integrate([&](double age) { return effectiveness(n, age); }, lo, hi) / w;
}

double EquivalenceModel::upper_bound(double age) const {
    if (std::holds_alternative<PureExponential>(kind_)) return std::numeric_limits<double>::infinity();
    const auto& s = std::get<DriftShift>(kind_);
    const double d = s.d(age);
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    return std::pow(d / s.a, -1.0 / s.b);
}

double equivalent_size(const EquivalenceModel& model, double n, double age) {
    return model.equivalent_size(n, age);
}

double substitution(const EquivalenceModel& model, double n, double t1, double t2) {
    if (!(n > 0.0)) throw DataError("substitution needs n > 0");
    return model.equivalent_size(n, t1) / model.equivalent_size(n, t2);
}

double upper_bound(const EquivalenceModel& model, double age) { return model.upper_bound(age); }

// ---------------------------------------------------------------------------

double composition_equivalent_size(const DatasetComposition& comp, const EquivalenceModel& model) {
    if (!(comp.n > 0.0)) throw DataError("composition size must be positive");
    if (const auto* s = std::get_if<DriftShift>(&model.kind())) {
        // losses mix: the dataset pays the mass-weighted mean drift penalty
        double dbar = 0.0;
        for (const auto& b : comp.density.bins()) {
            if (b.mass > 0.0) dbar += b.mass * s->d.mean(b.start, b.end);
        }
        return comp.n * std::exp(-std::log1p(dbar * std::pow(comp.n, s->b) / s->a) / s->b);
    }
    double e = 0.0;
    for (const auto& b : comp.density.bins()) {
        if (b.mass > 0.0) e += b.mass * model.mean_effectiveness(comp.n, b.start, b.end);
    }
    return comp.n * e;
}

double equivalent_time(const DatasetComposition& comp, const EquivalenceModel& model) {
    const double target = composition_equivalent_size(comp, model);
    const double window = comp.density.window();
    const double fresh = model.equivalent_size(comp.n, 0.0);
    const double stale = model.equivalent_size(comp.n, window);
    if (target > fresh * (1.0 + 1e-12) || target < stale * (1.0 - 1e-12)) {
        throw DataError("composition equivalent size " + num(target) + " outside [" + num(stale) + ", " +
                        num(fresh) + "]");
    }
    if (fresh - stale <= 1e-15 * fresh) return 0.0;  // model flat over the window
    double lo = 0.0;
    double hi = window;
    const double tol = 1e-15 * std::max(1.0, window);
    for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (model.equivalent_size(comp.n, mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

OffloadDecision offload_condition(const EquivalenceModel& model, double n, double n0, double t_star,
                                  double t_star2) {
    if (!(n > 0.0) || !(n0 >= 0.0) || !(n0 < n)) {
        throw DataError("offload needs 0 <= n0 < n (got n=" + num(n) + ", n0=" + num(n0) + ")");
    }
    if (t_star2 > t_star) {
        throw DataError("offload needs t** <= t* (got t*=" + num(t_star) + ", t**=" + num(t_star2) + ")");
    }
    OffloadDecision d;
    d.substitution = substitution(model, n - n0, t_star2, t_star);
    d.threshold = n / (n - n0);
    d.gain = d.substitution / d.threshold;
    d.admissible = d.substitution > d.threshold + kStrictMargin;
    return d;
}

OffloadResult greedy_offload(const DatasetComposition& comp, const EquivalenceModel& model) {
    std::vector<DensityBin> bins;
    for (const auto& b : comp.density.bins()) {
        if (b.mass > 0.0) bins.push_back(b);
    }
    double n = comp.n;
    auto make = [&](const std::vector<DensityBin>& bs, double size) {
        const double total = std::accumulate(bs.begin(), bs.end(), 0.0,
                                             [](double s, const DensityBin& b) { return s + b.mass; });
        std::vector<DensityBin> norm = bs;
        for (auto& b : norm) b.mass /= total;
        return DatasetComposition{size, SamplingDensity(bs.back().end, std::move(norm))};
    };

    OffloadResult result{{}, make(bins, n), 0.0, 0.0};
    double t_star = equivalent_time(result.final_composition, model);
    double n_eq = composition_equivalent_size(result.final_composition, model);

    while (bins.size() > 1) {
        const double n0 = n * bins.back().mass / std::accumulate(bins.begin(), bins.end(), 0.0,
                                                                  [](double s, const DensityBin& b) {
                                                                      return s + b.mass;
                                                                  });
        std::vector<DensityBin> kept(bins.begin(), bins.end() - 1);
        const auto candidate = make(kept, n - n0);
        const double t_star2 = equivalent_time(candidate, model);
        if (t_star2 > t_star) break;
        const auto decision = offload_condition(model, n, n0, t_star, t_star2);
        if (!decision.admissible) break;
        const double new_eq = composition_equivalent_size(candidate, model);
        result.steps.push_back(OffloadStep{n0, t_star, t_star2, n_eq, new_eq, true, decision.gain});
        bins = std::move(kept);
        n -= n0;
        t_star = t_star2;
        n_eq = new_eq;
        result.final_composition = candidate;
    }
    result.final_t_star = t_star;
    result.final_equivalent_size = n_eq;
    return result;
}

// ---------------------------------------------------------------------------

OrderVerdict check_perishability_order(const EquivalenceModel& high, const EquivalenceModel& low, double n,
                                       std::span<const std::pair<double, double>> grid) {
    const double sizes[] = {n};
    return check_perishability_order(high, low, sizes, grid);
}

OrderVerdict check_perishability_order(const EquivalenceModel& high, const EquivalenceModel& low,
                                       std::span<const double> sizes,
                                       std::span<const std::pair<double, double>> grid) {
    OrderVerdict v;
    v.ordered = !grid.empty() && !sizes.empty();
    for (double n : sizes) {
        for (const auto& [t1, t2] : grid) {
            if (!(t1 < t2)) throw DataError("perishability grid pairs need t1 < t2");
            ++v.pairs_checked;
            const double drop_h = high.equivalent_size(n, t1) - high.equivalent_size(n, t2);
            const double drop_l = low.equivalent_size(n, t1) - low.equivalent_size(n, t2);
            if (!(drop_h > drop_l + kStrictMargin * n)) {
                v.ordered = false;
                v.counterexample = OrderCounterexample{n, t1, t2, drop_h, drop_l};
                return v;
            }
        }
    }
    return v;
}

std::vector<std::pair<double, double>> age_pair_grid(double window, std::size_t points) {
    std::vector<double> ages;
    for (std::size_t i = 0; i < points; ++i) {
        ages.push_back(points == 1 ? 0.0 : window * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    std::vector<std::pair<double, double>> grid;
    for (std::size_t i = 0; i < ages.size(); ++i) {
        for (std::size_t j = i + 1; j < ages.size(); ++j) grid.emplace_back(ages[i], ages[j]);
    }
    return grid;
}

OrderPropertyReport order_property(const EquivalenceModel& high, const EquivalenceModel& low,
                                 const OrderPropertyOptions& opts) {
    OrderPropertyReport report;
    const double n_floor = opts.n_min * (1.0 - opts.max_offload_fraction);
    std::vector<double> sizes;
    constexpr int kSizeGrid = 9;
    for (int i = 0; i < kSizeGrid; ++i) {
        sizes.push_back(n_floor * std::pow(opts.n_max / n_floor, static_cast<double>(i) / (kSizeGrid - 1)));
    }
    const auto grid = age_pair_grid(opts.window, 13);
    const auto order = check_perishability_order(high, low, sizes, grid);
    if (!order.ordered) {
        report.refused = true;
        std::ostringstream os;
        os << "perishability order does not hold for " << high.describe() << " over " << low.describe();
        if (order.counterexample) {
            const auto& c = *order.counterexample;
            os << " (n=" << c.n << ", t1=" << c.t1 << ", t2=" << c.t2 << ": drop_H=" << c.drop_h
               << " <= drop_L=" << c.drop_l << ")";
        }
        report.refusal = os.str();
        return report;
    }

    Rng rng(opts.seed);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, rng.uniform()); };
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
        ++report.trials;
        const double n = log_uniform(opts.n_min, opts.n_max);
        double t1 = opts.window * rng.uniform();
        double t2 = opts.window * rng.uniform();
        if (t1 > t2) std::swap(t1, t2);
        if (t1 == t2) t2 = std::min(opts.window, t1 + 1e-6);
        const double n0 = n * opts.max_offload_fraction * rng.uniform();

        // (i) sharper substitution curve
        ++report.substitution_checks;
        const double fh = substitution(high, n, t1, t2);
        const double fl = substitution(low, n, t1, t2);
        if (!(fh > fl + kStrictMargin)) {
            report.violations.push_back({"substitution", "n=" + num(n) + " t1=" + num(t1) + " t2=" + num(t2) +
                                                             ": f_H=" + num(fh) + " <= f_L=" + num(fl)});
        }

        // (ii) off-load inclusion, same t* = t2 and t** = t1 for both
        const auto dl = offload_condition(low, n, n0, t2, t1);
        if (dl.admissible) {
            ++report.l_admissible_steps;
            const auto dh = offload_condition(high, n, n0, t2, t1);
            if (!dh.admissible) {
                report.violations.push_back({"offload_inclusion", "n=" + num(n) + " n0=" + num(n0) + " t*=" + num(t2) +
                                                                      " t**=" + num(t1) + ": admissible for L, not H"});
            }
        }

        // (iii) greedy off-loading on one random composition
        const std::size_t nbins = 2 + rng.below(std::max<std::size_t>(opts.max_bins, 2) - 1);
        std::vector<double> masses(nbins);
        for (auto& m : masses) m = 0.05 + rng.uniform();
        const DatasetComposition comp{n, SamplingDensity::from_masses(opts.window, masses)};
        ++report.greedy_checks;
        const auto gh = greedy_offload(comp, high);
        const auto gl = greedy_offload(comp, low);
        if (gh.final_t_star > gl.final_t_star + 1e-9 * std::max(1.0, opts.window)) {
            report.violations.push_back({"equivalent_time", "n=" + num(n) + " bins=" + std::to_string(nbins) +
                                                                ": t*_H=" + num(gh.final_t_star) +
                                                                " > t*_L=" + num(gl.final_t_star)});
        }
    }
    return report;
}

}  // namespace perish::theory
