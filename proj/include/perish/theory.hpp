#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace perish::theory {

// Ages are in years before the prediction time: age 0 is fresh data.

struct DensityBin {
    double start = 0.0;  // youngest age in the bin
    double end = 0.0;    // oldest age; end == start is a point mass
    double mass = 0.0;   // integral of the density over the bin

    double width() const { return end - start; }
};

// Piecewise-constant sampling density over [0, window], stored as bin masses
// (which sum to 1). Bins are sorted by age and do not overlap.
class SamplingDensity {
public:
    SamplingDensity(double window, std::vector<DensityBin> bins);

    // `masses.size()` equal-width bins covering [0, window], youngest first.
    // Masses are normalized to sum to 1.
    static SamplingDensity from_masses(double window, std::span<const double> masses);
    static SamplingDensity uniform(double window, std::size_t bins);
    static SamplingDensity point_mass(double window, double age);

    double window() const { return window_; }
    const std::vector<DensityBin>& bins() const { return bins_; }
    // Density value inside bin i (mass / width); +inf for a point mass.
    double density(std::size_t i) const;
    double total_mass() const;

private:
    double window_;
    std::vector<DensityBin> bins_;
};

// Mixture sum_i P_i * mass_i of per-bin discrete distributions. All P_i must
// have the same support size as each other and one entry per bin.
std::vector<double> net_distribution(const SamplingDensity& density,
                                     std::span<const std::vector<double>> per_bin);

// d(age) = offset + scale * age^power
struct DriftFunction {
    double offset = 0.0;
    double scale = 0.0;
    double power = 1.0;

    double operator()(double age) const;
    // Average of d over [lo, hi]; d(lo) when hi == lo.
    double mean(double lo, double hi) const;
};

struct PureExponential {
    double mu = 0.0;  // per year
};

// Equivalent size when stale data costs an additive loss d(age) on a native
// learning curve a n^-b + c:  n_eq = n (1 + d(age) n^b / a)^(-1/b).
struct DriftShift {
    double a = 1.0;
    double b = 0.5;
    DriftFunction d;
};

class EquivalenceModel {
public:
    using Kind = std::variant<PureExponential, DriftShift>;

    static EquivalenceModel pure_exponential(double mu);
    static EquivalenceModel drift_shift(double a, double b, DriftFunction d);

    const Kind& kind() const { return kind_; }
    std::string describe() const;

    // n_eq(n, age); n > 0, age >= 0.
    double equivalent_size(double n, double age) const;
    // n_eq / n
    double effectiveness(double n, double age) const;
    // Mean effectiveness over ages [lo, hi] (lo == hi evaluates the point).
    double mean_effectiveness(double n, double lo, double hi) const;
    // lim n->inf n_eq(n, age); +inf when unbounded.
    double upper_bound(double age) const;

private:
    explicit EquivalenceModel(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

double equivalent_size(const EquivalenceModel& model, double n, double age);

// f_n(t1, t2) = n_eq(n, t1) / n_eq(n, t2)
double substitution(const EquivalenceModel& model, double n, double t1, double t2);

double upper_bound(const EquivalenceModel& model, double age);

// ---------------------------------------------------------------------------

struct DatasetComposition {
    double n = 0.0;
    SamplingDensity density;
};

// Equivalent size of a mixed-age dataset of n samples.
//   pure_exponential: every sample counts e^(-mu age), so
//     n * sum over bins of mass * mean effectiveness across the bin.
//   drift_shift: the loss of the mixture is a n^-b + c + dbar with dbar the
//     mass-weighted mean of d, so n_eq = n (1 + dbar n^b / a)^(-1/b) and the
//     equivalent time solves d(t*) = dbar.
double composition_equivalent_size(const DatasetComposition& comp, const EquivalenceModel& model);

// The age t* in [0, window] with n_eq(n, t*) equal to the composition's
// equivalent size, by bisection. Throws DataError when that size lies outside
// [n_eq(n, window), n].
double equivalent_time(const DatasetComposition& comp, const EquivalenceModel& model);

struct OffloadDecision {
    double substitution = 1.0;  // f_{n-n0}(t**, t*)
    double threshold = 1.0;     // n / (n - n0)
    double gain = 1.0;          // substitution / threshold
    bool admissible = false;    // substitution > threshold (+1e-12 margin)
};

// Throws DataError unless 0 <= n0 < n and t_star2 <= t_star.
OffloadDecision offload_condition(const EquivalenceModel& model, double n, double n0, double t_star,
                                  double t_star2);

struct OffloadStep {
    double removed_mass = 0.0;  // n0
    double old_t_star = 0.0;
    double new_t_star = 0.0;
    double old_equivalent_size = 0.0;
    double new_equivalent_size = 0.0;
    bool admissible = false;
    double gain = 1.0;
};

struct OffloadResult {
    std::vector<OffloadStep> steps;  // accepted steps only
    DatasetComposition final_composition;
    double final_t_star = 0.0;
    double final_equivalent_size = 0.0;
};

// Drops the oldest bin while the step is admissible; never drops the last
// remaining bin. Zero-mass bins carry no data and are removed up front.
OffloadResult greedy_offload(const DatasetComposition& comp, const EquivalenceModel& model);

// ---------------------------------------------------------------------------

struct OrderCounterexample {
    double n = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
    double drop_h = 0.0;  // n_eq_H(t1) - n_eq_H(t2)
    double drop_l = 0.0;
};

struct OrderVerdict {
    bool ordered = false;
    std::size_t pairs_checked = 0;
    std::optional<OrderCounterexample> counterexample;  // first failing pair
};

// H is more perishable than L when, for every pair t1 < t2, H loses strictly
// more equivalent size between t1 and t2 than L does.
OrderVerdict check_perishability_order(const EquivalenceModel& high, const EquivalenceModel& low, double n,
                                       std::span<const std::pair<double, double>> grid);

// Same check over several sizes; stops at the first counterexample.
OrderVerdict check_perishability_order(const EquivalenceModel& high, const EquivalenceModel& low,
                                       std::span<const double> sizes,
                                       std::span<const std::pair<double, double>> grid);

// All pairs (t_i, t_j), i < j, of `points` evenly spaced ages over [0, window].
std::vector<std::pair<double, double>> age_pair_grid(double window, std::size_t points);

struct OrderPropertyOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    double n_min = 1e3;
    double n_max = 1e6;
    double window = 2.0;
    std::size_t max_bins = 12;
    double max_offload_fraction = 0.9;
};

struct PropertyViolation {
    std::string assertion;  // "substitution", "offload_inclusion", "equivalent_time"
    std::string detail;
};

struct OrderPropertyReport {
    bool refused = false;
    std::string refusal;
    std::size_t trials = 0;
    std::size_t substitution_checks = 0;
    std::size_t l_admissible_steps = 0;  // L steps that had to carry over to H
    std::size_t greedy_checks = 0;
    std::vector<PropertyViolation> violations;
};

// Randomized harness: (i) f^H > f^L, (ii) every admissible off-load step for
// L is admissible for H, (iii) greedy off-loading leaves H with an equivalent
// time no later than L's on the same composition. Refuses to run unless the
// perishability order holds on the option box.
OrderPropertyReport order_property(const EquivalenceModel& high, const EquivalenceModel& low,
                                 const OrderPropertyOptions& opts = {});

}  // namespace perish::theory
