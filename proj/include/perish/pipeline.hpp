#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "perish/backend.hpp"
#include "perish/config.hpp"
#include "perish/corpus.hpp"
#include "perish/curves.hpp"
#include "perish/decay.hpp"
#include "perish/manifest.hpp"
#include "perish/synth.hpp"

namespace perish {

struct PreparedPeriod {
    PeriodSlice slice;
    SubsetLadder ladder;
};

struct PreparedTopic {
    std::string topic;
    std::vector<PreparedPeriod> periods;  // ascending
    std::vector<std::string> warnings;
};

// Score filter, period slicing, splits and ladder for one topic's documents.
// Insufficient periods are skipped with a warning; `only`, when given,
// restricts to those periods.
PreparedTopic prepare_topic(const std::string& topic, std::span<const Document> docs, const PipelineConfig& cfg,
                            const std::vector<PeriodId>* only = nullptr);

// One job per (period, ladder rung, seed).
std::vector<TrainJob> enumerate_jobs(const std::string& topic, std::span<const PeriodId> periods,
                                     std::span<const std::size_t> ladder_sizes, std::span<const std::uint64_t> seeds,
                                     const std::string& backend_id);

// Test periods a job is evaluated on: the top rung sees its own period and
// every later one (the cross-period losses behind effectiveness), smaller
// rungs only their own period (the native learning curve).
std::vector<PeriodId> test_periods_for(const TrainJob& job, std::size_t top_size, std::span<const PeriodId> periods);

// Runs `body(i)` for i in [0, n) on up to `workers` threads. The first
// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

// Runs every job through `runner` on a worker pool. Each outcome is appended
// to `manifest` (when given) as soon as it finishes; exceptions from the
// runner become failed outcomes. Results come back in job order.
std::vector<JobOutcome> run_jobs(std::span<const TrainJob> jobs, unsigned workers,
                                 const std::function<JobOutcome(const TrainJob&)>& runner,
                                 const Manifest* manifest = nullptr, const std::string& config_hash = "");

// In-memory n-gram training of a prepared topic.
std::vector<JobOutcome> train_prepared(const PreparedTopic& prepared, const PipelineConfig& cfg,
                                       std::span<const std::uint64_t> seeds, unsigned workers,
                                       const Manifest* manifest = nullptr);

struct TopicAnalysis {
    std::string topic;
    CurveFitSet curves;
    EffectivenessSeries series;
    std::optional<DecayFit> decay;
    std::vector<std::string> warnings;
};

// Native curves, effectiveness series from `reference` (default: the
// topic's earliest trained period) and the exponential decay fit.
TopicAnalysis analyze_topic(const std::vector<EvalRecord>& records, const std::string& topic, const PipelineConfig& cfg,
                            std::optional<PeriodId> reference = std::nullopt,
                            std::optional<std::size_t> reference_size = std::nullopt);

// Topics present in a set of records, sorted.
std::vector<std::string> record_topics(const std::vector<EvalRecord>& records);

// ---------------------------------------------------------------------------

struct DriftExperiment {
    synth::ProcessSpec process;
    synth::CorpusSpec corpus;
    std::vector<std::uint64_t> train_seeds{0};
};

struct DriftResult {
    double rho = 0.0;
    std::uint64_t seed = 0;
    std::size_t documents = 0;
    std::vector<JobOutcome> outcomes;
    TopicAnalysis analysis;
};

// synth -> corpus -> n-gram backend -> curves -> decay, all in memory.
DriftResult run_drift_experiment(const DriftExperiment& exp, const PipelineConfig& cfg, unsigned workers);

}  // namespace perish
