#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perish/corpus.hpp"
#include "perish/ngram.hpp"

namespace perish {

// One training run. (topic, train_period, subset_size, backend_id, seed) is
// the run's identity.
struct TrainJob {
    std::string topic;
    PeriodId train_period;
    std::size_t subset_size = 0;
    std::string backend_id;
    std::uint64_t seed = 0;

    std::string key() const;
    nlohmann::json to_json() const;
    static TrainJob from_json(const nlohmann::json& j);

    bool operator==(const TrainJob&) const = default;
};

// Loss of one trained model on one period's test set, nats per token.
struct EvalRecord {
    TrainJob job;
    PeriodId test_period;
    double loss = 0.0;
    std::size_t token_count = 0;
    double dev_loss = 0.0;  // the job's dev loss; picks the best of several runs

    bool operator==(const EvalRecord&) const = default;
};

// Everything one job produced. Failed jobs keep the reason and no records.
struct JobOutcome {
    TrainJob job;
    bool ok = false;
    std::string failure;
    double dev_loss = 0.0;
    std::vector<EvalRecord> records;
    nlohmann::json backend_info;  // free-form: n-gram weights, trainer config echo, ...
};

struct TestSet {
    PeriodId period;
    std::span<const std::string> tokens;
};

// Built-in backend: trains on the first job.subset_size words of train_full,
// tunes on dev, evaluates every test set.
JobOutcome run_ngram_job(const TrainJob& job, std::span<const std::string> train_full,
                         std::span<const std::string> dev, std::span<const TestSet> tests,
                         const NGramConfig& cfg);

// ---------------------------------------------------------------------------
// External backend protocol.
//
// Invocation:
//   <command> --train <train.txt> --dev <dev.txt> --test <test.txt>...
//             --out <result.json> --seed <n> --config <config.json>
//
// config.json carries {"job": {...}, "subset_size": N, "test_periods": [...],
// "early_stop_patience": 15, "backend": {...}}; the backend trains on the
// first subset_size words of the train file. Test files are passed in the
// order of test_periods.
//
// result.json:
//   {"job": {...}, "dev_loss": <float>,
//    "results": [{"test_period": "...", "loss_nats_per_token": <float>,
//                 "token_count": <int>}, ...]}

struct BackendPaths {
    std::filesystem::path train;
    std::filesystem::path dev;
    std::vector<std::pair<PeriodId, std::filesystem::path>> tests;
    std::filesystem::path work_dir;  // config.json and result.json go here
};

nlohmann::json backend_config(const TrainJob& job, const BackendPaths& paths, const nlohmann::json& backend_cfg,
                              int early_stop_patience = 15);

// Checks a backend result against the protocol and converts it. Never throws:
// violations come back as a failed outcome with the reason.
JobOutcome parse_backend_result(const TrainJob& job, const nlohmann::json& result,
                                std::span<const PeriodId> expected_periods);

// Runs `command` (a shell command prefix) under the protocol. Nonzero exit,
// missing output or a schema violation yields a failed outcome.
JobOutcome run_external_backend(const std::string& command, const TrainJob& job, const BackendPaths& paths,
                                const nlohmann::json& backend_cfg, int early_stop_patience = 15);

// Result JSON for an outcome, in the protocol's shape.
nlohmann::json outcome_to_result_json(const JobOutcome& outcome);

}  // namespace perish
