#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "perish/backend.hpp"

namespace perish {

// Append-only JSON-lines run manifest. Each line is one job:
//
//   {"job": {...}, "status": "ok"|"failed", "dev_loss": x, "reason": "...",
//    "results": [{"test_period": ..., "loss_nats_per_token": ..., "token_count": ...}],
//    "config_hash": "..."}
//
// Appends are a single write(2) on an O_APPEND descriptor so concurrent
// writers never interleave within a line.
class Manifest {
public:
    explicit Manifest(std::filesystem::path path) : path_(std::move(path)) {}

    const std::filesystem::path& path() const { return path_; }

    void append(const JobOutcome& outcome, const std::string& config_hash) const;

    // Missing file reads as empty.
    std::vector<JobOutcome> read() const;

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
};

nlohmann::json outcome_to_manifest_line(const JobOutcome& outcome, const std::string& config_hash);
JobOutcome outcome_from_manifest_line(const nlohmann::json& line);

// All successful EvalRecords, flattened.
std::vector<EvalRecord> eval_records(const std::vector<JobOutcome>& outcomes);

// Best-model selection: of all runs that share (topic, train period, subset
// size, backend) and differ only by seed or variant, keep the one with the
// lowest dev loss. Output is keyed by that run group plus test period.
struct BestKey {
    std::string topic;
    PeriodId train_period;
    std::size_t subset_size;
    std::string backend_id;
    PeriodId test_period;

    auto operator<=>(const BestKey&) const = default;
};

std::map<BestKey, EvalRecord> best_records(const std::vector<EvalRecord>& records);

}  // namespace perish
