#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "perish/corpus.hpp"
#include "perish/decay.hpp"
#include "perish/ngram.hpp"

namespace perish {

// Every tunable the pipeline reads. Missing keys in a config file keep these
// defaults; unknown keys are rejected so typos surface.
struct PipelineConfig {
    int min_score = 2;
    Granularity granularity = Granularity::kMonth;
    std::size_t min_words = 200'000;
    SplitConfig split;  // dev_min, test_min, seed
    std::size_t ladder_top = 128'000;
    std::size_t ladder_floor = 8'000;
    NGramConfig ngram;
    double monotone_tolerance = 0.05;
    DecayOptions decay;
    double half_life_cap = 100.0;
    SignificanceThresholds thresholds;
    double form_margin = 0.05;
    std::string external_command;
    nlohmann::json external_backend = nlohmann::json::object();
    int early_stop_patience = 15;

    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::filesystem::path& file);

    // 16 hex digits, FNV-1a 64 over the canonical (sorted-key) JSON.
    std::string hash() const;
};

std::string fnv1a_hex(std::string_view bytes);

}  // namespace perish
