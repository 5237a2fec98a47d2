#include "perish/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "perish/error.hpp"

namespace perish {

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json PipelineConfig::to_json() const {
    return {
        {"min_score", min_score},
        {"granularity", granularity == Granularity::kMonth ? "month" : "year"},
        {"min_words", min_words},
        {"dev_min", split.dev_min},
        {"test_min", split.test_min},
        {"split_seed", split.seed},
        {"ladder_top", ladder_top},
        {"ladder_floor", ladder_floor},
        {"ngram", ngram.to_json()},
        {"monotone_tolerance", monotone_tolerance},
        {"decay_intercept", decay.intercept},
        {"decay_clip_at_one", decay.clip_at_one},
        {"half_life_cap", half_life_cap},
        {"significance", {{"p001", thresholds.p001}, {"p01", thresholds.p01}, {"p05", thresholds.p05}}},
        {"form_margin", form_margin},
        {"external_command", external_command},
        {"external_backend", external_backend},
        {"early_stop_patience", early_stop_patience},
    };
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("config must be a JSON object");
    PipelineConfig c;
    const auto known = c.to_json();
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw DataError("unknown config key '" + key + "'");
    }
    try {
        c.min_score = j.value("min_score", c.min_score);
        const auto g = j.value("granularity", std::string("month"));
        if (g != "month" && g != "year") throw DataError("granularity must be 'month' or 'year'");
        c.granularity = g == "month" ? Granularity::kMonth : Granularity::kYear;
        c.min_words = j.value("min_words", c.min_words);
        c.split.dev_min = j.value("dev_min", c.split.dev_min);
        c.split.test_min = j.value("test_min", c.split.test_min);
        c.split.seed = j.value("split_seed", c.split.seed);
        c.ladder_top = j.value("ladder_top", c.ladder_top);
        c.ladder_floor = j.value("ladder_floor", c.ladder_floor);
        c.split.train_min = c.ladder_floor;
        if (j.contains("ngram")) c.ngram = NGramConfig::from_json(j.at("ngram"));
        c.monotone_tolerance = j.value("monotone_tolerance", c.monotone_tolerance);
        c.decay.intercept = j.value("decay_intercept", c.decay.intercept);
        c.decay.clip_at_one = j.value("decay_clip_at_one", c.decay.clip_at_one);
        c.half_life_cap = j.value("half_life_cap", c.half_life_cap);
        if (j.contains("significance")) {
            const auto& s = j.at("significance");
            c.thresholds.p001 = s.value("p001", c.thresholds.p001);
            c.thresholds.p01 = s.value("p01", c.thresholds.p01);
            c.thresholds.p05 = s.value("p05", c.thresholds.p05);
        }
        c.form_margin = j.value("form_margin", c.form_margin);
        c.external_command = j.value("external_command", c.external_command);
        if (j.contains("external_backend")) c.external_backend = j.at("external_backend");
        c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad config value: ") + e.what());
    }
    if (!(c.thresholds.p001 < c.thresholds.p01 && c.thresholds.p01 < c.thresholds.p05)) {
        throw DataError("significance thresholds must be increasing");
    }
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read config " + file.string());
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("config " + file.string() + " is not valid JSON: " + e.what());
    }
}

std::string PipelineConfig::hash() const { return fnv1a_hex(to_json().dump()); }

}  // namespace perish
