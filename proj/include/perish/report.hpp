#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perish/curves.hpp"
#include "perish/decay.hpp"

namespace perish {

// Effectiveness series <-> JSON. Infinite sizes (saturated points) are
// stored as null.
nlohmann::json series_to_json(const EffectivenessSeries& series);
EffectivenessSeries series_from_json(const nlohmann::json& j);

// topic,backend_id,train_period,test_period,a,b,c,r2_log,residual_sse,points,min_size,max_size
std::string render_curves_table(const CurveFitSet& fits);

// train_period,test_period,delta_months,delta_t_years,native_size,effective_size,effectiveness,extrapolated,noise,saturated
std::string render_series_table(const EffectivenessSeries& series);

struct TopicForms {
    std::string topic;
    FormComparison comparison;
};

// topic,verdict,exp_sse,exp_r2,exp_points,pow_sse,pow_r2,pow_points
std::string render_forms_table(std::span<const TopicForms> rows);

// Line chart of effectiveness against Δt (years), one line per series.
// Saturated points are left out.
std::string render_series_svg(std::span<const EffectivenessSeries> series, const std::string& title,
                              const std::string& config_hash);

// Prefixes a CSV body with "# config_hash=<hash>".
std::string with_config_hash(const std::string& csv, const std::string& config_hash);

}  // namespace perish
