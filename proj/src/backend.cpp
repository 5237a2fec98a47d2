#include "perish/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "perish/error.hpp"

namespace perish {

std::string TrainJob::key() const {
    return topic + "|" + train_period.to_string() + "|" + std::to_string(subset_size) + "|" + backend_id + "|" +
           std::to_string(seed);
}

nlohmann::json TrainJob::to_json() const {
    return {{"topic", topic},
            {"train_period", train_period.to_string()},
            {"subset_size", subset_size},
            {"backend_id", backend_id},
            {"seed", seed}};
}

TrainJob TrainJob::from_json(const nlohmann::json& j) {
    TrainJob job;
    job.topic = j.at("topic").get<std::string>();
    job.train_period = PeriodId::parse(j.at("train_period").get<std::string>());
    job.subset_size = j.at("subset_size").get<std::size_t>();
    job.backend_id = j.at("backend_id").get<std::string>();
    job.seed = j.at("seed").get<std::uint64_t>();
    return job;
}

JobOutcome run_ngram_job(const TrainJob& job, std::span<const std::string> train_full,
                         std::span<const std::string> dev, std::span<const TestSet> tests,
                         const NGramConfig& cfg) {
    JobOutcome out;
    out.job = job;
    if (train_full.size() < job.subset_size || job.subset_size == 0) {
        out.failure = "training set has " + std::to_string(train_full.size()) + " words, job wants " +
                      std::to_string(job.subset_size);
        return out;
    }
    const auto model = NGramModel::train(train_full.first(job.subset_size), dev, cfg);
    out.dev_loss = model.dev_loss();
    for (const auto& t : tests) {
        const auto est = model.cross_entropy(t.tokens);
        out.records.push_back(EvalRecord{job, t.period, est.loss, est.token_count, out.dev_loss});
    }
    out.ok = true;
    out.backend_info = {{"weights", model.weights()},
                        {"vocab_size", model.vocab_size()},
                        {"em_iterations", model.em_iterations()},
                        {"config", cfg.to_json()}};
    return out;
}

nlohmann::json backend_config(const TrainJob& job, const BackendPaths& paths, const nlohmann::json& backend_cfg,
                              int early_stop_patience) {
    nlohmann::json periods = nlohmann::json::array();
    for (const auto& [p, _] : paths.tests) periods.push_back(p.to_string());
    return {{"job", job.to_json()},
            {"subset_size", job.subset_size},
            {"test_periods", periods},
            {"early_stop_patience", early_stop_patience},
            {"backend", backend_cfg.is_null() ? nlohmann::json::object() : backend_cfg}};
}

JobOutcome parse_backend_result(const TrainJob& job, const nlohmann::json& result,
                                std::span<const PeriodId> expected_periods) {
    JobOutcome out;
    out.job = job;
    auto fail = [&](std::string why) {
        out.ok = false;
        out.failure = std::move(why);
        out.records.clear();
        return out;
    };
    if (!result.is_object()) return fail("result is not a JSON object");
    if (!result.contains("results") || !result["results"].is_array()) return fail("missing 'results' array");
    if (!result.contains("dev_loss") || !result["dev_loss"].is_number()) return fail("missing numeric 'dev_loss'");
    out.dev_loss = result["dev_loss"].get<double>();
    if (!std::isfinite(out.dev_loss) || out.dev_loss < 0) return fail("dev_loss must be finite and >= 0");
    if (result.contains("job")) {
        try {
            if (TrainJob::from_json(result["job"]) != job) return fail("result 'job' does not match the request");
        } catch (const std::exception& e) {
            return fail(std::string("malformed 'job': ") + e.what());
        }
    }
    for (const auto& r : result["results"]) {
        if (!r.is_object()) return fail("result entry is not an object");
        if (!r.contains("test_period") || !r["test_period"].is_string()) return fail("result entry without 'test_period'");
        if (!r.contains("loss_nats_per_token") || !r["loss_nats_per_token"].is_number()) {
            return fail("result entry without numeric 'loss_nats_per_token'");
        }
        if (!r.contains("token_count") || !r["token_count"].is_number_integer()) {
            return fail("result entry without integer 'token_count'");
        }
        PeriodId period;
        try {
            period = PeriodId::parse(r["test_period"].get<std::string>());
        } catch (const Error& e) {
            return fail(e.what());
        }
        if (!expected_periods.empty() &&
            std::find(expected_periods.begin(), expected_periods.end(), period) == expected_periods.end()) {
            return fail("unexpected test_period " + period.to_string());
        }
        const double loss = r["loss_nats_per_token"].get<double>();
        const auto count = r["token_count"].get<std::int64_t>();
        if (!std::isfinite(loss) || loss < 0) return fail("loss_nats_per_token must be finite and >= 0");
        if (count <= 0) return fail("token_count must be positive");
        out.records.push_back(EvalRecord{job, period, loss, static_cast<std::size_t>(count), out.dev_loss});
    }
    if (out.records.empty()) return fail("no results");
    if (result.contains("info")) out.backend_info = result["info"];
    out.ok = true;
    return out;
}

namespace {

std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') {
            q += "'\\''";
        } else {
            q += c;
        }
    }
    return q + "'";
}

}  // namespace

JobOutcome run_external_backend(const std::string& command, const TrainJob& job, const BackendPaths& paths,
                                const nlohmann::json& backend_cfg, int early_stop_patience) {
    std::filesystem::create_directories(paths.work_dir);
    const auto config_path = paths.work_dir / "config.json";
    const auto out_path = paths.work_dir / "result.json";
    std::filesystem::remove(out_path);
    {
        std::ofstream cfg(config_path);
        cfg << backend_config(job, paths, backend_cfg, early_stop_patience).dump(2) << '\n';
    }
    std::ostringstream cmd;
    cmd << command << " --train " << shell_quote(paths.train.string()) << " --dev "
        << shell_quote(paths.dev.string());
    for (const auto& [_, p] : paths.tests) cmd << " --test " << shell_quote(p.string());
    cmd << " --out " << shell_quote(out_path.string()) << " --seed " << job.seed << " --config "
        << shell_quote(config_path.string()) << " > " << shell_quote((paths.work_dir / "backend.log").string())
        << " 2>&1";

    JobOutcome failed;
    failed.job = job;
    const int status = std::system(cmd.str().c_str());
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        failed.failure = "backend exited with status " +
                         std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status) + " (see " +
                         (paths.work_dir / "backend.log").string() + ")";
        return failed;
    }
    std::ifstream in(out_path);
    if (!in) {
        failed.failure = "backend wrote no " + out_path.string();
        return failed;
    }
    nlohmann::json result;
    try {
        in >> result;
    } catch (const nlohmann::json::exception& e) {
        failed.failure = std::string("malformed result JSON: ") + e.what();
        return failed;
    }
    std::vector<PeriodId> expected;
    for (const auto& [p, _] : paths.tests) expected.push_back(p);
    return parse_backend_result(job, result, expected);
}

nlohmann::json outcome_to_result_json(const JobOutcome& outcome) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : outcome.records) {
        results.push_back({{"test_period", r.test_period.to_string()},
                           {"loss_nats_per_token", r.loss},
                           {"token_count", r.token_count}});
    }
    nlohmann::json j{{"job", outcome.job.to_json()}, {"dev_loss", outcome.dev_loss}, {"results", results}};
    if (!outcome.backend_info.is_null()) j["info"] = outcome.backend_info;
    return j;
}

}  // namespace perish
