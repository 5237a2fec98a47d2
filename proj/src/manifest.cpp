#include "perish/manifest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>

#include "perish/error.hpp"

namespace perish {

nlohmann::json outcome_to_manifest_line(const JobOutcome& outcome, const std::string& config_hash) {
    nlohmann::json j = outcome_to_result_json(outcome);
    j["status"] = outcome.ok ? "ok" : "failed";
    if (!outcome.ok) j["reason"] = outcome.failure;
    j["config_hash"] = config_hash;
    return j;
}

JobOutcome outcome_from_manifest_line(const nlohmann::json& line) {
    const auto job = TrainJob::from_json(line.at("job"));
    if (line.value("status", "ok") != "ok") {
        JobOutcome failed;
        failed.job = job;
        failed.failure = line.value("reason", "failed");
        return failed;
    }
    return parse_backend_result(job, line, {});
}

void Manifest::append(const JobOutcome& outcome, const std::string& config_hash) const {
    const std::string text = outcome_to_manifest_line(outcome, config_hash).dump() + "\n";
    std::lock_guard lock(mutex_);
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) throw DataError("cannot open manifest " + path_.string() + ": " + std::strerror(errno));
    const auto written = ::write(fd, text.data(), text.size());
    ::close(fd);
    if (written != static_cast<ssize_t>(text.size())) {
        throw DataError("short write to manifest " + path_.string());
    }
}

std::vector<JobOutcome> Manifest::read() const {
    std::vector<JobOutcome> out;
    std::ifstream in(path_);
    if (!in) return out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(outcome_from_manifest_line(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw DataError(path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<EvalRecord> eval_records(const std::vector<JobOutcome>& outcomes) {
    std::vector<EvalRecord> out;
    for (const auto& o : outcomes) {
        if (o.ok) out.insert(out.end(), o.records.begin(), o.records.end());
    }
    return out;
}

std::map<BestKey, EvalRecord> best_records(const std::vector<EvalRecord>& records) {
    std::map<BestKey, EvalRecord> best;
    for (const auto& r : records) {
        BestKey key{r.job.topic, r.job.train_period, r.job.subset_size, r.job.backend_id, r.test_period};
        auto it = best.find(key);
        if (it == best.end()) {
            best.emplace(key, r);
        } else if (r.dev_loss < it->second.dev_loss ||
                   (r.dev_loss == it->second.dev_loss && r.job.seed < it->second.job.seed)) {
            it->second = r;
        }
    }
    return best;
}

}  // namespace perish
