#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "perish/backend.hpp"
#include "perish/error.hpp"
#include "perish/manifest.hpp"

#ifndef PERISH_STUB_BACKEND
#error "PERISH_STUB_BACKEND must point at tests/data/stub_backend.py"
#endif

using namespace perish;
namespace fs = std::filesystem;

namespace {

TrainJob job(std::size_t size = 1000, std::uint64_t seed = 0) {
    return TrainJob{"topic", PeriodId::parse("2012-10"), size, "ext", seed};
}

struct Workdir {
    fs::path path;
    explicit Workdir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Workdir() { fs::remove_all(path); }
};

BackendPaths write_inputs(const fs::path& dir) {
    auto put = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name) << text << '\n';
        return dir / name;
    };
    BackendPaths p;
    p.train = put("train.txt", "a b c a b c a b c");
    p.dev = put("dev.txt", "a b c");
    p.tests = {{PeriodId::parse("2012-10"), put("t1.txt", "a b c")},
               {PeriodId::parse("2012-11"), put("t2.txt", "a b d")}};
    p.work_dir = dir / "work";
    return p;
}

std::string stub(const std::string& extra = "") {
    return std::string("python3 ") + PERISH_STUB_BACKEND + (extra.empty() ? "" : " " + extra);
}

}  // namespace

TEST_CASE("TrainJob json round trip and key") {
    const auto j = job(5000, 3);
    CHECK(TrainJob::from_json(j.to_json()) == j);
    CHECK(j.key() != job(5000, 4).key());
    CHECK(j.key() != job(2500, 3).key());
}

TEST_CASE("validator accepts a protocol-conformant result") {
    const auto j = job();
    const nlohmann::json result{{"job", j.to_json()},
                                {"dev_loss", 3.2},
                                {"results", {{{"test_period", "2012-10"}, {"loss_nats_per_token", 3.5}, {"token_count", 10}}}}};
    const std::vector<PeriodId> expected{PeriodId::parse("2012-10")};
    const auto o = parse_backend_result(j, result, expected);
    REQUIRE(o.ok);
    REQUIRE(o.records.size() == 1);
    CHECK(o.records[0].loss == 3.5);
    CHECK(o.records[0].token_count == 10);
    CHECK(o.dev_loss == 3.2);
    CHECK(parse_backend_result(j, outcome_to_result_json(o), expected).records == o.records);
}

TEST_CASE("validator rejects schema violations") {
    const auto j = job();
    const std::vector<PeriodId> expected{PeriodId::parse("2012-10")};
    auto with = [&](nlohmann::json entry) {
        return nlohmann::json{{"dev_loss", 1.0}, {"results", nlohmann::json::array({entry})}};
    };
    const nlohmann::json good{{"test_period", "2012-10"}, {"loss_nats_per_token", 1.0}, {"token_count", 5}};
    CHECK(parse_backend_result(j, with(good), expected).ok);

    auto bad = good;
    bad.erase("loss_nats_per_token");
    CHECK_FALSE(parse_backend_result(j, with(bad), expected).ok);
    bad = good;
    bad["loss_nats_per_token"] = -1.0;
    CHECK_FALSE(parse_backend_result(j, with(bad), expected).ok);
    bad = good;
    bad["token_count"] = 0;
    CHECK_FALSE(parse_backend_result(j, with(bad), expected).ok);
    bad = good;
    bad["token_count"] = 2.5;
    CHECK_FALSE(parse_backend_result(j, with(bad), expected).ok);
    bad = good;
    bad["test_period"] = "2013-01";
    CHECK_FALSE(parse_backend_result(j, with(bad), expected).ok);
    CHECK_FALSE(parse_backend_result(j, nlohmann::json::array(), expected).ok);
    CHECK_FALSE(parse_backend_result(j, nlohmann::json{{"results", nlohmann::json::array()}}, expected).ok);
    auto other = with(good);
    other["job"] = job(2000).to_json();
    const auto o = parse_backend_result(j, other, expected);
    CHECK_FALSE(o.ok);
    CHECK(o.failure.find("job") != std::string::npos);
}

TEST_CASE("external backend: stub echoes loss 3.5") {
    Workdir w("perish_backend_ok");
    const auto paths = write_inputs(w.path);
    const auto o = run_external_backend(stub(), job(), paths, nlohmann::json::object());
    REQUIRE(o.ok);
    REQUIRE(o.records.size() == 2);
    CHECK(o.records[0].loss == 3.5);
    CHECK(o.records[1].test_period == PeriodId::parse("2012-11"));
    const auto cfg = nlohmann::json::parse(std::ifstream(paths.work_dir / "config.json"));
    CHECK(cfg.at("early_stop_patience") == 15);
    CHECK(cfg.at("subset_size") == 1000);
    CHECK(cfg.at("test_periods").size() == 2);
}

TEST_CASE("external backend failures become failed outcomes") {
    Workdir w("perish_backend_fail");
    const auto paths = write_inputs(w.path);
    for (const auto* mode : {"omit_loss", "exit_nonzero", "garbage", "no_output"}) {
        CAPTURE(mode);
        const auto o = run_external_backend(stub(std::string("--mode ") + mode), job(), paths, nlohmann::json::object());
        CHECK_FALSE(o.ok);
        CHECK_FALSE(o.failure.empty());
        CHECK(o.records.empty());
    }
}

TEST_CASE("built-in job evaluates every test set") {
    std::vector<std::string> train, dev, test;
    for (int i = 0; i < 600; ++i) train.push_back(i % 3 ? "x" : "y");
    dev.assign(train.begin(), train.begin() + 60);
    test.assign(train.begin() + 60, train.begin() + 120);
    const std::vector<TestSet> tests{{PeriodId::parse("2012-10"), test}, {PeriodId::parse("2012-11"), dev}};
    const auto o = run_ngram_job(TrainJob{"t", PeriodId::parse("2012-10"), 300, "ngram", 0}, train, dev, tests, {});
    REQUIRE(o.ok);
    CHECK(o.records.size() == 2);
    for (const auto& r : o.records) {
        CHECK(r.loss >= 0.0);
        CHECK(r.token_count == 60);
    }
    CHECK(run_ngram_job(TrainJob{"t", PeriodId::parse("2012-10"), 300, "ngram", 0}, train, dev, tests, {}).records ==
          o.records);
    CHECK_FALSE(run_ngram_job(TrainJob{"t", PeriodId::parse("2012-10"), 900, "ngram", 0}, train, dev, tests, {}).ok);
}

TEST_CASE("manifest: append, read, concurrent writers") {
    Workdir w("perish_manifest");
    const Manifest m(w.path / "runs.jsonl");
    CHECK(m.read().empty());
    constexpr int kThreads = 8;
    constexpr int kPer = 50;
    std::vector<std::thread> pool;
    for (int t = 0; t < kThreads; ++t) {
        pool.emplace_back([&, t] {
            for (int i = 0; i < kPer; ++i) {
                JobOutcome o;
                o.job = job(1000 + i, static_cast<std::uint64_t>(t));
                o.ok = true;
                o.dev_loss = 1.0 + i;
                o.records.push_back(EvalRecord{o.job, PeriodId::parse("2012-10"), 2.0, 7, o.dev_loss});
                m.append(o, "hash");
            }
        });
    }
    for (auto& t : pool) t.join();
    const auto all = m.read();
    CHECK(all.size() == kThreads * kPer);
    CHECK(eval_records(all).size() == kThreads * kPer);

    JobOutcome failed;
    failed.job = job();
    failed.failure = "boom";
    m.append(failed, "hash");
    const auto again = m.read();
    CHECK_FALSE(again.back().ok);
    CHECK(again.back().failure == "boom");
    CHECK(eval_records(again).size() == kThreads * kPer);
}

TEST_CASE("best-model selection keeps the lowest dev loss, ties to the lower seed") {
    const PeriodId p = PeriodId::parse("2012-10");
    std::vector<EvalRecord> recs{
        {job(1000, 0), p, 3.0, 10, 2.0},
        {job(1000, 1), p, 2.5, 10, 1.5},
        {job(1000, 2), p, 2.0, 10, 1.5},
        {job(2000, 0), p, 1.0, 10, 1.0},
    };
    const auto best = best_records(recs);
    CHECK(best.size() == 2);
    const auto& r = best.at(BestKey{"topic", p, 1000, "ext", p});
    CHECK(r.job.seed == 1);
    CHECK(r.loss == 2.5);
}
