#include "perish/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "perish/error.hpp"

namespace perish {

PreparedTopic prepare_topic(const std::string& topic, std::span<const Document> docs, const PipelineConfig& cfg,
                            const std::vector<PeriodId>* only) {
    PreparedTopic out;
    out.topic = topic;
    std::vector<Document> mine;
    for (const auto& d : docs) {
        if (d.topic == topic) mine.push_back(d);
    }
    const auto kept = filter_min_score(mine, cfg.min_score);
    auto buckets = slice_periods(kept, cfg.granularity, cfg.min_words);
    SplitConfig split = cfg.split;
    split.train_min = cfg.ladder_floor;
    for (auto& [period, bucket] : buckets) {
        if (only && std::find(only->begin(), only->end(), period) == only->end()) continue;
        if (bucket.insufficient) {
            out.warnings.push_back(topic + " " + period.to_string() + ": " + std::to_string(bucket.word_count) +
                                   " words < min_words " + std::to_string(cfg.min_words) + "; skipped");
            continue;
        }
        auto slice = make_splits(topic, period, bucket.docs, split);
        auto ladder = build_subset_ladder(period, slice.train_full.size(), cfg.ladder_top, cfg.ladder_floor);
        out.periods.push_back(PreparedPeriod{std::move(slice), std::move(ladder)});
    }
    if (only) {
        for (const auto& p : *only) {
            if (!buckets.contains(p)) out.warnings.push_back(topic + " " + p.to_string() + ": no documents");
        }
    }
    return out;
}

std::vector<TrainJob> enumerate_jobs(const std::string& topic, std::span<const PeriodId> periods,
                                     std::span<const std::size_t> ladder_sizes, std::span<const std::uint64_t> seeds,
                                     const std::string& backend_id) {
    std::vector<TrainJob> jobs;
    for (const auto& p : periods) {
        for (auto size : ladder_sizes) {
            for (auto seed : seeds) jobs.push_back(TrainJob{topic, p, size, backend_id, seed});
        }
    }
    return jobs;
}

std::vector<PeriodId> test_periods_for(const TrainJob& job, std::size_t top_size, std::span<const PeriodId> periods) {
    std::vector<PeriodId> out;
    for (const auto& p : periods) {
        if (p == job.train_period || (job.subset_size == top_size && p > job.train_period)) out.push_back(p);
    }
    return out;
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex err_mutex;
    auto work = [&]() {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!first) first = std::current_exception();
                next = n;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first) std::rethrow_exception(first);
}

std::vector<JobOutcome> run_jobs(std::span<const TrainJob> jobs, unsigned workers,
                                 const std::function<JobOutcome(const TrainJob&)>& runner, const Manifest* manifest,
                                 const std::string& config_hash) {
    std::vector<JobOutcome> out(jobs.size());
    parallel_for(jobs.size(), workers, [&](std::size_t i) {
        JobOutcome o;
        try {
            o = runner(jobs[i]);
        } catch (const std::exception& e) {
            o = JobOutcome{};
            o.job = jobs[i];
            o.ok = false;
            o.failure = e.what();
        }
        if (manifest) manifest->append(o, config_hash);
        out[i] = std::move(o);
    });
    return out;
}

std::vector<JobOutcome> train_prepared(const PreparedTopic& prepared, const PipelineConfig& cfg,
                                       std::span<const std::uint64_t> seeds, unsigned workers,
                                       const Manifest* manifest) {
    std::vector<PeriodId> periods;
    std::map<PeriodId, const PreparedPeriod*> by_period;
    for (const auto& p : prepared.periods) {
        periods.push_back(p.slice.period);
        by_period[p.slice.period] = &p;
    }
    std::vector<TrainJob> jobs;
    for (const auto& p : prepared.periods) {
        const auto more = enumerate_jobs(prepared.topic, std::span(&p.slice.period, 1), p.ladder.sizes, seeds, "ngram");
        jobs.insert(jobs.end(), more.begin(), more.end());
    }
    const std::string hash = cfg.hash();
    return run_jobs(
        jobs, workers,
        [&](const TrainJob& job) {
            const auto& own = *by_period.at(job.train_period);
            std::vector<TestSet> tests;
            for (const auto& tp : test_periods_for(job, own.ladder.sizes.front(), periods)) {
                tests.push_back(TestSet{tp, by_period.at(tp)->slice.test});
            }
            return run_ngram_job(job, own.slice.train_full, own.slice.dev, tests, cfg.ngram);
        },
        manifest, hash);
}

std::vector<std::string> record_topics(const std::vector<EvalRecord>& records) {
    std::set<std::string> topics;
    for (const auto& r : records) topics.insert(r.job.topic);
    return {topics.begin(), topics.end()};
}

TopicAnalysis analyze_topic(const std::vector<EvalRecord>& records, const std::string& topic, const PipelineConfig& cfg,
                            std::optional<PeriodId> reference, std::optional<std::size_t> reference_size) {
    TopicAnalysis a;
    a.topic = topic;
    std::vector<EvalRecord> mine;
    for (const auto& r : records) {
        if (r.job.topic == topic) mine.push_back(r);
    }
    if (mine.empty()) {
        a.warnings.push_back("no records for topic '" + topic + "'");
        return a;
    }
    a.curves = fit_learning_curves(mine, true, cfg.monotone_tolerance);
    a.warnings.insert(a.warnings.end(), a.curves.warnings.begin(), a.curves.warnings.end());
    if (!reference) {
        reference = mine.front().job.train_period;
        for (const auto& r : mine) reference = std::min(*reference, r.job.train_period);
    }
    a.series = build_effectiveness_series(mine, topic, *reference, a.curves, reference_size);
    a.warnings.insert(a.warnings.end(), a.series.warnings.begin(), a.series.warnings.end());
    try {
        a.decay = fit_exponential_decay(timed_values(a.series), cfg.decay, cfg.half_life_cap);
    } catch (const FitError& e) {
        a.warnings.push_back(topic + ": " + e.what());
    }
    return a;
}

DriftResult run_drift_experiment(const DriftExperiment& exp, const PipelineConfig& cfg, unsigned workers) {
    DriftResult r;
    r.rho = exp.process.rho;
    r.seed = exp.process.seed;
    const auto process = synth::make_process(exp.process);
    const auto docs = synth::generate_corpus(process, exp.corpus);
    r.documents = docs.size();
    const auto prepared = prepare_topic(exp.corpus.topic, docs, cfg);
    r.outcomes = train_prepared(prepared, cfg, exp.train_seeds, workers);
    r.analysis = analyze_topic(eval_records(r.outcomes), exp.corpus.topic, cfg);
    r.analysis.warnings.insert(r.analysis.warnings.begin(), prepared.warnings.begin(), prepared.warnings.end());
    return r;
}

}  // namespace perish
