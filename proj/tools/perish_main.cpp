// perish: command-line driver for the perishability toolkit.
//
// Artifacts live under a work directory (default ./perish_work):
//   corpus/<topic>.txt          ingest
//   slices/<topic>/<period>/    slice, ladder
//   manifest.jsonl              train
//   curves.csv                  curves
//   effectiveness/<topic>.json  effectiveness
//   decay.csv pairwise*.csv forms.csv
//   report/                     report

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include "perish/backend.hpp"
#include "perish/config.hpp"
#include "perish/corpus.hpp"
#include "perish/curves.hpp"
#include "perish/decay.hpp"
#include "perish/error.hpp"
#include "perish/manifest.hpp"
#include "perish/pipeline.hpp"
#include "perish/report.hpp"
#include "perish/synth.hpp"
#include "perish/theory.hpp"

namespace fs = std::filesystem;
using namespace perish;

namespace {

struct Globals {
    std::string work = "perish_work";
    std::string config;
    std::optional<std::uint64_t> seed;
};

PipelineConfig load_config(const Globals& g) {
    PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : PipelineConfig::load(g.config);
    if (g.seed) cfg.split.seed = *g.seed;
    return cfg;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

void write_file(const fs::path& file, const std::string& body) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot write " + file.string());
    out << body;
}

void write_csv(const fs::path& file, const std::string& csv, const std::string& hash) {
    write_file(file, with_config_hash(csv, hash));
}

std::vector<PeriodId> period_filter(const std::string& range) {
    return range.empty() ? std::vector<PeriodId>{} : parse_period_range(range);
}

bool wanted(const std::vector<PeriodId>& filter, const PeriodId& p) {
    return filter.empty() || std::find(filter.begin(), filter.end(), p) != filter.end();
}

bool wanted(const std::vector<std::string>& topics, const std::string& t) {
    return topics.empty() || std::find(topics.begin(), topics.end(), t) != topics.end();
}

fs::path corpus_dir(const Globals& g) { return fs::path(g.work) / "corpus"; }
fs::path slices_root(const Globals& g) { return fs::path(g.work) / "slices"; }
fs::path manifest_path(const Globals& g) { return fs::path(g.work) / "manifest.jsonl"; }
fs::path series_dir(const Globals& g) { return fs::path(g.work) / "effectiveness"; }

std::vector<JobOutcome> require_manifest(const Globals& g) {
    const auto path = manifest_path(g);
    if (!fs::exists(path)) {
        throw DataError("no run manifest at " + path.string() + " (run `perish train` first)");
    }
    return Manifest(path).read();
}

std::vector<EffectivenessSeries> require_series(const Globals& g, const std::vector<std::string>& topics) {
    const auto dir = series_dir(g);
    if (!fs::is_directory(dir)) {
        throw DataError("no effectiveness series under " + dir.string() + " (run `perish effectiveness` first)");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<EffectivenessSeries> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed " + f.string() + ": " + e.what());
        }
        auto s = series_from_json(j);
        if (wanted(topics, s.topic)) out.push_back(std::move(s));
    }
    if (!topics.empty() && out.size() < topics.size()) {
        for (const auto& t : topics) {
            if (std::none_of(out.begin(), out.end(), [&](const auto& s) { return s.topic == t; })) {
                throw DataError("no effectiveness series for topic '" + t + "' (run `perish effectiveness` first)");
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string out;
    double drift = 0.0;
    std::string first = "2020-01";
    int periods = 12;
    std::size_t words = 200'000;
    std::size_t vocab = 1000;
    std::size_t successors = 1000;
    double zipf = 1.4;
    std::string topic = "synthetic";
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
    synth::ProcessSpec ps;
    ps.vocab_size = a.vocab;
    ps.successors = a.successors;
    ps.zipf_exponent = a.zipf;
    ps.rho = a.drift;
    ps.seed = g.seed.value_or(0);
    synth::CorpusSpec cs;
    cs.topic = a.topic;
    cs.periods = synth::monthly_periods(PeriodId::parse(a.first), a.periods);
    cs.words_per_period = a.words;
    const auto process = synth::make_process(ps);
    const auto docs = synth::generate_corpus(process, cs);
    std::ostringstream body;
    write_flat_corpus(body, docs);
    write_file(a.out, body.str());
    std::cout << "wrote " << docs.size() << " documents (" << a.periods << " periods x " << a.words
              << " words, rho=" << a.drift << "/year, entropy rate of base chain "
              << synth::entropy_rate(process.p_base) << " nats) to " << a.out << '\n';
    return 0;
}

int cmd_ingest(const Globals& g, const std::vector<std::string>& inputs) {
    const auto cfg = load_config(g);
    const auto hash = cfg.hash();
    std::vector<Document> all;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& in : inputs) {
        std::ifstream f(in);
        if (!f) throw DataError("cannot read corpus file " + in);
        ParseStats stats;
        auto docs = parse_flat_corpus(f, &stats);
        for (const auto& w : stats.warnings) warn(in + ": " + w);
        files.push_back({{"path", in},
                         {"records", stats.records},
                         {"documents", docs.size()},
                         {"skipped_bad_score", stats.skipped_bad_score},
                         {"skipped_empty", stats.skipped_empty}});
        all.insert(all.end(), std::make_move_iterator(docs.begin()), std::make_move_iterator(docs.end()));
    }
    const auto kept = filter_min_score(all, cfg.min_score);
    const auto dir = corpus_dir(g);
    fs::remove_all(dir);
    fs::create_directories(dir);
    nlohmann::json topics = nlohmann::json::object();
    for (const auto& [topic, docs] : group_by_topic(kept)) {
        std::ostringstream body;
        write_flat_corpus(body, docs);
        write_file(dir / (file_stem(topic) + ".txt"), body.str());
        topics[topic] = docs.size();
        std::cout << topic << ": " << docs.size() << " documents kept\n";
    }
    const nlohmann::json summary{{"config_hash", hash},
                                 {"files", files},
                                 {"min_score", cfg.min_score},
                                 {"documents_read", all.size()},
                                 {"documents_kept", kept.size()},
                                 {"topics", topics}};
    write_file(dir / "ingest.json", summary.dump(2) + "\n");
    return 0;
}

std::map<std::string, std::vector<Document>> read_ingested(const Globals& g) {
    const auto dir = corpus_dir(g);
    if (!fs::exists(dir / "ingest.json")) {
        throw DataError("no ingested corpus under " + dir.string() + " (run `perish ingest` first)");
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::map<std::string, std::vector<Document>> out;
    for (const auto& f : files) {
        std::ifstream in(f);
        for (auto& d : parse_flat_corpus(in)) out[d.topic].push_back(std::move(d));
    }
    return out;
}

int cmd_slice(const Globals& g, const std::vector<std::string>& topics, const std::string& range) {
    const auto cfg = load_config(g);
    const auto hash = cfg.hash();
    const auto filter = period_filter(range);
    SplitConfig split = cfg.split;
    split.train_min = cfg.ladder_floor;
    std::size_t written = 0;
    for (const auto& [topic, docs] : read_ingested(g)) {
        if (!wanted(topics, topic)) continue;
        for (const auto& [period, bucket] : slice_periods(docs, cfg.granularity, cfg.min_words)) {
            if (!wanted(filter, period)) continue;
            if (bucket.insufficient) {
                warn(topic + " " + period.to_string() + ": " + std::to_string(bucket.word_count) +
                     " words < min_words " + std::to_string(cfg.min_words) + "; skipped");
                continue;
            }
            const auto slice = make_splits(topic, period, bucket.docs, split);
            write_slice(slice_dir(slices_root(g), topic, period), slice, std::nullopt, hash);
            std::cout << topic << ' ' << period.to_string() << ": train " << slice.train_full.size() << ", dev "
                      << slice.dev.size() << ", test " << slice.test.size() << " words\n";
            ++written;
        }
    }
    if (written == 0) warn("no slices written");
    return 0;
}

std::vector<SliceInfo> require_slices(const Globals& g, const std::vector<std::string>& topics,
                                      const std::vector<PeriodId>& filter) {
    std::vector<SliceInfo> out;
    auto all = list_slices(slices_root(g));
    for (auto& s : all) {
        if (wanted(topics, s.topic) && wanted(filter, s.period)) out.push_back(std::move(s));
    }
    if (out.empty() && !all.empty()) throw DataError("no period slices match the --topic/--periods selection");
    if (out.empty()) throw DataError("no period slices under " + slices_root(g).string() + " (run `perish slice` first)");
    return out;
}

int cmd_ladder(const Globals& g, const std::vector<std::string>& topics, std::optional<std::size_t> top,
               std::optional<std::size_t> floor) {
    const auto cfg = load_config(g);
    const auto hash = cfg.hash();
    for (const auto& s : require_slices(g, topics, {})) {
        const auto ladder =
            build_subset_ladder(s.period, s.train_words, top.value_or(cfg.ladder_top), floor.value_or(cfg.ladder_floor));
        set_slice_ladder(s, ladder, hash);
        std::cout << s.topic << ' ' << s.period.to_string() << ':';
        for (auto n : ladder.sizes) std::cout << ' ' << n;
        std::cout << '\n';
    }
    return 0;
}

struct TrainArgs {
    std::vector<std::string> topics;
    std::string periods;
    std::string backend = "ngram";
    unsigned jobs = 1;
    std::vector<std::uint64_t> seeds;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
    const auto cfg = load_config(g);
    const auto hash = cfg.hash();
    const bool external = a.backend == "external";
    if (external && cfg.external_command.empty()) {
        throw DataError("--backend external needs \"external_command\" in the config file");
    }
    const std::string backend_id = external ? cfg.external_backend.value("id", std::string("external")) : "ngram";
    std::vector<std::uint64_t> seeds = a.seeds;
    if (seeds.empty()) seeds.push_back(g.seed.value_or(0));

    const auto slices = require_slices(g, a.topics, period_filter(a.periods));
    std::map<std::string, std::vector<const SliceInfo*>> by_topic;
    for (const auto& s : slices) {
        if (!s.ladder) {
            throw DataError(s.topic + " " + s.period.to_string() + " has no subset ladder (run `perish ladder` first)");
        }
        by_topic[s.topic].push_back(&s);
    }

    struct Task {
        TrainJob job;
        const SliceInfo* slice;
        std::vector<const SliceInfo*> tests;
    };
    std::vector<Task> tasks;
    for (const auto& [topic, list] : by_topic) {
        std::vector<PeriodId> periods;
        std::map<PeriodId, const SliceInfo*> lookup;
        for (const auto* s : list) {
            periods.push_back(s->period);
            lookup[s->period] = s;
        }
        for (const auto* s : list) {
            const std::vector<PeriodId> own{s->period};
            for (const auto& job : enumerate_jobs(topic, own, s->ladder->sizes, seeds, backend_id)) {
                Task t{job, s, {}};
                for (const auto& p : test_periods_for(job, s->ladder->sizes.front(), periods)) {
                    t.tests.push_back(lookup.at(p));
                }
                tasks.push_back(std::move(t));
            }
        }
    }

    std::mutex cache_mutex;
    std::map<fs::path, std::shared_ptr<const TokenSeq>> cache;
    auto tokens = [&](const fs::path& file) {
        {
            std::lock_guard lock(cache_mutex);
            if (auto it = cache.find(file); it != cache.end()) return it->second;
        }
        auto loaded = std::make_shared<const TokenSeq>(read_tokens(file));
        std::lock_guard lock(cache_mutex);
        return cache.emplace(file, std::move(loaded)).first->second;
    };

    std::map<std::string, const Task*> by_key;
    std::vector<TrainJob> jobs;
    for (const auto& t : tasks) {
        jobs.push_back(t.job);
        by_key[t.job.key()] = &t;
    }
    const Manifest manifest(manifest_path(g));
    fs::create_directories(g.work);
    const auto outcomes = run_jobs(
        jobs, a.jobs,
        [&](const TrainJob& job) {
            const Task& t = *by_key.at(job.key());
            if (external) {
                BackendPaths paths;
                paths.train = t.slice->dir / "train.txt";
                paths.dev = t.slice->dir / "dev.txt";
                for (const auto* s : t.tests) paths.tests.emplace_back(s->period, s->dir / "test.txt");
                paths.work_dir = fs::path(g.work) / "jobs" / file_stem(job.topic) / job.train_period.to_string() /
                                 (std::to_string(job.subset_size) + "_s" + std::to_string(job.seed));
                fs::create_directories(paths.work_dir);
                return run_external_backend(cfg.external_command, job, paths, cfg.external_backend,
                                            cfg.early_stop_patience);
            }
            const auto train = tokens(t.slice->dir / "train.txt");
            const auto dev = tokens(t.slice->dir / "dev.txt");
            std::vector<std::shared_ptr<const TokenSeq>> keep;
            std::vector<TestSet> tests;
            for (const auto* s : t.tests) {
                keep.push_back(tokens(s->dir / "test.txt"));
                tests.push_back(TestSet{s->period, *keep.back()});
            }
            return run_ngram_job(job, *train, *dev, tests, cfg.ngram);
        },
        &manifest, hash);

    std::size_t failed = 0;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++failed;
            warn("job " + o.job.key() + " failed: " + o.failure);
        }
    }
    std::cout << outcomes.size() << " jobs run, " << failed << " failed; manifest " << manifest.path().string()
              << '\n';
    return 0;
}

int cmd_curves(const Globals& g) {
    const auto cfg = load_config(g);
    const auto records = eval_records(require_manifest(g));
    const auto fits = fit_learning_curves(records, true, cfg.monotone_tolerance);
    for (const auto& w : fits.warnings) warn(w);
    const auto csv = render_curves_table(fits);
    write_csv(fs::path(g.work) / "curves.csv", csv, cfg.hash());
    std::cout << csv;
    return 0;
}

struct EffArgs {
    std::vector<std::string> topics;
    std::string reference;
    std::optional<std::size_t> reference_size;
};

std::vector<EffectivenessSeries> compute_series(const std::vector<EvalRecord>& records, const PipelineConfig& cfg,
                                                const std::vector<std::string>& topics,
                                                std::optional<PeriodId> reference,
                                                std::optional<std::size_t> reference_size, bool strict) {
    std::vector<EffectivenessSeries> out;
    for (const auto& topic : record_topics(records)) {
        if (!wanted(topics, topic)) continue;
        try {
            auto a = analyze_topic(records, topic, cfg, reference, reference_size);
            for (const auto& w : a.warnings) warn(w);
            out.push_back(std::move(a.series));
        } catch (const Error& e) {
            if (strict) throw;
            warn(topic + ": " + e.what());
        }
    }
    return out;
}

int cmd_effectiveness(const Globals& g, const EffArgs& a) {
    const auto cfg = load_config(g);
    const auto hash = cfg.hash();
    const auto records = eval_records(require_manifest(g));
    std::optional<PeriodId> ref;
    if (!a.reference.empty()) ref = PeriodId::parse(a.reference);
    const auto series = compute_series(records, cfg, a.topics, ref, a.reference_size, !a.topics.empty());
    const auto dir = series_dir(g);
    fs::create_directories(dir);
    for (const auto& s : series) {
        auto j = series_to_json(s);
        j["config_hash"] = hash;
        write_file(dir / (file_stem(s.topic) + ".json"), j.dump(2) + "\n");
        write_csv(dir / (file_stem(s.topic) + ".csv"), render_series_table(s), hash);
        std::cout << s.topic << ": " << s.points.size() << " points from " << s.reference_period.to_string()
                  << " (size " << s.reference_size << ")\n";
    }
    return 0;
}

std::vector<TopicDecay> decay_rows(const std::vector<EffectivenessSeries>& series, const PipelineConfig& cfg) {
    std::vector<TopicDecay> rows;
    for (const auto& s : series) {
        try {
            rows.push_back({s.topic, fit_exponential_decay(timed_values(s), cfg.decay, cfg.half_life_cap)});
        } catch (const FitError& e) {
            warn(s.topic + ": " + e.what());
        }
    }
    return rows;
}

std::vector<PairwiseFit> pairwise_rows(const std::vector<EffectivenessSeries>& series, const PipelineConfig& cfg) {
    std::vector<PairwiseFit> pairs;
    for (std::size_t i = 0; i < series.size(); ++i) {
        for (std::size_t j = i + 1; j < series.size(); ++j) {
            try {
                pairs.push_back(pairwise_decay_difference(timed_values(series[i]), timed_values(series[j]), cfg.decay,
                                                          cfg.thresholds, series[i].topic, series[j].topic));
            } catch (const FitError& e) {
                warn(series[i].topic + " vs " + series[j].topic + ": " + e.what());
            }
        }
    }
    return pairs;
}

std::vector<TopicForms> forms_rows(const std::vector<EffectivenessSeries>& series, const PipelineConfig& cfg) {
    std::vector<TopicForms> rows;
    for (const auto& s : series) {
        try {
            rows.push_back({s.topic, compare_functional_forms(timed_values(s), cfg.decay, cfg.form_margin)});
        } catch (const FitError& e) {
            warn(s.topic + ": " + e.what());
        }
    }
    return rows;
}

void apply_decay_flags(PipelineConfig& cfg, bool no_clip, bool intercept) {
    if (no_clip) cfg.decay.clip_at_one = false;
    if (intercept) cfg.decay.intercept = true;
}

int cmd_decay(const Globals& g, const std::vector<std::string>& topics, bool no_clip, bool intercept) {
    auto cfg = load_config(g);
    apply_decay_flags(cfg, no_clip, intercept);
    const auto rows = decay_rows(require_series(g, topics), cfg);
    const auto csv = render_decay_table(rows);
    write_csv(fs::path(g.work) / "decay.csv", csv, cfg.hash());
    std::cout << csv;
    return 0;
}

int cmd_pairwise(const Globals& g, const std::vector<std::string>& topics, bool no_clip, bool intercept) {
    auto cfg = load_config(g);
    apply_decay_flags(cfg, no_clip, intercept);
    const auto series = require_series(g, topics);
    const auto pairs = pairwise_rows(series, cfg);
    std::vector<std::string> names;
    for (const auto& s : series) names.push_back(s.topic);
    write_csv(fs::path(g.work) / "pairwise.csv", render_pairwise_table(pairs), cfg.hash());
    const auto matrix = render_band_matrix(names, pairs);
    write_csv(fs::path(g.work) / "pairwise_bands.csv", matrix, cfg.hash());
    std::cout << matrix;
    return 0;
}

int cmd_forms(const Globals& g, const std::vector<std::string>& topics, bool no_clip) {
    auto cfg = load_config(g);
    apply_decay_flags(cfg, no_clip, false);
    const auto csv = render_forms_table(forms_rows(require_series(g, topics), cfg));
    write_csv(fs::path(g.work) / "forms.csv", csv, cfg.hash());
    std::cout << csv;
    return 0;
}

struct OffloadArgs {
    std::string model = "drift_shift";
    double mu = 0.3;
    double a = 2.0;
    double b = 0.3;
    double d_offset = 0.0;
    double d_scale = 0.2;
    double d_power = 1.0;
    double n = 1e5;
    double window = 2.0;
    std::size_t bins = 24;
    std::vector<double> masses;
    std::string out;
};

int cmd_offload(const Globals& g, const OffloadArgs& a) {
    using namespace perish::theory;
    const auto cfg = load_config(g);
    const auto model = a.model == "pure_exponential"
                           ? EquivalenceModel::pure_exponential(a.mu)
                           : EquivalenceModel::drift_shift(a.a, a.b, DriftFunction{a.d_offset, a.d_scale, a.d_power});
    const auto density = a.masses.empty() ? SamplingDensity::uniform(a.window, a.bins)
                                          : SamplingDensity::from_masses(a.window, a.masses);
    const DatasetComposition comp{a.n, density};
    const double t0 = equivalent_time(comp, model);
    const double n0 = composition_equivalent_size(comp, model);
    const auto r = greedy_offload(comp, model);
    std::ostringstream csv;
    csv << "step,removed_size,old_t_star,new_t_star,old_equivalent_size,new_equivalent_size,gain\n";
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
        const auto& s = r.steps[i];
        csv << i + 1 << ',' << s.removed_mass << ',' << s.old_t_star << ',' << s.new_t_star << ','
            << s.old_equivalent_size << ',' << s.new_equivalent_size << ',' << s.gain << '\n';
    }
    const auto body = with_config_hash(csv.str(), cfg.hash());
    if (!a.out.empty()) write_file(a.out, body);
    std::cout << "# model " << model.describe() << "\n# start: n=" << a.n << " window=" << a.window << " t*=" << t0
              << " n_eq=" << n0 << "\n# end:   n=" << r.final_composition.n
              << " window=" << r.final_composition.density.window() << " t*=" << r.final_t_star
              << " n_eq=" << r.final_equivalent_size << '\n'
              << body;
    return 0;
}

int cmd_report(const Globals& g, const std::string& out_dir, bool no_clip) {
    auto cfg = load_config(g);
    apply_decay_flags(cfg, no_clip, false);
    const auto hash = cfg.hash();
    const auto records = eval_records(require_manifest(g));
    const fs::path out = out_dir.empty() ? fs::path(g.work) / "report" : fs::path(out_dir);
    fs::create_directories(out);

    const auto fits = fit_learning_curves(records, true, cfg.monotone_tolerance);
    for (const auto& w : fits.warnings) warn(w);
    write_csv(out / "curves.csv", render_curves_table(fits), hash);

    const auto series = compute_series(records, cfg, {}, std::nullopt, std::nullopt, false);
    std::vector<std::string> names;
    for (const auto& s : series) {
        names.push_back(s.topic);
        write_csv(out / ("effectiveness_" + file_stem(s.topic) + ".csv"), render_series_table(s), hash);
        const std::vector<EffectivenessSeries> one{s};
        write_file(out / ("effectiveness_" + file_stem(s.topic) + ".svg"),
                   render_series_svg(one, "Effectiveness over time: " + s.topic, hash));
    }
    write_file(out / "effectiveness.svg", render_series_svg(series, "Effectiveness over time", hash));

    const auto decay = decay_rows(series, cfg);
    write_csv(out / "decay_table.csv", render_decay_table(decay), hash);
    const auto pairs = pairwise_rows(series, cfg);
    write_csv(out / "pairwise.csv", render_pairwise_table(pairs), hash);
    write_csv(out / "pairwise_bands.csv", render_band_matrix(names, pairs), hash);
    write_csv(out / "forms.csv", render_forms_table(forms_rows(series, cfg)), hash);

    std::cout << render_decay_table(decay) << "report written to " << out.string() << '\n';
    return 0;
}

// Protocol backend wrapping the built-in n-gram model, so the external code
// path can be exercised end to end.
struct BackendArgs {
    std::string train, dev, out, config;
    std::vector<std::string> tests;
    std::uint64_t seed = 0;
};

int cmd_ngram_backend(const BackendArgs& a) {
    std::ifstream in(a.config);
    if (!in) throw DataError("cannot read backend config " + a.config);
    nlohmann::json cfg;
    try {
        in >> cfg;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("backend config is not JSON: ") + e.what());
    }
    const auto job = TrainJob::from_json(cfg.at("job"));
    const auto periods = cfg.at("test_periods").get<std::vector<std::string>>();
    if (periods.size() != a.tests.size()) throw DataError("test files and test_periods differ in number");
    const auto backend = cfg.value("backend", nlohmann::json::object());
    const NGramConfig ngram =
        backend.contains("ngram") ? NGramConfig::from_json(backend.at("ngram")) : NGramConfig{};
    const auto train = read_tokens(a.train);
    const auto dev = read_tokens(a.dev);
    std::vector<TokenSeq> test_tokens;
    std::vector<TestSet> tests;
    for (const auto& f : a.tests) test_tokens.push_back(read_tokens(f));
    for (std::size_t i = 0; i < periods.size(); ++i) tests.push_back({PeriodId::parse(periods[i]), test_tokens[i]});
    const auto outcome = run_ngram_job(job, train, dev, tests, ngram);
    write_file(a.out, outcome_to_result_json(outcome).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perish: measure how fast text data loses its value over time"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--work,-w", g.work, "Work directory holding all artifacts")->capture_default_str();
    app.add_option("--config,-c", g.config, "Pipeline config JSON")->check(CLI::ExistingFile);
    app.add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { g.seed = s; },
                                           "Seed for splits, synthesis and training");

    std::function<int()> run;

    SynthArgs sa;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a drifting synthetic corpus");
    synth_cmd->add_option("--out,-o", sa.out, "Output corpus file")->required();
    synth_cmd->add_option("--drift", sa.drift, "Drift speed rho per year")->capture_default_str();
    synth_cmd->add_option("--first", sa.first, "First month")->capture_default_str();
    synth_cmd->add_option("--periods", sa.periods, "Number of monthly periods")->capture_default_str();
    synth_cmd->add_option("--words", sa.words, "Words per period")->capture_default_str();
    synth_cmd->add_option("--vocab", sa.vocab, "Vocabulary size")->capture_default_str();
    synth_cmd->add_option("--successors", sa.successors, "Nonzero transitions per state")->capture_default_str();
    synth_cmd->add_option("--zipf", sa.zipf, "Zipf exponent of transition rows")->capture_default_str();
    synth_cmd->add_option("--topic", sa.topic, "Topic name")->capture_default_str();
    synth_cmd->callback([&] { run = [&] { return cmd_synth(g, sa); }; });

    std::vector<std::string> inputs;
    auto* ingest_cmd = app.add_subcommand("ingest", "Parse and score-filter corpus files");
    ingest_cmd->add_option("inputs", inputs, "Corpus files")->required()->check(CLI::ExistingFile);
    ingest_cmd->callback([&] { run = [&] { return cmd_ingest(g, inputs); }; });

    std::vector<std::string> topics;
    std::string periods;
    auto* slice_cmd = app.add_subcommand("slice", "Cut ingested topics into periods and train/dev/test splits");
    slice_cmd->add_option("--topic", topics, "Topics (default: all)");
    slice_cmd->add_option("--periods", periods, "Period range, e.g. 2012-10..2013-10");
    slice_cmd->callback([&] { run = [&] { return cmd_slice(g, topics, periods); }; });

    std::optional<std::size_t> top, floor;
    auto* ladder_cmd = app.add_subcommand("ladder", "Record the nested subset ladder of every slice");
    ladder_cmd->add_option("--topic", topics, "Topics (default: all)");
    ladder_cmd->add_option("--top", top, "Largest rung (default from config)");
    ladder_cmd->add_option("--floor", floor, "Smallest rung (default from config)");
    ladder_cmd->callback([&] { run = [&] { return cmd_ladder(g, topics, top, floor); }; });

    TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "Train and evaluate one model per (period, rung, seed)");
    train_cmd->add_option("--topic", ta.topics, "Topics (default: all)");
    train_cmd->add_option("--periods", ta.periods, "Period range, e.g. 2012-10..2013-10");
    train_cmd->add_option("--backend", ta.backend, "Backend")->check(CLI::IsMember({"ngram", "external"}))
        ->capture_default_str();
    train_cmd->add_option("--jobs,-j", ta.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    train_cmd->add_option("--seeds", ta.seeds, "Training seeds (default: --seed)")->delimiter(',');
    train_cmd->callback([&] { run = [&] { return cmd_train(g, ta); }; });

    auto* curves_cmd = app.add_subcommand("curves", "Fit native learning curves from the manifest");
    curves_cmd->callback([&] { run = [&] { return cmd_curves(g); }; });

    EffArgs ea;
    auto* eff_cmd = app.add_subcommand("effectiveness", "Effective size and effectiveness series per topic");
    eff_cmd->add_option("--topic", ea.topics, "Topics (default: all)");
    eff_cmd->add_option("--reference", ea.reference, "Reference training period (default: earliest)");
    eff_cmd->add_option("--reference-size", ea.reference_size, "Reference model size (default: largest)");
    eff_cmd->callback([&] { run = [&] { return cmd_effectiveness(g, ea); }; });

    bool no_clip = false, intercept = false;
    auto* decay_cmd = app.add_subcommand("decay", "Exponential decay rate and half-life per topic");
    decay_cmd->add_option("--topic", topics, "Topics (default: all)");
    decay_cmd->add_flag("--no-clip", no_clip, "Keep effectiveness above 1 instead of clipping");
    decay_cmd->add_flag("--intercept", intercept, "Fit an intercept");
    decay_cmd->callback([&] { run = [&] { return cmd_decay(g, topics, no_clip, intercept); }; });

    auto* pair_cmd = app.add_subcommand("pairwise", "Pairwise decay-rate differences and significance bands");
    pair_cmd->add_option("--topic", topics, "Topics (default: all)");
    pair_cmd->add_flag("--no-clip", no_clip, "Keep effectiveness above 1 instead of clipping");
    pair_cmd->add_flag("--intercept", intercept, "Fit an intercept");
    pair_cmd->callback([&] { run = [&] { return cmd_pairwise(g, topics, no_clip, intercept); }; });

    auto* forms_cmd = app.add_subcommand("forms", "Exponential versus power-law decay");
    forms_cmd->add_option("--topic", topics, "Topics (default: all)");
    forms_cmd->add_flag("--no-clip", no_clip, "Keep effectiveness above 1 instead of clipping");
    forms_cmd->callback([&] { run = [&] { return cmd_forms(g, topics, no_clip); }; });

    OffloadArgs oa;
    auto* off_cmd = app.add_subcommand("offload", "Greedy off-loading of a dataset composition");
    off_cmd->add_option("--model", oa.model, "Equivalence model")
        ->check(CLI::IsMember({"pure_exponential", "drift_shift"}))
        ->capture_default_str();
    off_cmd->add_option("--mu", oa.mu, "pure_exponential decay rate")->capture_default_str();
    off_cmd->add_option("--a", oa.a, "drift_shift curve scale a")->capture_default_str();
    off_cmd->add_option("--b", oa.b, "drift_shift curve exponent b")->capture_default_str();
    off_cmd->add_option("--d-offset", oa.d_offset, "drift penalty offset")->capture_default_str();
    off_cmd->add_option("--d-scale", oa.d_scale, "drift penalty scale")->capture_default_str();
    off_cmd->add_option("--d-power", oa.d_power, "drift penalty power of age")->capture_default_str();
    off_cmd->add_option("--n", oa.n, "Dataset size")->capture_default_str();
    off_cmd->add_option("--window", oa.window, "Sampling window in years")->capture_default_str();
    off_cmd->add_option("--bins", oa.bins, "Equal-mass bins (ignored with --masses)")->capture_default_str();
    off_cmd->add_option("--masses", oa.masses, "Bin masses, youngest first")->delimiter(',');
    off_cmd->add_option("--out,-o", oa.out, "Also write the trajectory CSV here");
    off_cmd->callback([&] { run = [&] { return cmd_offload(g, oa); }; });

    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "All tables, series CSVs and SVG charts");
    report_cmd->add_option("--out,-o", report_out, "Output directory (default: <work>/report)");
    report_cmd->add_flag("--no-clip", no_clip, "Keep effectiveness above 1 instead of clipping");
    report_cmd->callback([&] { run = [&] { return cmd_report(g, report_out, no_clip); }; });

    BackendArgs ba;
    auto* backend_cmd = app.add_subcommand("ngram-backend", "");  // hidden: empty description
    backend_cmd->group("");
    backend_cmd->add_option("--train", ba.train)->required();
    backend_cmd->add_option("--dev", ba.dev)->required();
    backend_cmd->add_option("--test", ba.tests)->required();
    backend_cmd->add_option("--out", ba.out)->required();
    backend_cmd->add_option("--seed", ba.seed);
    backend_cmd->add_option("--config", ba.config)->required();
    backend_cmd->callback([&] { run = [&] { return cmd_ngram_backend(ba); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        return run();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.exit_code());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::kData);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(ExitCode::kData);
    }
}
