#include "perish/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "perish/error.hpp"
#include "perish/rng.hpp"
#include "perish/text.hpp"

namespace perish {
namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    Int value{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (s.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

// "Title (6): rest" -> ("6", "rest"); returns false when `line` does not open
// with `label (`.
bool split_scored_line(std::string_view line, std::string_view label, std::string_view& score,
                       std::string_view& rest) {
    if (!starts_with(line, label)) return false;
    auto tail = line.substr(label.size());
    if (!starts_with(tail, " (")) return false;
    const auto close = tail.find("):");
    if (close == std::string_view::npos) return false;
    score = tail.substr(2, close - 2);
    rest = tail.substr(close + 2);
    return true;
}

struct PendingItem {
    std::string score_token;
    std::string body;
};

struct PendingRecord {
    std::string topic;
    std::optional<std::int64_t> ts;
    std::string id;
    std::size_t line = 0;
    std::optional<PendingItem> title;
    std::vector<PendingItem> comments;
};

void append_text(std::string& body, std::string_view more) {
    if (!body.empty()) body.push_back(' ');
    body.append(more);
}

}  // namespace

std::vector<Document> parse_flat_corpus(std::istream& in, ParseStats* stats) {
    ParseStats local;
    ParseStats& st = stats ? *stats : local;
    std::vector<Document> docs;
    std::optional<PendingRecord> rec;
    enum class Where { kTitle, kText, kComment } where = Where::kTitle;

    auto flush = [&]() {
        if (!rec) return;
        ++st.records;
        if (!rec->title && rec->comments.empty()) {
            ++st.skipped_empty;
            st.warnings.push_back("record " + rec->id + " (line " + std::to_string(rec->line) +
                                  "): no Title line");
            rec.reset();
            return;
        }
        std::vector<int> scores;
        bool ok = true;
        auto check = [&](const PendingItem& item) {
            auto v = parse_int<int>(item.score_token);
            if (!v) ok = false;
            scores.push_back(v.value_or(0));
        };
        // a title-less record carries comments whose post was filtered away
        if (rec->title) {
            check(*rec->title);
        } else {
            scores.push_back(0);
        }
        for (const auto& c : rec->comments) check(c);
        if (!ok) {
            ++st.skipped_bad_score;
            st.warnings.push_back("record " + rec->id + " (line " + std::to_string(rec->line) +
                                  "): malformed score, record skipped");
            rec.reset();
            return;
        }
        auto emit = [&](const PendingItem& item, int score, DocKind kind, std::string id,
                        std::optional<std::string> parent) {
            auto text = normalize_whitespace(item.body);
            if (text.empty()) {
                ++st.skipped_empty;
                return;
            }
            docs.push_back(Document{rec->topic, *rec->ts, kind, score, std::move(text), std::move(id),
                                    std::move(parent)});
        };
        if (rec->title) emit(*rec->title, scores[0], DocKind::kPost, rec->id, std::nullopt);
        for (std::size_t k = 0; k < rec->comments.size(); ++k) {
            emit(rec->comments[k], scores[k + 1], DocKind::kComment,
                 rec->id + "#c" + std::to_string(k), rec->id);
        }
        rec.reset();
    };

    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line(raw);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        if (starts_with(line, "###")) {
            flush();
            PendingRecord next;
            next.line = lineno;
            std::istringstream fields{std::string(line.substr(3))};
            std::string field;
            while (fields >> field) {
                const auto eq = field.find('=');
                if (eq == std::string::npos) continue;
                const auto key = field.substr(0, eq);
                const auto value = field.substr(eq + 1);
                if (key == "topic") {
                    next.topic = value;
                } else if (key == "ts") {
                    next.ts = parse_int<std::int64_t>(value);
                    if (!next.ts) {
                        throw DataError("line " + std::to_string(lineno) + ": bad timestamp '" + value + "'");
                    }
                } else if (key == "id") {
                    next.id = value;
                }
            }
            if (!next.ts) throw DataError("line " + std::to_string(lineno) + ": record header without ts=");
            if (next.topic.empty()) {
                throw DataError("line " + std::to_string(lineno) + ": record header without topic=");
            }
            if (next.id.empty()) next.id = "rec" + std::to_string(st.records + 1);
            rec = std::move(next);
            where = Where::kTitle;
            continue;
        }

        std::string_view score, rest;
        if (split_scored_line(line, "Title", score, rest)) {
            if (!rec) {
                throw DataError("line " + std::to_string(lineno) +
                                ": Title without a record header (timestamp missing)");
            }
            if (rec->title) {
                // A second title in one record: treat it as a new anonymous record.
                PendingRecord next{rec->topic, rec->ts, rec->id + "+", lineno, {}, {}};
                flush();
                rec = std::move(next);
            }
            rec->title = PendingItem{std::string(score), std::string(rest)};
            where = Where::kTitle;
            continue;
        }
        if (split_scored_line(line, "Comment", score, rest)) {
            if (!rec) {
                throw DataError("line " + std::to_string(lineno) +
                                ": Comment without a record header (timestamp missing)");
            }
            rec->comments.push_back(PendingItem{std::string(score), std::string(rest)});
            where = Where::kComment;
            continue;
        }
        if (starts_with(line, "Text:") && rec && where == Where::kTitle && rec->title) {
            append_text(rec->title->body, line.substr(5));
            where = Where::kText;
            continue;
        }
        if (normalize_whitespace(line).empty()) continue;
        if (!rec) {
            throw DataError("line " + std::to_string(lineno) + ": text outside any record");
        }
        if (where == Where::kComment && !rec->comments.empty()) {
            append_text(rec->comments.back().body, line);
        } else if (rec->title) {
            append_text(rec->title->body, line);
        }
    }
    flush();
    return docs;
}

void write_flat_corpus(std::ostream& out, std::span<const Document> docs) {
    std::string open_record;
    for (const auto& d : docs) {
        if (d.kind == DocKind::kPost) {
            out << "### topic=" << d.topic << " ts=" << d.timestamp << " id=" << d.id << '\n';
            out << "Title (" << d.score << "): " << d.text << '\n';
            open_record = d.id;
            continue;
        }
        const std::string parent = d.parent_id.value_or(d.id);
        if (parent != open_record) {
            // the post itself was dropped; keep its comments under a bare header
            out << "### topic=" << d.topic << " ts=" << d.timestamp << " id=" << parent << '\n';
            open_record = parent;
        }
        out << "Comment (" << d.score << "): " << d.text << '\n';
    }
}

std::vector<Document> filter_min_score(std::span<const Document> docs, int min_score) {
    std::vector<Document> kept;
    kept.reserve(docs.size());
    std::copy_if(docs.begin(), docs.end(), std::back_inserter(kept),
                 [&](const Document& d) { return d.score >= min_score; });
    return kept;
}

std::map<std::string, std::vector<Document>> group_by_topic(std::span<const Document> docs) {
    std::map<std::string, std::vector<Document>> out;
    for (const auto& d : docs) out[d.topic].push_back(d);
    return out;
}

// ---------------------------------------------------------------------------

PeriodId PeriodId::of(std::int64_t timestamp, Granularity g) {
    using namespace std::chrono;
    const sys_seconds t{seconds{timestamp}};
    const year_month_day ymd{floor<days>(t)};
    PeriodId p{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
    if (g == Granularity::kYear) p.month = 0;
    return p;
}

PeriodId PeriodId::parse(std::string_view text) {
    auto fail = [&]() { return DataError("bad period id '" + std::string(text) + "' (want YYYY-MM or YYYY)"); };
    const auto dash = text.find('-');
    const auto year = parse_int<int>(text.substr(0, dash));
    if (!year) throw fail();
    if (dash == std::string_view::npos) return PeriodId{*year, 0};
    const auto month = parse_int<int>(text.substr(dash + 1));
    if (!month || *month < 1 || *month > 12) throw fail();
    return PeriodId{*year, *month};
}

std::string PeriodId::to_string() const {
    char buf[16];
    if (month == 0) {
        std::snprintf(buf, sizeof buf, "%04d", year);
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    }
    return buf;
}

int PeriodId::months_until(const PeriodId& other) const {
    const int m0 = month == 0 ? 1 : month;
    const int m1 = other.month == 0 ? 1 : other.month;
    return (other.year - year) * 12 + (m1 - m0);
}

PeriodId PeriodId::plus_months(int months) const {
    if (month == 0) return PeriodId{year + months / 12, 0};
    const int idx = year * 12 + (month - 1) + months;
    return PeriodId{idx / 12, idx % 12 + 1};
}

std::int64_t PeriodId::start_timestamp() const {
    using namespace std::chrono;
    const auto d = sys_days{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month == 0 ? 1 : month)} / 1};
    return duration_cast<seconds>(d.time_since_epoch()).count();
}

std::int64_t PeriodId::end_timestamp() const {
    return plus_months(month == 0 ? 12 : 1).start_timestamp();
}

std::vector<PeriodId> parse_period_range(std::string_view text) {
    const auto dots = text.find("..");
    if (dots == std::string_view::npos) return {PeriodId::parse(text)};
    const auto first = PeriodId::parse(text.substr(0, dots));
    const auto last = PeriodId::parse(text.substr(dots + 2));
    if (first.granularity() != last.granularity() || last < first) {
        throw DataError("bad period range '" + std::string(text) + "'");
    }
    std::vector<PeriodId> out;
    const int step = first.month == 0 ? 12 : 1;
    for (auto p = first; p <= last; p = p.plus_months(step)) out.push_back(p);
    return out;
}

std::map<PeriodId, PeriodBucket> slice_periods(std::span<const Document> docs, Granularity granularity,
                                               std::size_t min_words) {
    std::map<PeriodId, PeriodBucket> out;
    for (const auto& d : docs) {
        auto& bucket = out[PeriodId::of(d.timestamp, granularity)];
        bucket.docs.push_back(d);
        bucket.word_count += word_count(d.text);
    }
    for (auto& [_, bucket] : out) bucket.insufficient = bucket.word_count < min_words;
    return out;
}

// ---------------------------------------------------------------------------

PeriodSlice make_splits(const std::string& topic, const PeriodId& period, std::span<const Document> docs,
                        const SplitConfig& cfg) {
    struct Unit {
        std::string id;
        TokenSeq tokens;
    };
    std::vector<Unit> units;
    std::unordered_map<std::string, std::size_t> index;
    std::size_t total = 0;
    for (const auto& d : docs) {
        auto [it, inserted] = index.try_emplace(d.unit_id(), units.size());
        if (inserted) units.push_back(Unit{d.unit_id(), {}});
        auto words = tokenize(d.text);
        total += words.size();
        auto& dst = units[it->second].tokens;
        dst.insert(dst.end(), std::make_move_iterator(words.begin()), std::make_move_iterator(words.end()));
    }
    const std::size_t needed = cfg.dev_min + cfg.test_min + cfg.train_min;
    if (total < needed) {
        throw DataError("period " + period.to_string() + " of topic '" + topic + "' has " +
                        std::to_string(total) + " words; splits need " + std::to_string(needed));
    }

    Rng rng(cfg.seed);
    rng.shuffle(std::span<Unit>(units));

    PeriodSlice slice;
    slice.topic = topic;
    slice.period = period;
    slice.seed = cfg.seed;
    for (auto& u : units) {
        TokenSeq* dst;
        std::vector<std::string>* ids;
        if (slice.dev.size() < cfg.dev_min) {
            dst = &slice.dev;
            ids = &slice.dev_units;
        } else if (slice.test.size() < cfg.test_min) {
            dst = &slice.test;
            ids = &slice.test_units;
        } else {
            dst = &slice.train_full;
            ids = &slice.train_units;
        }
        dst->insert(dst->end(), std::make_move_iterator(u.tokens.begin()), std::make_move_iterator(u.tokens.end()));
        ids->push_back(u.id);
    }
    if (slice.train_full.size() < cfg.train_min) {
        throw DataError("period " + period.to_string() + " of topic '" + topic + "': only " +
                        std::to_string(slice.train_full.size()) + " training words remain after dev/test, need " +
                        std::to_string(cfg.train_min));
    }
    return slice;
}

SubsetLadder build_subset_ladder(const PeriodId& period, std::size_t train_words, std::size_t top_size,
                                 std::size_t floor_size) {
    if (floor_size == 0 || top_size < floor_size) {
        throw DataError("ladder needs 0 < floor <= top (got top " + std::to_string(top_size) + ", floor " +
                        std::to_string(floor_size) + ")");
    }
    if (train_words < top_size) {
        throw DataError("period " + period.to_string() + ": training set has " + std::to_string(train_words) +
                        " words, ladder top needs " + std::to_string(top_size));
    }
    SubsetLadder ladder{period, {top_size}};
    while (ladder.sizes.back() > floor_size) {
        ladder.sizes.push_back((ladder.sizes.back() + 1) / 2);
    }
    if (ladder.sizes.back() != floor_size) {
        throw DataError("ladder top " + std::to_string(top_size) + " does not halve down to floor " +
                        std::to_string(floor_size));
    }
    return ladder;
}

// ---------------------------------------------------------------------------

std::filesystem::path slice_dir(const std::filesystem::path& root, const std::string& topic,
                                const PeriodId& period) {
    return root / file_stem(topic) / period.to_string();
}

std::string file_stem(std::string_view topic) {
    std::string out;
    for (char c : topic) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    if (out.empty() || out.front() == '.') out.insert(0, "_");
    return out;
}

namespace {

void write_tokens(const std::filesystem::path& file, const TokenSeq& tokens) {
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    constexpr std::size_t kPerLine = 32;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out << tokens[i] << ((i + 1) % kPerLine == 0 || i + 1 == tokens.size() ? '\n' : ' ');
    }
}

}  // namespace

void write_slice(const std::filesystem::path& dir, const PeriodSlice& slice,
                 const std::optional<SubsetLadder>& ladder, const std::string& config_hash) {
    std::filesystem::create_directories(dir);
    write_tokens(dir / "train.txt", slice.train_full);
    write_tokens(dir / "dev.txt", slice.dev);
    write_tokens(dir / "test.txt", slice.test);
    nlohmann::json j;
    j["topic"] = slice.topic;
    j["period"] = slice.period.to_string();
    j["seed"] = slice.seed;
    j["config_hash"] = config_hash;
    j["counts"] = {{"train", slice.train_full.size()},
                   {"dev", slice.dev.size()},
                   {"test", slice.test.size()},
                   {"train_units", slice.train_units.size()},
                   {"dev_units", slice.dev_units.size()},
                   {"test_units", slice.test_units.size()}};
    if (ladder) {
        j["ladder"] = ladder->sizes;
    } else {
        j["ladder"] = nullptr;
    }
    std::ofstream out(dir / "slice.json");
    out << j.dump(2) << '\n';
}

void set_slice_ladder(const SliceInfo& info, const SubsetLadder& ladder, const std::string& config_hash) {
    nlohmann::json j = info.manifest;
    j["ladder"] = ladder.sizes;
    j["ladder_config_hash"] = config_hash;
    std::ofstream out(info.dir / "slice.json");
    if (!out) throw DataError("cannot write " + (info.dir / "slice.json").string());
    out << j.dump(2) << '\n';
}

TokenSeq read_tokens(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot read " + file.string());
    TokenSeq tokens;
    std::string word;
    while (in >> word) tokens.push_back(std::move(word));
    return tokens;
}

SliceInfo read_slice_info(const std::filesystem::path& dir) {
    std::ifstream in(dir / "slice.json");
    if (!in) throw DataError("missing " + (dir / "slice.json").string() + " (run `perish slice` first)");
    SliceInfo info;
    info.dir = dir;
    try {
        in >> info.manifest;
        info.topic = info.manifest.at("topic").get<std::string>();
        info.period = PeriodId::parse(info.manifest.at("period").get<std::string>());
        const auto& counts = info.manifest.at("counts");
        info.train_words = counts.at("train").get<std::size_t>();
        info.dev_words = counts.at("dev").get<std::size_t>();
        info.test_words = counts.at("test").get<std::size_t>();
        if (const auto& l = info.manifest.at("ladder"); !l.is_null()) {
            info.ladder = SubsetLadder{info.period, l.get<std::vector<std::size_t>>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed " + (dir / "slice.json").string() + ": " + e.what());
    }
    return info;
}

std::vector<SliceInfo> list_slices(const std::filesystem::path& root) {
    std::vector<SliceInfo> out;
    if (!std::filesystem::is_directory(root)) return out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == "slice.json") {
            out.push_back(read_slice_info(entry.path().parent_path()));
        }
    }
    std::sort(out.begin(), out.end(), [](const SliceInfo& a, const SliceInfo& b) {
        return std::tie(a.topic, a.period) < std::tie(b.topic, b.period);
    });
    return out;
}

}  // namespace perish
