#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace perish {

enum class DocKind { kPost, kComment };

struct Document {
    std::string topic;
    std::int64_t timestamp = 0;  // UTC seconds
    DocKind kind = DocKind::kPost;
    int score = 0;
    std::string text;  // whitespace-normalized
    std::string id;
    std::optional<std::string> parent_id;  // set on comments

    // Split unit: a post and its comments share this key.
    const std::string& unit_id() const { return parent_id ? *parent_id : id; }
};

struct ParseStats {
    std::size_t records = 0;
    std::size_t skipped_bad_score = 0;
    std::size_t skipped_empty = 0;
    std::vector<std::string> warnings;
};

// Reads the flat corpus format:
//
//   ### topic=<name> ts=<unix-seconds> id=<post-id>
//   Title (6): What was the biggest scandal in your school?
//   Text:
//   optional body, any number of lines
//   Comment (4): Vampires. This was almost 6 years ago now at my
//   high school, but vampires.
//
// One Document per post and per comment; comments inherit the record's
// timestamp and topic. A record with comments but no Title line yields just
// the comments. A non-integer score skips the whole record and counts a
// warning. A record without a usable header throws DataError.
std::vector<Document> parse_flat_corpus(std::istream& in, ParseStats* stats = nullptr);

// Inverse of parse_flat_corpus. Comments are written under their parent post;
// documents must be grouped post-first as parse_flat_corpus produces them.
// Comments whose post is absent (filtered out) get a header without a Title
// line. Comment ids are renumbered on the way back in; parents are kept.
void write_flat_corpus(std::ostream& out, std::span<const Document> docs);

// Keeps items with score >= min_score, in order. Posts and comments are
// filtered independently.
std::vector<Document> filter_min_score(std::span<const Document> docs, int min_score = 2);

std::map<std::string, std::vector<Document>> group_by_topic(std::span<const Document> docs);

// ---------------------------------------------------------------------------
// Calendar periods

enum class Granularity { kMonth, kYear };

// A calendar month ("2012-10") or year ("2012", month == 0).
struct PeriodId {
    int year = 1970;
    int month = 0;

    static PeriodId of(std::int64_t timestamp, Granularity g = Granularity::kMonth);
    static PeriodId parse(std::string_view text);

    std::string to_string() const;
    Granularity granularity() const { return month == 0 ? Granularity::kYear : Granularity::kMonth; }

    // Signed number of months from `this` to `other` (other - this).
    int months_until(const PeriodId& other) const;
    PeriodId plus_months(int months) const;
    std::int64_t start_timestamp() const;
    std::int64_t end_timestamp() const;  // exclusive

    auto operator<=>(const PeriodId&) const = default;
};

// Inclusive range "2012-10..2013-10" (or a single period).
std::vector<PeriodId> parse_period_range(std::string_view text);

struct PeriodBucket {
    std::vector<Document> docs;
    std::size_t word_count = 0;
    bool insufficient = false;
};

std::map<PeriodId, PeriodBucket> slice_periods(std::span<const Document> docs,
                                               Granularity granularity,
                                               std::size_t min_words);

// ---------------------------------------------------------------------------
// Splits and subset ladder

using TokenSeq = std::vector<std::string>;

struct SplitConfig {
    std::size_t dev_min = 20'000;
    std::size_t test_min = 20'000;
    std::size_t train_min = 5'000;  // smallest ladder rung
    std::uint64_t seed = 0;
};

struct PeriodSlice {
    std::string topic;
    PeriodId period;
    TokenSeq train_full;
    TokenSeq dev;
    TokenSeq test;
    std::vector<std::string> train_units;
    std::vector<std::string> dev_units;
    std::vector<std::string> test_units;
    std::uint64_t seed = 0;
};

// Posts (with their comments) are shuffled under `seed` and dealt to dev until
// it holds dev_min words, then to test, the rest to train. Throws DataError
// naming the period when the words do not cover dev_min + test_min +
// train_min.
PeriodSlice make_splits(const std::string& topic, const PeriodId& period,
                        std::span<const Document> docs, const SplitConfig& cfg);

struct SubsetLadder {
    PeriodId period;
    std::vector<std::size_t> sizes;  // descending; sizes[k+1] = ceil(sizes[k] / 2)

    // Rung k is the first sizes[k] words of the full training sequence.
    std::span<const std::string> rung(std::span<const std::string> train_full, std::size_t k) const {
        return train_full.first(sizes.at(k));
    }
};

// Halves from top_size down to floor_size. Requires that repeated halving
// (odd counts round up) lands exactly on floor_size, and that train_full holds
// at least top_size words.
SubsetLadder build_subset_ladder(const PeriodId& period, std::size_t train_words,
                                 std::size_t top_size, std::size_t floor_size);

// ---------------------------------------------------------------------------
// On-disk slice directory: train.txt, dev.txt, test.txt, slice.json.

// Topic name made safe for a file or directory name.
std::string file_stem(std::string_view topic);

std::filesystem::path slice_dir(const std::filesystem::path& root, const std::string& topic,
                                const PeriodId& period);

void write_slice(const std::filesystem::path& dir, const PeriodSlice& slice,
                 const std::optional<SubsetLadder>& ladder, const std::string& config_hash);

TokenSeq read_tokens(const std::filesystem::path& file);

struct SliceInfo {
    std::filesystem::path dir;
    std::string topic;
    PeriodId period;
    std::size_t train_words = 0;
    std::size_t dev_words = 0;
    std::size_t test_words = 0;
    std::optional<SubsetLadder> ladder;
    nlohmann::json manifest;
};

SliceInfo read_slice_info(const std::filesystem::path& dir);

// Records a ladder in an existing slice.json.
void set_slice_ladder(const SliceInfo& info, const SubsetLadder& ladder, const std::string& config_hash);

// Every slice directory below root (root/<topic>/<period>/slice.json).
std::vector<SliceInfo> list_slices(const std::filesystem::path& root);

}  // namespace perish
