#pragma once

#include <algorithm>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace viralscope {

/// One line of tweets.jsonl: an original tweet, a reply, or a retweet.
struct TweetRecord {
    std::string tweet_id;
    std::string user_id;
    std::int64_t timestamp = 0;
    std::string text;
    std::optional<std::string> retweet_of;
    std::optional<std::string> reply_to;
    std::optional<std::string> lang;

    bool is_retweet() const { return retweet_of.has_value(); }
    bool operator==(const TweetRecord&) const = default;
};

struct ParseReport {
    std::size_t lines = 0;      // non-blank lines seen
    std::size_t records = 0;    // records returned
    std::size_t malformed = 0;  // bad JSON, wrong types, or violated invariants
    std::size_t duplicates = 0; // later occurrences of an already-seen tweet_id
};

struct ParsedRecords {
    std::vector<TweetRecord> records; // input order, first occurrence wins
    ParseReport report;
};

/// Parses one JSON object. Returns nullopt if the line is malformed.
std::optional<TweetRecord> parse_record_line(const std::string& line);

ParsedRecords parse_records(std::istream& in, int workers = 1);

/// Throws InputError if the file cannot be opened.
ParsedRecords parse_records(const std::string& path, int workers = 1);

std::string record_to_json(const TweetRecord& r);
void write_records(std::ostream& out, const std::vector<TweetRecord>& records);

struct HashtagPair {
    std::string base;
    std::string qualifier;
};

struct CorpusFilter {
    std::string substring = "climate";
    std::set<std::string> lang_allow = {"en"}; // empty set allows every language
    bool exclude_replies = true;
    std::vector<HashtagPair> seed_hashtag_pairs = {{"climate", "crisis"}, {"climate", "hoax"}};

    /// Throws InputError on an empty substring or non-lowercase seed pairs.
    void validate() const;
};

struct FilterResult {
    std::vector<TweetRecord> topical;
    std::set<std::string> eligible_users;
    /// Per seed pair (same order as the filter), the users who matched it.
    std::vector<std::set<std::string>> users_by_pair;
};

/// True if any single hashtag of `text` contains both stems, case-insensitively.
bool hashtag_matches_pair(const std::string& text, const HashtagPair& pair);

FilterResult filter_corpus(const std::vector<TweetRecord>& records, const CorpusFilter& filter);

/// An origin tweet with its retweets in cascade order.
struct Cascade {
    TweetRecord origin;
    /// Sorted by (max(timestamp, origin.timestamp), tweet_id); one entry per user.
    std::vector<TweetRecord> retweets;
    bool stub_origin = false;         // origin record absent; id known from retweet_of
    bool timestamp_inversion = false; // some retweet predates its origin

    /// Effective cascade time of a retweet: clamped to not precede the origin.
    std::int64_t effective_time(const TweetRecord& rt) const
    {
        return std::max(rt.timestamp, origin.timestamp);
    }
};

struct CascadeReport {
    std::size_t cascades = 0;
    std::size_t stub_origins = 0;
    std::size_t collapsed_repeats = 0;  // repeated retweets by one user
    std::size_t self_retweets = 0;      // origin author retweeting their own tweet
    std::size_t unresolvable = 0;       // retweet chains that loop
    std::size_t inversions = 0;         // retweets earlier than their origin
};

struct CascadeSet {
    std::vector<Cascade> cascades; // sorted by origin tweet_id
    CascadeReport report;
};

CascadeSet build_cascades(const std::vector<TweetRecord>& records);

} // namespace viralscope
