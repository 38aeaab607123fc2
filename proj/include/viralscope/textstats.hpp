#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <viralscope/ingest.hpp>
#include <viralscope/partition.hpp>

namespace viralscope {

struct TokenizerOptions {
    bool stem = false; // strip plural suffixes ("kids" -> "kid")
};

/// Lowercases, drops scheme-prefixed URLs, and splits into maximal runs of
/// word characters. A '#' or '@' directly before a run stays on the token.
std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {});

/// Plural stripper: -ies -> -y, -es -> -e, -s -> "" with the usual exceptions.
std::string stem_plural(const std::string& token);

struct WordDiffRow {
    std::string token;
    std::size_t n_self = 0;  // tweets of this side containing the token
    std::size_t n_other = 0; // tweets of the other side containing it
    long long diff = 0;      // n_self - n_other
    bool operator==(const WordDiffRow&) const = default;
};

struct WordDiffTables {
    std::vector<WordDiffRow> a; // ranked for side A
    std::vector<WordDiffRow> b; // ranked for side B
};

/// Each token counts at most once per tweet. Rows are ranked by diff
/// descending, ties by token ascending, then cut to top_k (0 keeps all).
WordDiffTables word_diff_table(const std::vector<std::string>& group_a_texts,
                               const std::vector<std::string>& group_b_texts, std::size_t top_k = 30,
                               const TokenizerOptions& options = {});

/// "token,n_self,n_other,diff"
void write_word_csv(std::ostream& out, const std::vector<WordDiffRow>& rows);

struct SpreadCount {
    std::string tweet_id;
    std::size_t retweeters_activist = 0;
    std::size_t retweeters_skeptic = 0;
};

struct SpreadSummary {
    std::size_t tweets = 0;
    std::size_t threshold = 10;
    std::size_t cross_spreading = 0; // tweets with more than `threshold` retweeters in both groups
};

struct SpreadResult {
    std::vector<SpreadCount> counts; // sorted by tweet_id
    SpreadSummary summary;
};

/// Per-cascade retweeter counts in each group. Cascades without any
/// classified retweeter are omitted.
SpreadResult cross_group_counts(const std::vector<Cascade>& cascades,
                                const PartitionAssignment& assignment, const GroupNames& names,
                                std::size_t threshold = 10);

/// "tweet_id,retweeters_activist,retweeters_skeptic"
void write_spread_csv(std::ostream& out, const std::vector<SpreadCount>& counts);

} // namespace viralscope
