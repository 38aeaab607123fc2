#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <viralscope/graph.hpp>
#include <viralscope/ingest.hpp>
#include <viralscope/partition.hpp>

namespace viralscope {

/// A cascade none of whose retweeters belong to either group.
class UnscorableCascade : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GroupScope {
    const PartitionAssignment* assignment = nullptr;
    int main_group = 0;
};

struct MainGroupChoice {
    int group = 0;
    bool fallback = false; // tie with an unclassified author: group 0 by convention
    std::array<std::size_t, 2> retweeters{0, 0};
};

/// Group holding strictly more classified retweeters; ties go to the origin
/// author's group, or to group 0 (flagged) when the author is unclassified.
/// Throws UnscorableCascade when no retweeter is classified.
MainGroupChoice main_group(const Cascade& cascade, const PartitionAssignment& assignment);

enum LedgerFlag : unsigned {
    kStubOrigin = 1u << 0,
    kTimestampInversion = 1u << 1,
    kGroupFallback = 1u << 2,
    kUnexposedIncluded = 1u << 3,
    kAuthorOutsideGroup = 1u << 4,
};

std::string flag_string(unsigned flags);

struct Exposure {
    std::string user;
    std::string via; // origin author or the retweeter whose post reached the user; empty if none
    bool operator==(const Exposure&) const = default;
};

/// Bernoulli trials of one tweet inside its main group. Every id list is sorted.
struct ExposureLedger {
    std::string tweet_id;
    std::string origin_author;
    int group = 0;
    std::vector<std::string> exposed;   // successes + failures
    std::vector<std::string> successes;
    std::vector<std::string> failures;
    std::vector<std::string> unexposed_successes; // main-group retweeters with no prior pathway
    std::vector<Exposure> attribution;            // one per exposed user, sorted by user
    unsigned flags = 0;
};

struct ExposureOptions {
    bool include_unexposed_retweeters = false;
};

/// Per follower-network node: its group, or -1 if unclassified.
std::vector<int> node_groups(const FollowerNetwork& follow, const PartitionAssignment& assignment);

/// Exposure under the two timeline rules. A main-group user other than the
/// author is exposed once: by the origin if they follow the author, else by
/// the earliest main-group retweeter they follow. A retweeter counts as a
/// success only if that exposure precedes their own retweet. Users outside
/// the main group, and their follow edges, play no part; the author is always
/// a source.
ExposureLedger build_exposure_ledger(const Cascade& cascade, const FollowerNetwork& follow,
                                     std::span<const int> node_group, int main_group,
                                     const ExposureOptions& options = {});

ExposureLedger build_exposure_ledger(const Cascade& cascade, const FollowerNetwork& follow,
                                     const GroupScope& scope, const ExposureOptions& options = {});

/// "tweet_id,exposed,successes,failures,unexposed_successes,flags"
void write_ledger_csv(std::ostream& out, const std::vector<ExposureLedger>& ledgers);

} // namespace viralscope
