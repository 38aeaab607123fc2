#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <viralscope/exposure.hpp>
#include <viralscope/ingest.hpp>

namespace viralscope {

struct UserActivity {
    std::int64_t raw = 0;     // tweets + retweets in the collection window
    double normalized = 0.0;  // raw / max raw
};

struct ActivityTable {
    std::map<std::string, UserActivity, std::less<>> users;
    std::int64_t max_raw = 0;
    bool raw_mode = false; // alpha() returns raw counts instead of normalized values

    /// Activity used as the per-user factor; 0 for unknown users.
    double alpha(std::string_view user) const;
};

/// Counts every record (originals, replies and retweets) per author.
ActivityTable compute_activities(const std::vector<TweetRecord>& all_records, bool raw_mode = false);

void write_activities_csv(std::ostream& out, const ActivityTable& table);
ActivityTable read_activities_csv(const std::string& path, bool raw_mode = false);

enum class Boundary { interior, upper_boundary, zero_successes };

const char* to_string(Boundary b);
Boundary boundary_from_string(std::string_view s);

/// Log-likelihood of the cascade: |S| ln r + sum_S ln a_u + sum_F ln(1 - a_w r).
double cascade_log_likelihood(double r, std::span<const double> success_alpha,
                              std::span<const double> failure_alpha);

/// d/dr of the log-likelihood: |S|/r - sum_F a_w / (1 - a_w r).
double cascade_score(double r, std::size_t successes, std::span<const double> failure_alpha);

/// Second derivative: -|S|/r^2 - sum_F a_w^2 / (1 - a_w r)^2.
double cascade_curvature(double r, std::size_t successes, std::span<const double> failure_alpha);

struct MleSolution {
    double r_hat = 0.0; // NaN when boundary == zero_successes
    double r_max = 0.0; // 1 / max activity over all trials
    Boundary boundary = Boundary::interior;
    int iterations = 0;
};

/// Maximises the cascade likelihood over (0, r_max]. The score is strictly
/// decreasing, so the interior optimum is its unique root, found by
/// bisection to full double precision (at most 200 halvings). When the score
/// is still nonnegative at r_max the estimate is r_max (upper_boundary).
/// All activities must be positive.
MleSolution solve_virality(std::span<const double> success_alpha,
                           std::span<const double> failure_alpha);

struct ViralityEstimate {
    std::string tweet_id;
    int group = 0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    std::size_t exposed = 0;
    double r_hat = 0.0;
    double ln_r = 0.0;
    double r_max = 0.0;
    Boundary boundary = Boundary::interior;
    std::size_t zero_activity = 0; // trial users dropped for lacking activity
};

/// Trial users with zero activity are dropped before solving.
ViralityEstimate mle_virality(const ExposureLedger& ledger, const ActivityTable& activities);

struct ScoreSkip {
    std::string tweet_id;
    std::string reason;
};

struct ScoreTable {
    std::vector<ViralityEstimate> estimates; // sorted by tweet_id
    std::vector<ScoreSkip> skipped;          // sorted by tweet_id
    std::vector<ExposureLedger> ledgers;     // sorted by tweet_id; scored cascades only
};

/// Scores pre-built ledgers; zero-success ledgers become skip entries.
ScoreTable score_ledgers(const std::vector<ExposureLedger>& ledgers,
                         const ActivityTable& activities, int workers = 1);

/// Picks each cascade's main group, builds its ledger and scores it.
/// Cascades without classified retweeters are reported as skips.
ScoreTable score_corpus(const std::vector<Cascade>& cascades, const PartitionAssignment& assignment,
                        const FollowerNetwork& follow, const ActivityTable& activities,
                        const ExposureOptions& options = {}, int workers = 1);

/// "tweet_id,group,successes,failures,exposed,r_hat,ln_r,boundary"
void write_virality_csv(std::ostream& out, const std::vector<ViralityEstimate>& estimates);
std::vector<ViralityEstimate> read_virality_csv(const std::string& path);

} // namespace viralscope
