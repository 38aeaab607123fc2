#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <viralscope/graph.hpp>
#include <viralscope/ingest.hpp>
#include <viralscope/labels.hpp>
#include <viralscope/virality.hpp>

namespace viralscope {

enum class GraphKind { directed_random, planted_two_block };
enum class ActivityKind { uniform, lognormal };
enum class SeedSelection { top_decile, uniform };

struct SimLabelConfig {
    bool enabled = false;
    int coders = 3;
    double base_rate = 0.3;  // chance a feature is truly present
    double flip = 0.1;       // chance a coder mislabels a cell
    std::vector<std::string> features;
};

struct SimConfig {
    GraphKind graph_kind = GraphKind::directed_random;
    std::size_t n = 200;
    double p = 0.05;        // directed-random: P(u follows v)
    double p_in = 0.1;      // planted-two-block: within-block follow probability
    double p_out = 0.005;   // planted-two-block: cross-block follow probability
    ActivityKind activity_kind = ActivityKind::uniform;
    double activity_lo = 0.5, activity_hi = 1.0;   // uniform(lo, hi)
    double activity_mu = 0.0, activity_sigma = 0.5; // lognormal(mu, sigma)
    std::vector<double> r_values{0.1};
    std::size_t cascades_per_r = 10;
    std::uint64_t master_seed = 1;
    SeedSelection seed_selection = SeedSelection::top_decile;
    SimLabelConfig labels;

    /// Throws InputError for n < 2, probabilities outside [0, 1], or planted
    /// r outside (0, 1].
    void validate() const;
};

/// Reads the JSON simulation config (see README for the schema).
SimConfig parse_sim_config(const std::string& json_text);

struct NetworkSample {
    std::size_t n = 0;
    std::vector<std::pair<int, int>> edges; // (follower, followee)
    std::vector<int> block;                 // planted labels; all 0 for directed-random
};

/// Seeded follow graph. Degenerate probabilities (p = 0 for every edge kind
/// with n > 1 is fine; NaN or out-of-range is not) throw InputError.
NetworkSample generate_network(const SimConfig& config);

/// "u0000", "u0001", ...; zero padded so lexicographic order is numeric order.
std::vector<std::string> sim_user_ids(std::size_t n);

struct SyntheticWorld {
    std::vector<std::string> users;
    FollowerNetwork follow;
    std::vector<double> activity; // normalized to (0, 1]
    std::vector<int> block;
    std::uint64_t master_seed = 0;

    ActivityTable activity_table() const;
};

SyntheticWorld make_world(const SimConfig& config);

struct SimulatedCascade {
    std::string tweet_id;
    int seed_user = 0;
    double r = 0.0;
    std::vector<std::pair<int, int>> retweets; // (user, round), in cascade order
    std::vector<int> exposed;                  // sorted; excludes the seed user
    std::vector<int> successes;                // sorted
    std::vector<int> failures;                 // sorted
};

/// Synchronous independent cascade. Followers of the seed are exposed in
/// round 0; each exposed user draws Bernoulli(activity * r) once, and
/// activated users expose their unexposed followers in the next round. A
/// retweet made after exposure in round k carries timestamp k + 1.
SimulatedCascade simulate_cascade(const SyntheticWorld& world, int seed_user, double r,
                                  std::uint64_t cascade_seed, std::string tweet_id);

/// Seed user candidates: the top tenth by follower count, or everyone.
std::vector<int> seed_candidates(const SyntheticWorld& world, SeedSelection selection);

/// Origin and retweet records for a simulated cascade.
std::vector<TweetRecord> emit_cascade_records(const SyntheticWorld& world, const SimulatedCascade& c,
                                              std::int64_t base_timestamp, const std::string& text);

struct TruthRow {
    std::string tweet_id;
    double planted_r = 0.0;
    std::string seed_user;
};

struct SimulationOutput {
    SyntheticWorld world;
    std::vector<SimulatedCascade> cascades;
    std::vector<TweetRecord> records;
    std::vector<TruthRow> truth;
    std::vector<CoderSheet> sheets; // only when labels are enabled
};

/// Builds the world, runs cascades_per_r cascades per planted r, and emits
/// ingest-schema records. Each cascade's RNG is keyed by (master_seed, tweet_id).
SimulationOutput run_simulation(const SimConfig& config, int workers = 1);

/// Writes tweets.jsonl, edges.csv, truth.csv (and labels_<coder>.csv) into dir.
void write_simulation(const SimulationOutput& sim, const std::string& dir);

struct RecoveryRow {
    double planted_r = 0.0;
    std::size_t cascades = 0;
    std::size_t scorable = 0;
    std::size_t unscorable = 0;     // no successes
    std::size_t upper_boundary = 0;
    double median_rel_error = 0.0;
    double p90_rel_error = 0.0;
    double mean_exposed = 0.0;
};

/// Simulates cascades on the world, rebuilds their exposure ledgers from the
/// true follow graph and scores them with the world's activities.
std::vector<RecoveryRow> recovery_experiment(const SyntheticWorld& world, const std::vector<double>& r_values,
                                             std::size_t cascades_per_r, SeedSelection selection,
                                             int workers = 1);

} // namespace viralscope
