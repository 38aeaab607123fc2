#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <viralscope/ingest.hpp>
#include <viralscope/lasso.hpp>
#include <viralscope/sim.hpp>

namespace viralscope {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
    std::string tweets;
    std::string edges;
    std::vector<std::string> label_sheets; // labels_<coder>.csv
    CorpusFilter filter;
    double balance_tol = 0.1;
    std::size_t min_author_tweets = 3;
    LassoConfig lasso;
    std::size_t top_k = 30;
    std::size_t threshold = 10;
    // Regression columns per group. Empty lists mean "every label feature".
    std::vector<std::string> features_common, features_activist, features_skeptic;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    int workers = 1;
    bool include_unexposed_retweeters = false;
    bool raw_activities = false;
    bool stemmer = false;
    std::optional<SimConfig> simulate;

    /// Semantic checks only; input paths are checked when a stage starts.
    void validate() const;
    /// Canonical JSON echo (worker count omitted: it never changes results).
    std::string to_json() const;
};

/// Parses a JSON config. Relative input paths are resolved against base_dir.
PipelineConfig parse_pipeline_config(const std::string& json_text, const std::string& base_dir = ".");
PipelineConfig load_pipeline_config(const std::string& path);

/// Stage names: ingest, network, partition, virality, words, spread, labels,
/// regress, simulate, run.
const std::vector<std::string>& stage_names();

/// Runs one stage (or "run" for all of them) against config.out_dir, updating
/// manifest.json. Returns the process exit code: 0 ok, 1 input error,
/// 2 numerical failure. Errors are reported on `log` and in the manifest.
int run_stage(const std::string& stage, const PipelineConfig& config, std::ostream& log);

} // namespace viralscope
