// viralscope: run the whole pipeline or a single stage.
//
//   viralscope run --config cfg.json --out results
//   viralscope virality --config cfg.json --include-unexposed-retweeters

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <viralscope/common.hpp>
#include <viralscope/pipeline.hpp>

int main(int argc, char** argv)
{
    CLI::App app{"Echo-chamber cascade analysis: cascades, partition, virality and feature regression"};
    app.set_version_flag("--version", viralscope::kVersion);

    std::string stage;
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::size_t> min_author_tweets, top_k, threshold;
    std::optional<double> balance_tol;
    std::optional<int> folds;
    bool include_unexposed = false, raw_activities = false, stemmer = false;

    app.add_option("stage", stage, "Stage to run")
        ->required()
        ->check(CLI::IsMember(viralscope::stage_names()));
    app.add_option("--config", config_path, "JSON pipeline config")->required();
    app.add_option("--out", out, "Output directory (overrides config)");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    app.add_option("--min-author-tweets", min_author_tweets, "Tweets an author needs to enter a regression");
    app.add_option("--balance-tol", balance_tol, "Partition balance tolerance")->check(CLI::Range(0.0, 0.5));
    app.add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
    app.add_option("--top-k", top_k, "Rows per word table (0 keeps all)");
    app.add_option("--threshold", threshold, "Retweeters per group for cross-spreading");
    app.add_flag("--include-unexposed-retweeters", include_unexposed,
                 "Count retweeters without a prior exposure as successes");
    app.add_flag("--raw-activities", raw_activities, "Use raw activity counts instead of normalized ones");
    app.add_flag("--stemmer", stemmer, "Strip plural suffixes in word tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    viralscope::PipelineConfig cfg;
    try {
        cfg = viralscope::load_pipeline_config(config_path);
    } catch (const viralscope::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    if (out) cfg.out_dir = *out;
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (min_author_tweets) cfg.min_author_tweets = *min_author_tweets;
    if (balance_tol) cfg.balance_tol = *balance_tol;
    if (folds) cfg.lasso.folds = *folds;
    if (top_k) cfg.top_k = *top_k;
    if (threshold) cfg.threshold = *threshold;
    cfg.include_unexposed_retweeters = cfg.include_unexposed_retweeters || include_unexposed;
    cfg.raw_activities = cfg.raw_activities || raw_activities;
    cfg.stemmer = cfg.stemmer || stemmer;

    return viralscope::run_stage(stage, cfg, std::cerr);
}
