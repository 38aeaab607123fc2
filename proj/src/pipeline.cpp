#include <viralscope/pipeline.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include <viralscope/common.hpp>
#include <viralscope/csv.hpp>
#include <viralscope/exposure.hpp>
#include <viralscope/graph.hpp>
#include <viralscope/labels.hpp>
#include <viralscope/partition.hpp>
#include <viralscope/rng.hpp>
#include <viralscope/textstats.hpp>
#include <viralscope/virality.hpp>

namespace viralscope {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const
{
    filter.validate();
    if (filter.seed_hashtag_pairs.size() != 2)
        throw InputError("config: exactly two seed hashtag pairs are needed (activist, skeptic)");
    if (!(balance_tol >= 0.0 && balance_tol <= 0.5)) throw InputError("config: balance_tol must lie in [0, 0.5]");
    if (min_author_tweets < 1) throw InputError("config: min_author_tweets must be at least 1");
    if (lasso.folds < 2) throw InputError("config: folds must be at least 2");
    if (lasso.lambda_grid < 1) throw InputError("config: lambda grid needs at least one value");
    if (!(lasso.lambda_min_ratio > 0.0 && lasso.lambda_min_ratio <= 1.0))
        throw InputError("config: lambda_min_ratio must lie in (0, 1]");
    if (workers < 1) throw InputError("config: workers must be at least 1");
    if (out_dir.empty()) throw InputError("config: output directory missing");
}

std::string PipelineConfig::to_json() const
{
    ordered_json j;
    j["inputs"] = {{"tweets", tweets}, {"edges", edges}, {"labels", label_sheets}};
    ordered_json pairs = ordered_json::array();
    for (const auto& p : filter.seed_hashtag_pairs) pairs.push_back({p.base, p.qualifier});
    j["filter"] = {{"substring", filter.substring},
                   {"lang", std::vector<std::string>(filter.lang_allow.begin(), filter.lang_allow.end())},
                   {"exclude_replies", filter.exclude_replies},
                   {"seed_pairs", pairs}};
    j["balance_tol"] = balance_tol;
    j["min_author_tweets"] = min_author_tweets;
    j["lasso"] = {{"folds", lasso.folds},
                  {"lambda_grid", lasso.lambda_grid},
                  {"lambda_min_ratio", lasso.lambda_min_ratio},
                  {"tol", lasso.tol},
                  {"kkt_tol", lasso.kkt_tol},
                  {"max_iter", lasso.max_iter},
                  {"standardize", lasso.standardize}};
    j["top_k"] = top_k;
    j["threshold"] = threshold;
    j["features"] = {{"common", features_common},
                     {"activist", features_activist},
                     {"skeptic", features_skeptic}};
    j["seed"] = seed;
    j["flags"] = {{"include_unexposed_retweeters", include_unexposed_retweeters},
                  {"raw_activities", raw_activities},
                  {"stemmer", stemmer}};
    return j.dump();
}

namespace {

std::string resolve(const std::string& base_dir, const std::string& p)
{
    if (p.empty()) return p;
    const fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base_dir) / path).lexically_normal().string();
}

} // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text, const std::string& base_dir)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw InputError("config: top level must be an object");

    PipelineConfig c;
    try {
        if (j.contains("inputs")) {
            const auto& in = j.at("inputs");
            c.tweets = resolve(base_dir, in.value("tweets", ""));
            c.edges = resolve(base_dir, in.value("edges", ""));
            if (in.contains("labels"))
                for (const auto& s : in.at("labels")) c.label_sheets.push_back(resolve(base_dir, s.get<std::string>()));
        }
        if (j.contains("filter")) {
            const auto& f = j.at("filter");
            c.filter.substring = f.value("substring", c.filter.substring);
            if (f.contains("lang")) {
                c.filter.lang_allow.clear();
                for (const auto& s : f.at("lang")) c.filter.lang_allow.insert(s.get<std::string>());
            }
            c.filter.exclude_replies = f.value("exclude_replies", c.filter.exclude_replies);
            if (f.contains("seed_pairs")) {
                c.filter.seed_hashtag_pairs.clear();
                for (const auto& p : f.at("seed_pairs")) {
                    const auto v = p.get<std::vector<std::string>>();
                    if (v.size() != 2) throw InputError("config: seed pairs are [base, qualifier]");
                    c.filter.seed_hashtag_pairs.push_back({v[0], v[1]});
                }
            }
        }
        c.balance_tol = j.value("balance_tol", c.balance_tol);
        c.min_author_tweets = j.value("min_author_tweets", c.min_author_tweets);
        if (j.contains("lasso")) {
            const auto& l = j.at("lasso");
            c.lasso.folds = l.value("folds", c.lasso.folds);
            c.lasso.lambda_grid = l.value("lambda_grid", c.lasso.lambda_grid);
            c.lasso.lambda_min_ratio = l.value("lambda_min_ratio", c.lasso.lambda_min_ratio);
            c.lasso.tol = l.value("tol", c.lasso.tol);
            c.lasso.kkt_tol = l.value("kkt_tol", c.lasso.kkt_tol);
            c.lasso.max_iter = l.value("max_iter", c.lasso.max_iter);
            c.lasso.standardize = l.value("standardize", c.lasso.standardize);
        }
        c.top_k = j.value("top_k", c.top_k);
        c.threshold = j.value("threshold", c.threshold);
        if (j.contains("features")) {
            const auto& f = j.at("features");
            if (f.contains("common")) c.features_common = f.at("common").get<std::vector<std::string>>();
            if (f.contains("activist")) c.features_activist = f.at("activist").get<std::vector<std::string>>();
            if (f.contains("skeptic")) c.features_skeptic = f.at("skeptic").get<std::vector<std::string>>();
        }
        c.out_dir = resolve(base_dir, j.value("output", c.out_dir));
        c.seed = j.value("seed", c.seed);
        c.workers = j.value("workers", c.workers);
        if (j.contains("flags")) {
            const auto& f = j.at("flags");
            c.include_unexposed_retweeters = f.value("include_unexposed_retweeters", false);
            c.raw_activities = f.value("raw_activities", false);
            c.stemmer = f.value("stemmer", false);
        }
        if (j.contains("simulate")) c.simulate = parse_sim_config(j.at("simulate").dump());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const fs::path parent = fs::path(path).parent_path();
    return parse_pipeline_config(ss.str(), parent.empty() ? "." : parent.string());
}

const std::vector<std::string>& stage_names()
{
    static const std::vector<std::string> names = {"ingest", "network", "partition", "virality", "words",
                                                   "spread", "labels",  "regress",   "simulate", "run"};
    return names;
}

// ---------------------------------------------------------------- stages

namespace {

struct Context {
    const PipelineConfig& cfg;
    fs::path out;
    ordered_json& stage; // this stage's manifest entry

    std::string path(const std::string& name) const { return (out / name).string(); }
    void write(const std::string& name, const std::string& contents) const
    {
        csv::write_file(path(name), contents);
    }
};

void require_file(const std::string& p, const std::string& what)
{
    if (p.empty()) throw InputError("missing input: " + what + " (not configured)");
    if (!fs::is_regular_file(p)) throw InputError("missing input: " + what + " (" + p + ")");
}

void require_intermediate(const Context& ctx, const std::string& name, const std::string& producer)
{
    if (!fs::is_regular_file(ctx.path(name)))
        throw InputError("missing intermediate " + name + "; run the '" + producer + "' stage first");
}

std::string pair_label(const HashtagPair& p) { return p.base + "+" + p.qualifier; }

std::vector<TweetRecord> read_topical(const Context& ctx)
{
    require_intermediate(ctx, "topical.jsonl", "ingest");
    auto parsed = parse_records(ctx.path("topical.jsonl"), ctx.cfg.workers);
    if (parsed.report.malformed || parsed.report.duplicates)
        throw InputError("topical.jsonl is corrupt");
    return std::move(parsed.records);
}

struct Eligible {
    std::set<std::string> users;
    std::set<std::string> activist_pair, skeptic_pair;
};

Eligible read_eligible(const Context& ctx)
{
    require_intermediate(ctx, "eligible_users.csv", "ingest");
    const auto t = csv::read_table(ctx.path("eligible_users.csv"));
    if (t.header.size() != 3 || t.header[0] != "user_id")
        throw InputError("eligible_users.csv: unexpected header");
    Eligible e;
    for (const auto& row : t.rows) {
        e.users.insert(row[0]);
        if (row[1] == "1") e.activist_pair.insert(row[0]);
        if (row[2] == "1") e.skeptic_pair.insert(row[0]);
    }
    return e;
}

struct LoadedPartition {
    PartitionAssignment assignment;
    GroupNames names;
};

LoadedPartition read_partition(const Context& ctx)
{
    require_intermediate(ctx, "partition.csv", "partition");
    const auto t = csv::read_table(ctx.path("partition.csv"));
    if (t.header != std::vector<std::string>{"user_id", "group", "label"})
        throw InputError("partition.csv: unexpected header");
    LoadedPartition p;
    bool named = false;
    for (const auto& row : t.rows) {
        const int g = static_cast<int>(csv::parse_int(row[1], "partition group"));
        if (g != 0 && g != 1) throw InputError("partition.csv: group must be 0 or 1");
        p.assignment.users.push_back(row[0]);
        p.assignment.group.push_back(g);
        if (!named && (row[2] == "activist" || row[2] == "skeptic")) {
            p.names.activist = row[2] == "activist" ? g : 1 - g;
            p.names.skeptic = 1 - p.names.activist;
            named = true;
        }
    }
    if (!std::is_sorted(p.assignment.users.begin(), p.assignment.users.end()))
        throw InputError("partition.csv: users must be sorted");
    const std::size_t big = std::max(p.assignment.group_size(0), p.assignment.group_size(1));
    p.assignment.balance =
        p.assignment.users.empty() ? 0.0 : static_cast<double>(big) / static_cast<double>(p.assignment.users.size());
    return p;
}

std::string group_label(const GroupNames& names, int g) { return g == names.activist ? "activist" : "skeptic"; }

void stage_ingest(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    require_file(cfg.tweets, "tweets");
    const ParsedRecords parsed = parse_records(cfg.tweets, cfg.workers);
    const FilterResult fr = filter_corpus(parsed.records, cfg.filter);

    std::ostringstream topical;
    write_records(topical, fr.topical);
    ctx.write("topical.jsonl", topical.str());

    std::ostringstream eligible;
    eligible << "user_id," << pair_label(cfg.filter.seed_hashtag_pairs[0]) << ','
             << pair_label(cfg.filter.seed_hashtag_pairs[1]) << '\n';
    for (const auto& u : fr.eligible_users)
        eligible << u << ',' << (fr.users_by_pair[0].count(u) ? 1 : 0) << ','
                 << (fr.users_by_pair[1].count(u) ? 1 : 0) << '\n';
    ctx.write("eligible_users.csv", eligible.str());

    std::ostringstream act;
    write_activities_csv(act, compute_activities(parsed.records));
    ctx.write("activities.csv", act.str());

    ctx.stage["lines"] = parsed.report.lines;
    ctx.stage["records"] = parsed.report.records;
    ctx.stage["malformed"] = parsed.report.malformed;
    ctx.stage["duplicates"] = parsed.report.duplicates;
    ctx.stage["topical"] = fr.topical.size();
    ctx.stage["eligible_users"] = fr.eligible_users.size();
}

void stage_network(Context& ctx)
{
    const auto topical = read_topical(ctx);
    const Eligible eligible = read_eligible(ctx);
    const CascadeSet cs = build_cascades(topical);
    const RetweetNetwork net = build_retweet_network(cs.cascades, eligible.users);
    const RetweetNetwork lcc = largest_component(net);

    std::ostringstream out;
    out << "user_a,user_b\n";
    for (const auto& [a, b] : lcc.edges()) out << lcc.nodes()[a] << ',' << lcc.nodes()[b] << '\n';
    ctx.write("retweet_network.csv", out.str());

    ctx.stage["cascades"] = cs.report.cascades;
    ctx.stage["stub_origins"] = cs.report.stub_origins;
    ctx.stage["collapsed_repeats"] = cs.report.collapsed_repeats;
    ctx.stage["self_retweets"] = cs.report.self_retweets;
    ctx.stage["unresolvable"] = cs.report.unresolvable;
    ctx.stage["timestamp_inversions"] = cs.report.inversions;
    ctx.stage["nodes"] = net.node_count();
    ctx.stage["edges"] = net.edge_count();
    ctx.stage["component_nodes"] = lcc.node_count();
    ctx.stage["component_edges"] = lcc.edge_count();
}

RetweetNetwork read_retweet_network(const Context& ctx)
{
    require_intermediate(ctx, "retweet_network.csv", "network");
    const auto t = csv::read_table(ctx.path("retweet_network.csv"));
    if (t.header != std::vector<std::string>{"user_a", "user_b"})
        throw InputError("retweet_network.csv: unexpected header");
    std::set<std::string> nodes;
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& row : t.rows) {
        nodes.insert(row[0]);
        nodes.insert(row[1]);
        edges.emplace_back(row[0], row[1]);
    }
    return RetweetNetwork(std::vector<std::string>(nodes.begin(), nodes.end()), edges);
}

void stage_partition(Context& ctx)
{
    const RetweetNetwork net = read_retweet_network(ctx);
    const Eligible eligible = read_eligible(ctx);
    const std::uint64_t seed = derive_seed(ctx.cfg.seed, "partition");
    const PartitionAssignment a = bisect_partition(net, ctx.cfg.balance_tol, seed);
    const GroupNames names = name_groups(a, eligible.activist_pair, eligible.skeptic_pair);

    std::ostringstream out;
    out << "user_id,group,label\n";
    for (std::size_t i = 0; i < a.users.size(); ++i)
        out << a.users[i] << ',' << a.group[i] << ',' << group_label(names, a.group[i]) << '\n';
    ctx.write("partition.csv", out.str());

    std::ostringstream dot;
    write_partition_dot(dot, net, a, names);
    ctx.write("partition.dot", dot.str());

    ctx.stage["nodes"] = a.users.size();
    ctx.stage["cut"] = a.cut_size;
    ctx.stage["balance"] = a.balance;
    ctx.stage["activist_group"] = names.activist;
    ctx.stage["activist_size"] = a.group_size(names.activist);
    ctx.stage["skeptic_size"] = a.group_size(names.skeptic);
    ctx.stage["seed"] = seed;
}

std::vector<Cascade> topical_cascades(const Context& ctx, std::set<std::string>* users = nullptr)
{
    const auto topical = read_topical(ctx);
    if (users)
        for (const auto& r : topical) users->insert(r.user_id);
    return build_cascades(topical).cascades;
}

void stage_virality(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    require_file(cfg.edges, "edges");
    std::set<std::string> universe;
    const auto cascades = topical_cascades(ctx, &universe);
    const LoadedPartition part = read_partition(ctx);
    universe.insert(part.assignment.users.begin(), part.assignment.users.end());
    const LoadedFollowerNetwork follow = build_follower_network(cfg.edges, universe);
    require_intermediate(ctx, "activities.csv", "ingest");
    const ActivityTable activities = read_activities_csv(ctx.path("activities.csv"), cfg.raw_activities);

    ExposureOptions opts;
    opts.include_unexposed_retweeters = cfg.include_unexposed_retweeters;
    const ScoreTable scores =
        score_corpus(cascades, part.assignment, follow.network, activities, opts, cfg.workers);

    std::ostringstream v;
    write_virality_csv(v, scores.estimates);
    ctx.write("virality.csv", v.str());

    std::ostringstream l;
    write_ledger_csv(l, scores.ledgers);
    ctx.write("ledger.csv", l.str());

    std::ostringstream s;
    s << "tweet_id,reason\n";
    std::map<std::string, std::size_t> reasons;
    for (const auto& skip : scores.skipped) {
        s << skip.tweet_id << ',' << skip.reason << '\n';
        ++reasons[skip.reason];
    }
    ctx.write("virality_skipped.csv", s.str());

    std::map<std::string, std::size_t> boundaries;
    for (const auto& e : scores.estimates) ++boundaries[to_string(e.boundary)];

    ctx.stage["follower_rows"] = follow.report.rows;
    ctx.stage["follower_edges_kept"] = follow.report.kept;
    ctx.stage["follower_duplicates"] = follow.report.duplicates;
    ctx.stage["follower_unknown_endpoint"] = follow.report.unknown_endpoint;
    ctx.stage["follower_self_loops"] = follow.report.self_loops;
    ctx.stage["cascades"] = cascades.size();
    ctx.stage["scored"] = scores.estimates.size();
    ctx.stage["skipped"] = reasons;
    ctx.stage["boundaries"] = boundaries;
    ctx.stage["activity_mode"] = cfg.raw_activities ? "raw" : "normalized";
}

void stage_words(Context& ctx)
{
    const auto topical = read_topical(ctx);
    const LoadedPartition part = read_partition(ctx);
    std::vector<std::string> texts[2];
    for (const auto& r : topical) {
        if (r.is_retweet()) continue;
        if (const auto g = part.assignment.group_of(r.user_id)) texts[*g].push_back(r.text);
    }
    const int a = part.names.activist, s = part.names.skeptic;
    TokenizerOptions tok;
    tok.stem = ctx.cfg.stemmer;
    const WordDiffTables t = word_diff_table(texts[a], texts[s], ctx.cfg.top_k, tok);
    std::ostringstream wa, ws;
    write_word_csv(wa, t.a);
    write_word_csv(ws, t.b);
    ctx.write("words_activist.csv", wa.str());
    ctx.write("words_skeptic.csv", ws.str());
    ctx.stage["activist_tweets"] = texts[a].size();
    ctx.stage["skeptic_tweets"] = texts[s].size();
    ctx.stage["stemmer"] = ctx.cfg.stemmer;
}

void stage_spread(Context& ctx)
{
    const auto cascades = topical_cascades(ctx);
    const LoadedPartition part = read_partition(ctx);
    const SpreadResult r = cross_group_counts(cascades, part.assignment, part.names, ctx.cfg.threshold);
    std::ostringstream out;
    write_spread_csv(out, r.counts);
    ctx.write("spread.csv", out.str());
    ctx.stage["tweets"] = r.summary.tweets;
    ctx.stage["threshold"] = r.summary.threshold;
    ctx.stage["cross_spreading"] = r.summary.cross_spreading;
}

std::vector<std::string> group_features(const PipelineConfig& cfg, const std::vector<std::string>& all,
                                        bool activist)
{
    const auto& extra = activist ? cfg.features_activist : cfg.features_skeptic;
    if (cfg.features_common.empty() && extra.empty()) return all;
    std::vector<std::string> out = cfg.features_common;
    out.insert(out.end(), extra.begin(), extra.end());
    for (const auto& f : out)
        if (std::find(all.begin(), all.end(), f) == all.end())
            throw InputError("feature '" + f + "' is not in the label sheets");
    return out;
}

void stage_labels(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.label_sheets.empty()) throw InputError("missing input: labels (not configured)");
    std::vector<CoderSheet> sheets;
    for (const auto& p : cfg.label_sheets) {
        require_file(p, "labels");
        std::string coder = fs::path(p).stem().string();
        if (coder.rfind("labels_", 0) == 0) coder = coder.substr(7);
        sheets.push_back(read_coder_sheet(p, coder));
    }
    const Adjudication adj = majority_vote(sheets);
    const double alpha = krippendorff_alpha(sheets);

    std::map<std::string, TweetInfo> tweets;
    for (const auto& r : read_topical(ctx))
        if (!r.is_retweet()) tweets[r.tweet_id] = TweetInfo{r.user_id, r.text};
    require_intermediate(ctx, "virality.csv", "virality");
    const auto virality = read_virality_csv(ctx.path("virality.csv"));
    const LoadedPartition part = read_partition(ctx);

    for (const bool activist : {true, false}) {
        const int g = activist ? part.names.activist : part.names.skeptic;
        const std::string label = activist ? "activist" : "skeptic";
        const auto res = build_feature_matrix(adj, tweets, virality, g, group_features(cfg, adj.features, activist),
                                              cfg.min_author_tweets);
        std::ostringstream out;
        write_features_csv(out, res.matrix);
        ctx.write("features_" + label + ".csv", out.str());
        ctx.stage[label] = {{"rows", res.matrix.rows.size()},
                            {"authors", res.matrix.authors().size()},
                            {"labeled", res.report.labeled},
                            {"zero_successes", res.report.zero_successes},
                            {"unscored", res.report.unscored},
                            {"other_group", res.report.other_group},
                            {"author_filtered", res.report.author_filtered}};
    }
    ctx.stage["coders"] = sheets.size();
    ctx.stage["tweets_labeled"] = adj.labels.size();
    ctx.stage["krippendorff_alpha"] = alpha;
    ctx.stage["consensus_rate"] = adj.consensus_rate;
    ctx.stage["tie_cells"] = adj.tie_cells;
}

void stage_regress(Context& ctx)
{
    LassoConfig lc = ctx.cfg.lasso;
    lc.seed = derive_seed(ctx.cfg.seed, "lasso");
    lc.workers = ctx.cfg.workers;
    for (const std::string label : {"activist", "skeptic"}) {
        const std::string name = "features_" + label + ".csv";
        require_intermediate(ctx, name, "labels");
        const FeatureMatrix m = read_features_csv(ctx.path(name));
        if (m.rows.size() < static_cast<std::size_t>(lc.folds))
            throw InputError(name + ": " + std::to_string(m.rows.size()) + " rows, fewer than the " +
                             std::to_string(lc.folds) + " CV folds");
        const Design d = design_from_features(m);
        const LassoFit fit = fit_cv_group_lasso(d, lc);

        std::ostringstream out;
        write_regress_csv(out, report_coefficients(fit));
        ctx.write("regress_" + label + ".csv", out.str());

        CvResult cv;
        for (const auto& [lambda, mse] : fit.cv_curve) {
            cv.lambdas.push_back(lambda);
            cv.mean_mse.push_back(mse);
        }
        std::ostringstream curve;
        write_cv_curve_csv(curve, cv);
        ctx.write("cv_curve_" + label + ".csv", curve.str());

        ctx.stage[label] = {{"rows", m.rows.size()},
                            {"columns", d.X.cols()},
                            {"lambda", fit.lambda},
                            {"active_groups", fit.active_groups.size()},
                            {"iterations", fit.iterations},
                            {"kkt", fit.kkt}};
    }
    ctx.stage["seed"] = lc.seed;
    ctx.stage["standardize"] = lc.standardize;
    ctx.stage["folds"] = lc.folds;
}

void stage_simulate(Context& ctx)
{
    if (!ctx.cfg.simulate) throw InputError("config has no 'simulate' section");
    SimConfig sc = *ctx.cfg.simulate;
    const SimulationOutput sim = run_simulation(sc, ctx.cfg.workers);
    write_simulation(sim, ctx.out.string());
    ctx.stage["users"] = sim.world.users.size();
    ctx.stage["follow_edges"] = sim.world.follow.edge_count();
    ctx.stage["cascades"] = sim.cascades.size();
    ctx.stage["records"] = sim.records.size();
    ctx.stage["master_seed"] = sc.master_seed;
}

using StageFn = void (*)(Context&);

StageFn stage_fn(const std::string& name)
{
    static const std::map<std::string, StageFn> fns = {
        {"ingest", stage_ingest}, {"network", stage_network}, {"partition", stage_partition},
        {"virality", stage_virality}, {"words", stage_words}, {"spread", stage_spread},
        {"labels", stage_labels}, {"regress", stage_regress}, {"simulate", stage_simulate}};
    const auto it = fns.find(name);
    return it == fns.end() ? nullptr : it->second;
}

ordered_json load_manifest(const fs::path& p)
{
    std::ifstream in(p);
    if (!in) return ordered_json::object();
    try {
        auto j = ordered_json::parse(in);
        if (j.is_object()) return j;
    } catch (const nlohmann::json::exception&) {
    }
    return ordered_json::object();
}

} // namespace

int run_stage(const std::string& stage, const PipelineConfig& config, std::ostream& log)
{
    const bool all = stage == "run";
    if (!all && !stage_fn(stage)) {
        log << "error: unknown stage '" << stage << "'\n";
        return 1;
    }

    const fs::path out(config.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) {
        log << "error: cannot create output directory " << config.out_dir << '\n';
        return 1;
    }
    const fs::path manifest_path = out / "manifest.json";
    ordered_json manifest = all ? ordered_json::object() : load_manifest(manifest_path);
    manifest["tool"] = "viralscope";
    manifest["version"] = kVersion;
    manifest["config"] = ordered_json::parse(config.to_json());
    manifest["seeds"] = {{"master", config.seed},
                         {"partition", derive_seed(config.seed, "partition")},
                         {"lasso", derive_seed(config.seed, "lasso")}};
    if (!manifest.contains("stages")) manifest["stages"] = ordered_json::object();
    manifest.erase("failed_stage");
    manifest.erase("error");

    std::vector<std::string> plan;
    if (all) {
        plan = {"ingest", "network", "partition", "virality", "words", "spread"};
        if (!config.label_sheets.empty()) {
            plan.push_back("labels");
            plan.push_back("regress");
        }
    } else {
        plan = {stage};
    }

    auto save = [&] { csv::write_file(manifest_path.string(), manifest.dump(2) + "\n"); };

    int code = 0;
    std::string current = "config";
    try {
        config.validate();
        if (all) {
            // Fail before writing anything if an input is missing.
            current = "inputs";
            require_file(config.tweets, "tweets");
            require_file(config.edges, "edges");
            for (const auto& p : config.label_sheets) require_file(p, "labels");
        }
        for (const auto& name : plan) {
            current = name;
            ordered_json entry = ordered_json::object();
            Context ctx{config, out, entry};
            stage_fn(name)(ctx);
            entry["status"] = "ok";
            manifest["stages"][name] = entry;
            log << name << ": ok\n";
        }
    } catch (const InputError& e) {
        code = 1;
        manifest["error"] = e.what();
    } catch (const NumericalError& e) {
        code = 2;
        manifest["error"] = e.what();
    } catch (const std::exception& e) {
        code = 1;
        manifest["error"] = e.what();
    }
    if (code != 0) {
        manifest["failed_stage"] = current;
        if (current != "config" && current != "inputs") manifest["stages"][current] = {{"status", "failed"}};
        log << "error in " << current << ": " << manifest["error"].get<std::string>() << '\n';
    }
    manifest["status"] = code == 0 ? "ok" : "failed";
    try {
        save();
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        if (code == 0) code = 1;
    }
    return code;
}

} // namespace viralscope
