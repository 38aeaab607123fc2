#include <viralscope/sim.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include <viralscope/common.hpp>
#include <viralscope/csv.hpp>
#include <viralscope/rng.hpp>

namespace viralscope {

namespace {

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

std::string pad(std::size_t i, std::size_t width)
{
    std::string s = std::to_string(i);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

std::size_t digits(std::size_t n)
{
    std::size_t d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

const std::vector<std::string>& vocabulary(int block)
{
    static const std::vector<std::string> activist = {
        "crisis", "emergency", "action", "justice", "future", "renewables", "strike",
        "youth", "planet", "act", "now", "science", "solar", "emissions", "fossil"};
    static const std::vector<std::string> skeptic = {
        "hoax", "scam", "alarmist", "taxes", "elites", "fraud", "cold", "agenda",
        "lies", "models", "freedom", "energy", "grid", "hypocrites", "wrong"};
    return block == 1 ? skeptic : activist;
}

std::string compose_text(Rng& rng, int block, const std::vector<std::string>& users)
{
    const auto& words = vocabulary(block);
    std::string text = "climate";
    const std::size_t k = 3 + rng.index(4);
    for (std::size_t i = 0; i < k; ++i) {
        text += ' ';
        text += words[rng.index(words.size())];
    }
    if (rng.bernoulli(0.3)) text += " @" + users[rng.index(users.size())];
    text += block == 1 ? " #ClimateHoax" : " #ClimateCrisis";
    if (rng.bernoulli(0.2)) text += " https://example.org/" + std::to_string(rng.index(1000));
    return text;
}

} // namespace

void SimConfig::validate() const
{
    if (n < 2) throw InputError("sim: n must be at least 2");
    if (!is_probability(p)) throw InputError("sim: p must lie in [0, 1]");
    if (!is_probability(p_in) || !is_probability(p_out)) throw InputError("sim: p_in and p_out must lie in [0, 1]");
    if (activity_kind == ActivityKind::uniform) {
        if (!(activity_lo > 0.0) || !(activity_hi >= activity_lo) || !std::isfinite(activity_hi))
            throw InputError("sim: uniform activity needs 0 < lo <= hi");
    } else if (!std::isfinite(activity_mu) || !(activity_sigma >= 0.0) || !std::isfinite(activity_sigma)) {
        throw InputError("sim: lognormal activity needs finite mu and sigma >= 0");
    }
    for (double r : r_values)
        if (!(r > 0.0 && r <= 1.0)) throw InputError("sim: planted r must lie in (0, 1]");
    if (labels.enabled) {
        if (labels.coders < 1) throw InputError("sim: need at least one coder");
        if (labels.features.empty()) throw InputError("sim: label features missing");
        if (!is_probability(labels.base_rate) || !is_probability(labels.flip))
            throw InputError("sim: label rates must lie in [0, 1]");
    }
}

SimConfig parse_sim_config(const std::string& json_text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("sim config: ") + e.what());
    }
    SimConfig c;
    try {
        if (j.contains("graph")) {
            const auto& g = j.at("graph");
            const std::string kind = g.value("kind", "directed-random");
            if (kind == "directed-random") c.graph_kind = GraphKind::directed_random;
            else if (kind == "planted-two-block") c.graph_kind = GraphKind::planted_two_block;
            else throw InputError("sim config: unknown graph kind '" + kind + "'");
            c.n = g.value("n", c.n);
            c.p = g.value("p", c.p);
            c.p_in = g.value("p_in", c.p_in);
            c.p_out = g.value("p_out", c.p_out);
        }
        if (j.contains("activity")) {
            const auto& a = j.at("activity");
            const std::string kind = a.value("kind", "uniform");
            if (kind == "uniform") c.activity_kind = ActivityKind::uniform;
            else if (kind == "lognormal") c.activity_kind = ActivityKind::lognormal;
            else throw InputError("sim config: unknown activity kind '" + kind + "'");
            c.activity_lo = a.value("lo", c.activity_lo);
            c.activity_hi = a.value("hi", c.activity_hi);
            c.activity_mu = a.value("mu", c.activity_mu);
            c.activity_sigma = a.value("sigma", c.activity_sigma);
        }
        if (j.contains("r_values")) c.r_values = j.at("r_values").get<std::vector<double>>();
        c.cascades_per_r = j.value("cascades_per_r", c.cascades_per_r);
        c.master_seed = j.value("master_seed", c.master_seed);
        const std::string sel = j.value("seed_selection", "top-decile");
        if (sel == "top-decile") c.seed_selection = SeedSelection::top_decile;
        else if (sel == "uniform") c.seed_selection = SeedSelection::uniform;
        else throw InputError("sim config: unknown seed_selection '" + sel + "'");
        if (j.contains("labels")) {
            const auto& l = j.at("labels");
            c.labels.enabled = true;
            c.labels.coders = l.value("coders", c.labels.coders);
            c.labels.base_rate = l.value("base_rate", c.labels.base_rate);
            c.labels.flip = l.value("flip", c.labels.flip);
            c.labels.features = l.at("features").get<std::vector<std::string>>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("sim config: ") + e.what());
    }
    c.validate();
    return c;
}

std::vector<std::string> sim_user_ids(std::size_t n)
{
    const std::size_t width = std::max<std::size_t>(4, digits(n - 1));
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = "u" + pad(i, width);
    return ids;
}

NetworkSample generate_network(const SimConfig& config)
{
    config.validate();
    NetworkSample out;
    out.n = config.n;
    out.block.assign(config.n, 0);
    if (config.graph_kind == GraphKind::planted_two_block)
        for (std::size_t i = config.n / 2; i < config.n; ++i) out.block[i] = 1;

    // One stream per follower row keeps the graph independent of anything
    // else drawn from the master seed.
    for (std::size_t u = 0; u < config.n; ++u) {
        Rng rng(derive_seed(config.master_seed, "graph/" + std::to_string(u)));
        for (std::size_t v = 0; v < config.n; ++v) {
            if (u == v) continue;
            double p = config.p;
            if (config.graph_kind == GraphKind::planted_two_block)
                p = out.block[u] == out.block[v] ? config.p_in : config.p_out;
            if (p >= 1.0 || (p > 0.0 && rng.bernoulli(p)))
                out.edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
        }
    }
    return out;
}

ActivityTable SyntheticWorld::activity_table() const
{
    // Raw counts are not meaningful here; they mirror the normalized value
    // in millionths so the table's invariants hold.
    ActivityTable t;
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto raw = static_cast<std::int64_t>(std::llround(activity[i] * 1e6));
        t.users[users[i]] = UserActivity{std::max<std::int64_t>(raw, 1), activity[i]};
        t.max_raw = std::max(t.max_raw, t.users[users[i]].raw);
    }
    return t;
}

SyntheticWorld make_world(const SimConfig& config)
{
    NetworkSample net = generate_network(config);
    SyntheticWorld w;
    w.users = sim_user_ids(config.n);
    w.block = std::move(net.block);
    w.master_seed = config.master_seed;
    w.follow = FollowerNetwork(w.users, std::move(net.edges));

    Rng rng(derive_seed(config.master_seed, "activity"));
    w.activity.resize(config.n);
    for (auto& a : w.activity) {
        a = config.activity_kind == ActivityKind::uniform
                ? rng.uniform(config.activity_lo, config.activity_hi)
                : std::exp(config.activity_mu + config.activity_sigma * rng.normal());
    }
    const double top = *std::max_element(w.activity.begin(), w.activity.end());
    for (auto& a : w.activity) a = a / top;
    return w;
}

SimulatedCascade simulate_cascade(const SyntheticWorld& world, int seed_user, double r,
                                  std::uint64_t cascade_seed, std::string tweet_id)
{
    const std::size_t n = world.users.size();
    SimulatedCascade c;
    c.tweet_id = std::move(tweet_id);
    c.seed_user = seed_user;
    c.r = r;

    Rng rng(cascade_seed);
    std::vector<char> seen(n, 0);
    seen[static_cast<std::size_t>(seed_user)] = 1;

    std::vector<int> frontier{seed_user}; // users whose post goes out this round
    for (int round = 0; !frontier.empty(); ++round) {
        std::vector<int> exposed_now;
        for (int src : frontier)
            for (int f : world.follow.followers_of(src))
                if (!seen[static_cast<std::size_t>(f)]) {
                    seen[static_cast<std::size_t>(f)] = 1;
                    exposed_now.push_back(f);
                }
        std::sort(exposed_now.begin(), exposed_now.end());
        std::vector<int> next;
        for (int u : exposed_now) {
            c.exposed.push_back(u);
            const double prob = world.activity[static_cast<std::size_t>(u)] * r;
            if (rng.bernoulli(prob)) {
                next.push_back(u);
                c.retweets.emplace_back(u, round + 1);
                c.successes.push_back(u);
            } else {
                c.failures.push_back(u);
            }
        }
        frontier = std::move(next);
    }
    std::sort(c.exposed.begin(), c.exposed.end());
    std::sort(c.successes.begin(), c.successes.end());
    std::sort(c.failures.begin(), c.failures.end());
    return c;
}

std::vector<int> seed_candidates(const SyntheticWorld& world, SeedSelection selection)
{
    const std::size_t n = world.users.size();
    std::vector<int> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<int>(i);
    if (selection == SeedSelection::uniform) return all;
    std::stable_sort(all.begin(), all.end(), [&](int a, int b) {
        return world.follow.followers_of(a).size() > world.follow.followers_of(b).size();
    });
    all.resize(std::max<std::size_t>(1, (n + 9) / 10));
    std::sort(all.begin(), all.end());
    return all;
}

std::vector<TweetRecord> emit_cascade_records(const SyntheticWorld& world, const SimulatedCascade& c,
                                              std::int64_t base_timestamp, const std::string& text)
{
    std::vector<TweetRecord> out;
    out.reserve(c.retweets.size() + 1);
    const std::string& author = world.users[static_cast<std::size_t>(c.seed_user)];
    TweetRecord origin;
    origin.tweet_id = c.tweet_id;
    origin.user_id = author;
    origin.timestamp = base_timestamp;
    origin.text = text;
    origin.lang = "en";
    out.push_back(origin);
    for (const auto& [u, round] : c.retweets) {
        const std::string& user = world.users[static_cast<std::size_t>(u)];
        TweetRecord rt;
        rt.tweet_id = c.tweet_id + "_rt_" + user;
        rt.user_id = user;
        rt.timestamp = base_timestamp + round;
        rt.text = "RT @" + author + ": " + text;
        rt.retweet_of = c.tweet_id;
        rt.lang = "en";
        out.push_back(std::move(rt));
    }
    return out;
}

SimulationOutput run_simulation(const SimConfig& config, int workers)
{
    config.validate();
    SimulationOutput out;
    out.world = make_world(config);
    const SyntheticWorld& w = out.world;
    const std::vector<int> candidates = seed_candidates(w, config.seed_selection);

    const std::size_t total = config.r_values.size() * config.cascades_per_r;
    const std::size_t width = std::max<std::size_t>(5, digits(total));
    std::vector<std::string> ids(total);
    std::vector<double> planted(total);
    for (std::size_t i = 0; i < total; ++i) {
        ids[i] = "t" + pad(i + 1, width);
        planted[i] = config.r_values[i / config.cascades_per_r];
    }

    std::vector<std::vector<TweetRecord>> per(total);
    out.cascades.resize(total);
    parallel_for(total, workers, [&](std::size_t i) {
        Rng pick(derive_seed(config.master_seed, "seed/" + ids[i]));
        const int seed_user = candidates[pick.index(candidates.size())];
        out.cascades[i] = simulate_cascade(w, seed_user, planted[i], derive_seed(config.master_seed, ids[i]), ids[i]);
        Rng text_rng(derive_seed(config.master_seed, "text/" + ids[i]));
        const std::string text =
            compose_text(text_rng, w.block[static_cast<std::size_t>(seed_user)], w.users);
        per[i] = emit_cascade_records(w, out.cascades[i], 1'600'000'000 + static_cast<std::int64_t>(i) * 3600, text);
    });
    for (std::size_t i = 0; i < total; ++i) {
        for (auto& rec : per[i]) out.records.push_back(std::move(rec));
        out.truth.push_back({ids[i], planted[i], w.users[static_cast<std::size_t>(out.cascades[i].seed_user)]});
    }

    if (config.labels.enabled) {
        const auto& feats = config.labels.features;
        std::vector<std::vector<std::uint8_t>> truth(total);
        for (std::size_t i = 0; i < total; ++i) {
            Rng rng(derive_seed(config.master_seed, "labels/" + ids[i]));
            for (std::size_t f = 0; f < feats.size(); ++f)
                truth[i].push_back(rng.bernoulli(config.labels.base_rate) ? 1 : 0);
        }
        for (int k = 1; k <= config.labels.coders; ++k) {
            CoderSheet sheet;
            sheet.coder_id = "c" + std::to_string(k);
            sheet.features = feats;
            for (std::size_t i = 0; i < total; ++i) {
                Rng rng(derive_seed(config.master_seed, "coder/" + sheet.coder_id + "/" + ids[i]));
                std::vector<std::uint8_t> row = truth[i];
                for (auto& v : row)
                    if (rng.bernoulli(config.labels.flip)) v = static_cast<std::uint8_t>(1 - v);
                sheet.rows[ids[i]] = std::move(row);
            }
            out.sheets.push_back(std::move(sheet));
        }
    }
    return out;
}

void write_simulation(const SimulationOutput& sim, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);

    std::ostringstream tweets;
    write_records(tweets, sim.records);
    csv::write_file((base / "tweets.jsonl").string(), tweets.str());

    std::ostringstream edges;
    edges << "follower,followee\n";
    const auto& f = sim.world.follow;
    for (std::size_t u = 0; u < f.user_count(); ++u)
        for (int v : f.followees_of(static_cast<int>(u)))
            edges << f.users()[u] << ',' << f.users()[static_cast<std::size_t>(v)] << '\n';
    csv::write_file((base / "edges.csv").string(), edges.str());

    std::ostringstream truth;
    truth << "tweet_id,planted_r,seed_user\n";
    for (const auto& t : sim.truth)
        truth << t.tweet_id << ',' << csv::format_double(t.planted_r) << ',' << t.seed_user << '\n';
    csv::write_file((base / "truth.csv").string(), truth.str());

    for (const auto& sheet : sim.sheets) {
        std::ostringstream s;
        write_coder_sheet(s, sheet);
        csv::write_file((base / ("labels_" + sheet.coder_id + ".csv")).string(), s.str());
    }
}

std::vector<RecoveryRow> recovery_experiment(const SyntheticWorld& world, const std::vector<double>& r_values,
                                             std::size_t cascades_per_r, SeedSelection selection,
                                             int workers)
{
    const std::vector<int> candidates = seed_candidates(world, selection);
    const std::vector<int> groups(world.users.size(), 0);
    const ActivityTable activities = world.activity_table();

    std::vector<RecoveryRow> rows;
    for (std::size_t ri = 0; ri < r_values.size(); ++ri) {
        const double r = r_values[ri];
        std::vector<ViralityEstimate> est(cascades_per_r);
        std::vector<std::size_t> exposed(cascades_per_r);
        parallel_for(cascades_per_r, workers, [&](std::size_t i) {
            const std::string id = "rec" + std::to_string(ri) + "_" + pad(i, 5);
            Rng pick(derive_seed(world.master_seed, "seed/" + id));
            const int seed_user = candidates[pick.index(candidates.size())];
            const SimulatedCascade c =
                simulate_cascade(world, seed_user, r, derive_seed(world.master_seed, id), id);
            const auto records = emit_cascade_records(world, c, 0, "climate");
            const CascadeSet set = build_cascades(records);
            const ExposureLedger ledger =
                build_exposure_ledger(set.cascades.front(), world.follow, groups, 0);
            exposed[i] = ledger.exposed.size();
            est[i] = mle_virality(ledger, activities);
        });

        RecoveryRow row;
        row.planted_r = r;
        row.cascades = cascades_per_r;
        std::vector<double> err;
        double exposed_sum = 0.0;
        for (std::size_t i = 0; i < cascades_per_r; ++i) {
            exposed_sum += static_cast<double>(exposed[i]);
            if (est[i].boundary == Boundary::zero_successes) {
                ++row.unscorable;
                continue;
            }
            ++row.scorable;
            if (est[i].boundary == Boundary::upper_boundary) ++row.upper_boundary;
            err.push_back(std::abs(est[i].r_hat - r) / r);
        }
        row.mean_exposed = cascades_per_r ? exposed_sum / static_cast<double>(cascades_per_r) : 0.0;
        if (!err.empty()) {
            std::sort(err.begin(), err.end());
            auto quantile = [&](double q) {
                // Linear interpolation between order statistics.
                const double pos = q * static_cast<double>(err.size() - 1);
                const auto lo = static_cast<std::size_t>(std::floor(pos));
                const auto hi = std::min(lo + 1, err.size() - 1);
                return err[lo] + (pos - static_cast<double>(lo)) * (err[hi] - err[lo]);
            };
            row.median_rel_error = quantile(0.5);
            row.p90_rel_error = quantile(0.9);
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace viralscope
