#include <viralscope/virality.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <viralscope/common.hpp>
#include <viralscope/csv.hpp>

namespace viralscope {

double ActivityTable::alpha(std::string_view user) const
{
    const auto it = users.find(user);
    if (it == users.end()) return 0.0;
    return raw_mode ? static_cast<double>(it->second.raw) : it->second.normalized;
}

ActivityTable compute_activities(const std::vector<TweetRecord>& all_records, bool raw_mode)
{
    ActivityTable t;
    t.raw_mode = raw_mode;
    for (const auto& r : all_records) ++t.users[r.user_id].raw;
    for (const auto& [_, a] : t.users) t.max_raw = std::max(t.max_raw, a.raw);
    for (auto& [_, a] : t.users)
        a.normalized = t.max_raw > 0 ? static_cast<double>(a.raw) / static_cast<double>(t.max_raw) : 0.0;
    return t;
}

void write_activities_csv(std::ostream& out, const ActivityTable& table)
{
    out << "user_id,raw,normalized\n";
    for (const auto& [user, a] : table.users)
        out << user << ',' << a.raw << ',' << csv::format_double(a.normalized) << '\n';
}

ActivityTable read_activities_csv(const std::string& path, bool raw_mode)
{
    const auto tab = csv::read_table(path);
    const int cu = tab.column("user_id"), cr = tab.column("raw");
    if (cu < 0 || cr < 0) throw InputError(path + ": expected columns user_id,raw");
    ActivityTable t;
    t.raw_mode = raw_mode;
    for (const auto& row : tab.rows) t.users[row[cu]].raw = csv::parse_int(row[cr], "raw activity");
    for (const auto& [_, a] : t.users) t.max_raw = std::max(t.max_raw, a.raw);
    for (auto& [_, a] : t.users)
        a.normalized = t.max_raw > 0 ? static_cast<double>(a.raw) / static_cast<double>(t.max_raw) : 0.0;
    return t;
}

const char* to_string(Boundary b)
{
    switch (b) {
    case Boundary::interior: return "interior";
    case Boundary::upper_boundary: return "upper_boundary";
    case Boundary::zero_successes: return "zero_successes";
    }
    return "?";
}

Boundary boundary_from_string(std::string_view s)
{
    if (s == "interior") return Boundary::interior;
    if (s == "upper_boundary") return Boundary::upper_boundary;
    if (s == "zero_successes") return Boundary::zero_successes;
    throw InputError("unknown boundary tag: " + std::string(s));
}

double cascade_log_likelihood(double r, std::span<const double> success_alpha,
                              std::span<const double> failure_alpha)
{
    double ll = static_cast<double>(success_alpha.size()) * std::log(r);
    for (double a : success_alpha) ll += std::log(a);
    for (double a : failure_alpha) ll += std::log1p(-a * r);
    return ll;
}

double cascade_score(double r, std::size_t successes, std::span<const double> failure_alpha)
{
    double d = static_cast<double>(successes) / r;
    for (double a : failure_alpha) d -= a / (1.0 - a * r);
    return d;
}

double cascade_curvature(double r, std::size_t successes, std::span<const double> failure_alpha)
{
    double c = -static_cast<double>(successes) / (r * r);
    for (double a : failure_alpha) {
        const double q = 1.0 - a * r;
        c -= a * a / (q * q);
    }
    return c;
}

MleSolution solve_virality(std::span<const double> success_alpha, std::span<const double> failure_alpha)
{
    MleSolution sol;
    double max_alpha = 0.0;
    for (double a : success_alpha) max_alpha = std::max(max_alpha, a);
    for (double a : failure_alpha) max_alpha = std::max(max_alpha, a);
    for (auto span : {success_alpha, failure_alpha})
        for (double a : span)
            if (!(a > 0.0) || !std::isfinite(a))
                throw NumericalError("trial activities must be positive and finite");

    if (success_alpha.empty()) {
        sol.boundary = Boundary::zero_successes;
        sol.r_hat = std::numeric_limits<double>::quiet_NaN();
        sol.r_max = max_alpha > 0.0 ? 1.0 / max_alpha : std::numeric_limits<double>::infinity();
        return sol;
    }
    sol.r_max = 1.0 / max_alpha;
    const std::size_t s = success_alpha.size();

    // At r_max the score is -inf if the most active trial is a failure;
    // otherwise it is finite and its sign decides the boundary case.
    bool score_neg_at_top = false;
    double top_score = 0.0;
    for (double a : failure_alpha)
        if (a * sol.r_max >= 1.0) score_neg_at_top = true;
    if (!score_neg_at_top) {
        top_score = cascade_score(sol.r_max, s, failure_alpha);
        score_neg_at_top = top_score < 0.0;
    }
    if (!score_neg_at_top) {
        sol.r_hat = sol.r_max;
        sol.boundary = Boundary::upper_boundary;
        return sol;
    }

    double lo = 0.0, hi = sol.r_max;
    constexpr int kMaxIter = 200;
    int it = 0;
    for (; it < kMaxIter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (cascade_score(mid, s, failure_alpha) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    sol.iterations = it;
    sol.r_hat = 0.5 * (lo + hi);
    sol.boundary = Boundary::interior;
    return sol;
}

ViralityEstimate mle_virality(const ExposureLedger& ledger, const ActivityTable& activities)
{
    ViralityEstimate est;
    est.tweet_id = ledger.tweet_id;
    est.group = ledger.group;
    std::vector<double> sa, fa;
    sa.reserve(ledger.successes.size());
    fa.reserve(ledger.failures.size());
    for (const auto& u : ledger.successes) {
        const double a = activities.alpha(u);
        if (a > 0.0) sa.push_back(a); else ++est.zero_activity;
    }
    for (const auto& u : ledger.failures) {
        const double a = activities.alpha(u);
        if (a > 0.0) fa.push_back(a); else ++est.zero_activity;
    }
    est.successes = sa.size();
    est.failures = fa.size();
    est.exposed = sa.size() + fa.size();
    const MleSolution sol = solve_virality(sa, fa);
    est.r_hat = sol.r_hat;
    est.r_max = sol.r_max;
    est.boundary = sol.boundary;
    est.ln_r = sol.boundary == Boundary::zero_successes ? std::numeric_limits<double>::quiet_NaN()
                                                         : std::log(sol.r_hat);
    return est;
}

namespace {

void split_scored(std::vector<ViralityEstimate>& all, std::vector<ExposureLedger>& ledgers,
                  ScoreTable& out)
{
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i].boundary == Boundary::zero_successes) {
            out.skipped.push_back({all[i].tweet_id, "zero_successes"});
        } else {
            out.estimates.push_back(std::move(all[i]));
            out.ledgers.push_back(std::move(ledgers[i]));
        }
    }
    auto by_id = [](const auto& a, const auto& b) { return a.tweet_id < b.tweet_id; };
    std::sort(out.skipped.begin(), out.skipped.end(), by_id);
}

} // namespace

ScoreTable score_ledgers(const std::vector<ExposureLedger>& ledgers,
                         const ActivityTable& activities, int workers)
{
    std::vector<std::size_t> order(ledgers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ledgers[a].tweet_id < ledgers[b].tweet_id; });
    std::vector<ViralityEstimate> all(ledgers.size());
    std::vector<ExposureLedger> sorted(ledgers.size());
    parallel_for(order.size(), workers, [&](std::size_t i) {
        sorted[i] = ledgers[order[i]];
        all[i] = mle_virality(sorted[i], activities);
    });
    ScoreTable out;
    split_scored(all, sorted, out);
    return out;
}

ScoreTable score_corpus(const std::vector<Cascade>& cascades, const PartitionAssignment& assignment,
                        const FollowerNetwork& follow, const ActivityTable& activities,
                        const ExposureOptions& options, int workers)
{
    std::vector<std::size_t> order(cascades.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return cascades[a].origin.tweet_id < cascades[b].origin.tweet_id;
    });

    const auto groups = node_groups(follow, assignment);
    std::vector<ViralityEstimate> all(cascades.size());
    std::vector<ExposureLedger> ledgers(cascades.size());
    std::vector<std::string> unscorable(cascades.size());
    parallel_for(order.size(), workers, [&](std::size_t i) {
        const Cascade& c = cascades[order[i]];
        MainGroupChoice choice;
        try {
            choice = main_group(c, assignment);
        } catch (const UnscorableCascade&) {
            unscorable[i] = "no_classified_retweeters";
            return;
        }
        ledgers[i] = build_exposure_ledger(c, follow, groups, choice.group, options);
        if (choice.fallback) ledgers[i].flags |= kGroupFallback;
        all[i] = mle_virality(ledgers[i], activities);
    });

    ScoreTable out;
    std::vector<ViralityEstimate> scored;
    std::vector<ExposureLedger> scored_ledgers;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (!unscorable[i].empty()) {
            out.skipped.push_back({cascades[order[i]].origin.tweet_id, unscorable[i]});
            continue;
        }
        scored.push_back(std::move(all[i]));
        scored_ledgers.push_back(std::move(ledgers[i]));
    }
    split_scored(scored, scored_ledgers, out);
    return out;
}

void write_virality_csv(std::ostream& out, const std::vector<ViralityEstimate>& estimates)
{
    out << "tweet_id,group,successes,failures,exposed,r_hat,ln_r,boundary\n";
    for (const auto& e : estimates) {
        out << e.tweet_id << ',' << e.group << ',' << e.successes << ',' << e.failures << ','
            << e.exposed << ',' << csv::format_double(e.r_hat) << ',' << csv::format_double(e.ln_r)
            << ',' << to_string(e.boundary) << '\n';
    }
}

std::vector<ViralityEstimate> read_virality_csv(const std::string& path)
{
    const auto tab = csv::read_table(path);
    const std::vector<std::string> expected = {"tweet_id", "group",  "successes", "failures",
                                               "exposed",  "r_hat", "ln_r",      "boundary"};
    if (tab.header != expected) throw InputError(path + ": unexpected virality.csv header");
    std::vector<ViralityEstimate> out;
    for (const auto& row : tab.rows) {
        ViralityEstimate e;
        e.tweet_id = row[0];
        e.group = static_cast<int>(csv::parse_int(row[1], "group"));
        e.successes = static_cast<std::size_t>(csv::parse_int(row[2], "successes"));
        e.failures = static_cast<std::size_t>(csv::parse_int(row[3], "failures"));
        e.exposed = static_cast<std::size_t>(csv::parse_int(row[4], "exposed"));
        e.r_hat = csv::parse_double(row[5], "r_hat");
        e.ln_r = csv::parse_double(row[6], "ln_r");
        e.boundary = boundary_from_string(row[7]);
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace viralscope
