#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <viralscope/common.hpp>
#include <viralscope/rng.hpp>
#include <viralscope/virality.hpp>

#include "helpers.hpp"

using namespace viralscope;
using testutil::retweet;
using testutil::tweet;

namespace {

// Grid oracle: argmax of the log-likelihood over r = k * step in (0, r_max].
double grid_argmax(const std::vector<double>& s, const std::vector<double>& f, double step)
{
    double top = 0.0;
    for (double a : s) top = std::max(top, a);
    for (double a : f) top = std::max(top, a);
    const double r_max = 1.0 / top;
    double best_r = step, best = -INFINITY;
    for (double r = step; r <= r_max; r += step) {
        const double ll = cascade_log_likelihood(r, s, f);
        if (ll > best) {
            best = ll;
            best_r = r;
        }
    }
    if (cascade_log_likelihood(r_max, s, f) > best) best_r = r_max;
    return best_r;
}

ActivityTable table(std::map<std::string, std::int64_t> raw)
{
    std::vector<TweetRecord> recs;
    int k = 0;
    for (const auto& [u, n] : raw)
        for (std::int64_t i = 0; i < n; ++i) recs.push_back(tweet("t" + std::to_string(k++), u, 0));
    return compute_activities(recs);
}

} // namespace

TEST_SUITE("virality") {

TEST_CASE("activities count every record")
{
    std::vector<TweetRecord> recs;
    for (int i = 0; i < 5; ++i) recs.push_back(tweet("o" + std::to_string(i), "u", i));
    for (int i = 0; i < 3; ++i) recs.push_back(retweet("r" + std::to_string(i), "u", i, "x"));
    for (int i = 0; i < 40; ++i) recs.push_back(tweet("m" + std::to_string(i), "max", i));
    const auto t = compute_activities(recs);
    CHECK(t.users.at("u").raw == 8);
    CHECK(t.max_raw == 40);
    CHECK(t.alpha("u") == doctest::Approx(0.2));
    CHECK(t.alpha("nobody") == 0.0);
    const auto raw = compute_activities(recs, true);
    CHECK(raw.alpha("u") == 8.0);
}

TEST_CASE("activities csv round trip")
{
    const auto t = table({{"a", 3}, {"b", 7}});
    std::ostringstream out;
    write_activities_csv(out, t);
    CHECK(out.str().rfind("user_id,raw,normalized\n", 0) == 0);
    const auto path = testutil::temp_dir("activities") + "/activities.csv";
    std::ofstream(path) << out.str();
    const auto back = read_activities_csv(path);
    CHECK(back.users.at("a").raw == 3);
    CHECK(back.alpha("b") == 1.0);
    CHECK(read_activities_csv(path, true).alpha("a") == 3.0);
}

TEST_CASE("worked examples")
{
    CHECK(solve_virality(std::vector<double>{1.0}, std::vector<double>{1.0}).r_hat == doctest::Approx(0.5).epsilon(1e-12));
    const auto three = solve_virality(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0});
    CHECK(three.r_hat == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(three.boundary == Boundary::interior);
    std::vector<double> s(3, 0.5), f(9, 0.5);
    CHECK(solve_virality(s, f).r_hat == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(grid_argmax({1.0, 1.0}, {1.0}, 1e-5) - 2.0 / 3.0) < 1e-4);
}

TEST_CASE("boundary cases")
{
    const auto no_fail = solve_virality(std::vector<double>{0.5, 0.25}, std::vector<double>{});
    CHECK(no_fail.boundary == Boundary::upper_boundary);
    CHECK(no_fail.r_hat == 2.0);
    CHECK(no_fail.r_max == 2.0);

    // Many successes, one weak failure: the score is still positive at r_max.
    const auto top = solve_virality(std::vector<double>(10, 1.0), std::vector<double>{0.01});
    CHECK(top.boundary == Boundary::upper_boundary);
    CHECK(top.r_hat == 1.0);

    const auto none = solve_virality(std::vector<double>{}, std::vector<double>{0.5});
    CHECK(none.boundary == Boundary::zero_successes);
    CHECK(std::isnan(none.r_hat));

    CHECK_THROWS_AS(solve_virality(std::vector<double>{0.0}, std::vector<double>{0.5}), NumericalError);
    CHECK_THROWS_AS(solve_virality(std::vector<double>{NAN}, std::vector<double>{}), NumericalError);
}

TEST_CASE("strict concavity and bracket validity")
{
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> s(1 + rng.index(6)), f(1 + rng.index(10));
        for (auto& a : s) a = rng.uniform_open_closed();
        for (auto& a : f) a = rng.uniform_open_closed();
        const auto sol = solve_virality(s, f);
        for (int k = 1; k < 50; ++k) {
            const double r = sol.r_max * k / 50.0;
            CHECK(cascade_curvature(r, s.size(), f) < 0.0);
        }
        CHECK(sol.r_hat > 0.0);
        CHECK(sol.r_hat <= sol.r_max);
        if (sol.boundary == Boundary::interior) {
            CHECK(cascade_score(sol.r_hat * (1 - 1e-9), s.size(), f) > 0.0);
            CHECK(cascade_score(sol.r_hat * (1 + 1e-9), s.size(), f) < 0.0);
            CHECK(sol.iterations <= 200);
        }
    }
}

TEST_CASE("monotone in successes and failures")
{
    Rng rng(9);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> s(1 + rng.index(5)), f(2 + rng.index(10));
        for (auto& a : s) a = rng.uniform(0.05, 0.5);
        for (auto& a : f) a = rng.uniform(0.5, 1.0); // max activity sits among the failures
        const double base = solve_virality(s, f).r_hat;
        auto more_f = f;
        more_f.push_back(rng.uniform(0.05, 1.0));
        CHECK(solve_virality(s, more_f).r_hat < base);
        auto more_s = s;
        more_s.push_back(rng.uniform(0.05, 0.5));
        const auto up = solve_virality(more_s, f);
        CHECK((up.r_hat > base || up.boundary == Boundary::upper_boundary));
    }
}

TEST_CASE("scored ledgers and csv")
{
    const auto act = table({{"a", 10}, {"b", 5}, {"c", 10}});
    ExposureLedger good;
    good.tweet_id = "t2";
    good.successes = {"a"};
    good.failures = {"c"};
    good.exposed = {"a", "c"};
    ExposureLedger zero = good;
    zero.tweet_id = "t1";
    zero.successes.clear();
    zero.failures = {"a", "c"};
    ExposureLedger other = good;
    other.tweet_id = "t3";
    other.successes = {"b", "ghost"};
    const auto table = score_ledgers({good, zero, other}, act, 4);
    REQUIRE(table.estimates.size() == 2);
    CHECK(table.skipped.size() == 1);
    CHECK(table.skipped[0].tweet_id == "t1");
    CHECK(table.skipped[0].reason == "zero_successes");
    CHECK(table.estimates[0].tweet_id == "t2");
    CHECK(table.estimates[0].r_hat == doctest::Approx(0.5));
    CHECK(table.estimates[1].zero_activity == 1);

    const auto again = score_ledgers({good, zero, other}, act, 1);
    CHECK(again.estimates[0].r_hat == table.estimates[0].r_hat);

    std::ostringstream out;
    write_virality_csv(out, table.estimates);
    const auto path = testutil::temp_dir("virality") + "/virality.csv";
    std::ofstream(path) << out.str();
    const auto back = read_virality_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].r_hat == table.estimates[0].r_hat); // shortest round-trip formatting
    CHECK(back[1].boundary == table.estimates[1].boundary);
    CHECK(out.str().rfind("tweet_id,group,successes,failures,exposed,r_hat,ln_r,boundary\n", 0) == 0);
}

TEST_CASE("score_corpus reports unscorable cascades")
{
    const auto recs = std::vector<TweetRecord>{tweet("T1", "o", 0), retweet("r1", "a", 1, "T1"),
                                               tweet("T2", "o", 5), retweet("r2", "z", 6, "T2")};
    const auto set = build_cascades(recs);
    PartitionAssignment part;
    part.users = {"a", "b", "o"};
    part.group = {0, 0, 0};
    const FollowerNetwork follow({"a", "b", "o", "z"}, {{0, 2}, {1, 2}});
    const auto act = table({{"a", 2}, {"b", 2}, {"o", 4}});
    const auto out = score_corpus(set.cascades, part, follow, act);
    REQUIRE(out.estimates.size() == 1);
    CHECK(out.estimates[0].r_hat == doctest::Approx(1.0)); // alpha 0.5 each, one success, one failure
    REQUIRE(out.skipped.size() == 1);
    CHECK(out.skipped[0].reason == "no_classified_retweeters");
}

}
