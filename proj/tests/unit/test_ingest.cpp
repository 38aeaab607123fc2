#include <doctest.h>

#include <sstream>

#include <viralscope/common.hpp>
#include <viralscope/ingest.hpp>
#include <viralscope/rng.hpp>

#include "helpers.hpp"

using namespace viralscope;
using testutil::retweet;
using testutil::tweet;

namespace {

std::string line(const std::string& id, const std::string& user, long ts, const std::string& extra = "")
{
    return R"({"tweet_id":")" + id + R"(","user_id":")" + user + R"(","timestamp":)" + std::to_string(ts) +
           R"(,"text":"climate","retweet_of":null,"reply_to":null,"lang":"en")" + extra + "}";
}

} // namespace

TEST_SUITE("ingest") {

TEST_CASE("three valid lines parse cleanly")
{
    std::istringstream in(line("1", "a", 1) + "\n" + line("2", "b", 2) + "\n" + line("3", "c", 3) + "\n");
    const auto p = parse_records(in);
    CHECK(p.records.size() == 3);
    CHECK(p.report.malformed == 0);
    CHECK(p.report.duplicates == 0);
    CHECK(p.records[1].tweet_id == "2");
}

TEST_CASE("a truncated line is skipped and counted")
{
    std::string s;
    for (int i = 0; i < 5; ++i) s += (i == 2 ? line("x", "u", 1).substr(0, 30) : line(std::to_string(i), "u", i)) + "\n";
    std::istringstream in(s);
    const auto p = parse_records(in);
    CHECK(p.records.size() == 4);
    CHECK(p.report.malformed == 1);
}

TEST_CASE("duplicate ids keep the first occurrence")
{
    std::istringstream in(line("1", "first", 1) + "\n" + line("1", "second", 2) + "\n");
    const auto p = parse_records(in);
    REQUIRE(p.records.size() == 1);
    CHECK(p.records[0].user_id == "first");
    CHECK(p.report.duplicates == 1);
}

TEST_CASE("schema violations are malformed")
{
    const std::vector<std::string> bad = {
        R"({"tweet_id":"","user_id":"a","timestamp":1,"text":"x","retweet_of":null,"reply_to":null,"lang":null})",
        R"({"tweet_id":"1","user_id":"a","timestamp":-1,"text":"x","retweet_of":null,"reply_to":null,"lang":null})",
        R"({"tweet_id":"1","user_id":"a","timestamp":1.5,"text":"x","retweet_of":null,"reply_to":null,"lang":null})",
        R"({"tweet_id":"1","user_id":"a","timestamp":1,"text":"x","retweet_of":"1","reply_to":null,"lang":null})",
        R"({"tweet_id":"1","user_id":"a","timestamp":1,"text":5,"retweet_of":null,"reply_to":null,"lang":null})",
        R"([1,2,3])",
    };
    for (const auto& b : bad) CHECK_FALSE(parse_record_line(b).has_value());
    CHECK(parse_record_line(R"({"tweet_id":"1","user_id":"a","timestamp":0,"text":"","retweet_of":null,"reply_to":null,"lang":null})"));
}

TEST_CASE("missing file is an input error")
{
    CHECK_THROWS_AS(parse_records(std::string("/nonexistent/tweets.jsonl")), InputError);
}

TEST_CASE("records round-trip through JSON lines")
{
    std::vector<TweetRecord> recs = {tweet("1", "a", 10, "héllo \"climate\"\n😀"), retweet("2", "b", 11, "1")};
    recs[1].lang.reset();
    recs[0].reply_to = "0";
    std::ostringstream out;
    write_records(out, recs);
    std::istringstream in(out.str());
    const auto p = parse_records(in);
    CHECK(p.records == recs);
}

TEST_CASE("parallel parsing matches serial parsing")
{
    std::string s;
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto id = std::to_string(rng.index(400));
        s += (rng.bernoulli(0.05) ? std::string("{broken") : line(id, "u" + std::to_string(i), i)) + "\n";
    }
    std::istringstream a(s), b(s);
    const auto serial = parse_records(a, 1);
    const auto parallel = parse_records(b, 8);
    CHECK(serial.records == parallel.records);
    CHECK(serial.report.malformed == parallel.report.malformed);
    CHECK(serial.report.duplicates == parallel.report.duplicates);
}

TEST_CASE("filter: substring, language and replies")
{
    auto keep = tweet("1", "a", 0, "The CLIMATE emergency");
    auto french = tweet("2", "a", 0, "climat climate");
    french.lang = "fr";
    auto no_lang = tweet("3", "a", 0, "climate");
    no_lang.lang.reset();
    auto reply = tweet("4", "a", 0, "climate reply");
    reply.reply_to = "1";
    auto off_topic = tweet("5", "a", 0, "weather");
    const auto r = filter_corpus({keep, french, no_lang, reply, off_topic}, CorpusFilter{});
    REQUIRE(r.topical.size() == 1);
    CHECK(r.topical[0].tweet_id == "1");

    CorpusFilter any_lang;
    any_lang.lang_allow.clear();
    any_lang.exclude_replies = false;
    CHECK(filter_corpus({keep, french, no_lang, reply, off_topic}, any_lang).topical.size() == 4);
}

TEST_CASE("filter: hashtag pairs make users eligible")
{
    const auto hoax = tweet("1", "skep", 0, "climate nonsense #ClimateHoax");
    const auto crisis = tweet("2", "act", 0, "climate #climatecrisis");
    const auto split = tweet("3", "neither", 0, "climate #climate #crisis");
    const auto r = filter_corpus({hoax, crisis, split}, CorpusFilter{});
    CHECK(r.eligible_users == std::set<std::string>{"act", "skep"});
    CHECK(r.users_by_pair[0] == std::set<std::string>{"act"});
    CHECK(r.users_by_pair[1] == std::set<std::string>{"skep"});
    CHECK(hashtag_matches_pair("#CrisisClimate", {"climate", "crisis"}));
    CHECK_FALSE(hashtag_matches_pair("climatecrisis", {"climate", "crisis"}));
}

TEST_CASE("filter: retweets are judged by their origin's text")
{
    const auto origin = tweet("1", "a", 0, "climate talk #ClimateCrisis");
    const auto rt = retweet("2", "b", 1, "1", "RT truncated…");
    const auto orphan = retweet("3", "c", 1, "missing", "RT weather");
    const auto r = filter_corpus({origin, rt, orphan}, CorpusFilter{});
    REQUIRE(r.topical.size() == 2);
    CHECK(r.topical[1].tweet_id == "2");
    CHECK(r.eligible_users.count("b"));
}

TEST_CASE("filter: invalid configuration")
{
    CorpusFilter f;
    f.substring.clear();
    CHECK_THROWS_AS(f.validate(), InputError);
    CorpusFilter g;
    g.seed_hashtag_pairs = {{"Climate", "crisis"}};
    CHECK_THROWS_AS(g.validate(), InputError);
}

TEST_CASE("filter is idempotent on random corpora")
{
    const std::vector<std::string> texts = {"climate #ClimateHoax", "CLIMATE now", "weather", "#climatecrisis",
                                            "climate #Crisis"};
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(seed);
        std::vector<TweetRecord> recs;
        for (int i = 0; i < 60; ++i) {
            const std::string id = "t" + std::to_string(i);
            TweetRecord r = tweet(id, "u" + std::to_string(rng.index(10)), static_cast<std::int64_t>(rng.index(100)),
                                  texts[rng.index(texts.size())]);
            if (i > 0 && rng.bernoulli(0.5)) r.retweet_of = "t" + std::to_string(rng.index(static_cast<std::uint64_t>(i)) );
            if (rng.bernoulli(0.1)) r.reply_to = "t0";
            if (rng.bernoulli(0.1)) r.lang = "de";
            if (rng.bernoulli(0.05)) r.lang.reset();
            recs.push_back(r);
        }
        const auto once = filter_corpus(recs, CorpusFilter{});
        const auto twice = filter_corpus(once.topical, CorpusFilter{});
        CHECK(once.topical == twice.topical);
        CHECK(once.eligible_users == twice.eligible_users);
    }
}

TEST_CASE("filter: kept retweets point at the resolved origin")
{
    auto mid = retweet("r1", "u", 1, "O");
    mid.reply_to = "x"; // dropped as a reply
    const auto r = filter_corpus({tweet("O", "a", 0, "climate"), mid, retweet("r2", "v", 2, "r1")}, CorpusFilter{});
    REQUIRE(r.topical.size() == 2);
    CHECK(*r.topical[1].retweet_of == "O");
}

TEST_CASE("cascade: retweets sorted by time then id")
{
    const auto set = build_cascades({tweet("O", "a", 0), retweet("r1", "u", 5, "O"), retweet("r2", "v", 3, "O")});
    REQUIRE(set.cascades.size() == 1);
    const auto& c = set.cascades[0];
    REQUIRE(c.retweets.size() == 2);
    CHECK(c.retweets[0].user_id == "v");
    CHECK(c.retweets[1].user_id == "u");
}

TEST_CASE("cascade: repeated retweets collapse to the earliest")
{
    const auto set = build_cascades({tweet("O", "a", 0), retweet("r1", "u", 9, "O"), retweet("r2", "u", 3, "O")});
    REQUIRE(set.cascades[0].retweets.size() == 1);
    CHECK(set.cascades[0].retweets[0].timestamp == 3);
    CHECK(set.report.collapsed_repeats == 1);
}

TEST_CASE("cascade: missing origin becomes a flagged stub")
{
    const auto set = build_cascades({retweet("r1", "u", 7, "gone"), retweet("r2", "v", 4, "gone")});
    REQUIRE(set.cascades.size() == 1);
    const auto& c = set.cascades[0];
    CHECK(c.stub_origin);
    CHECK(c.origin.tweet_id == "gone");
    CHECK(c.origin.timestamp == 4);
    CHECK(set.report.stub_origins == 1);
}

TEST_CASE("cascade: chains resolve to the ultimate origin; loops are dropped")
{
    const auto set = build_cascades({tweet("O", "a", 0), retweet("r1", "u", 1, "O"), retweet("r2", "v", 2, "r1"),
                                     retweet("x", "p", 1, "y"), retweet("y", "q", 1, "x")});
    REQUIRE(set.cascades.size() == 1);
    REQUIRE(set.cascades[0].retweets.size() == 2);
    for (const auto& rt : set.cascades[0].retweets) CHECK(*rt.retweet_of == "O");
    CHECK(set.report.unresolvable == 2);
}

TEST_CASE("cascade: inversions are kept, clamped and flagged")
{
    const auto set = build_cascades({tweet("O", "a", 10), retweet("r1", "u", 12, "O"), retweet("r2", "v", 5, "O")});
    const auto& c = set.cascades[0];
    CHECK(c.timestamp_inversion);
    REQUIRE(c.retweets.size() == 2);
    CHECK(c.retweets[0].user_id == "v"); // clamped to 10, ahead of u at 12
    CHECK(c.effective_time(c.retweets[0]) == 10);
}

TEST_CASE("cascade: author retweeting their own tweet is dropped")
{
    const auto set = build_cascades({tweet("O", "a", 0), retweet("r1", "a", 1, "O")});
    CHECK(set.cascades[0].retweets.empty());
    CHECK(set.report.self_retweets == 1);
}

TEST_CASE("cascade invariants on random corpora")
{
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        Rng rng(seed + 100);
        std::vector<TweetRecord> recs;
        for (int i = 0; i < 80; ++i) {
            TweetRecord r = tweet("t" + std::to_string(i), "u" + std::to_string(rng.index(12)),
                                  static_cast<std::int64_t>(rng.index(50)));
            if (rng.bernoulli(0.7)) r.retweet_of = "t" + std::to_string(rng.index(90)); // may dangle or loop
            if (r.retweet_of && *r.retweet_of == r.tweet_id) r.retweet_of.reset();
            recs.push_back(r);
        }
        const auto set = build_cascades(recs);
        std::size_t total = 0, stub_retweets = 0;
        for (const auto& c : set.cascades) {
            std::set<std::string> users;
            for (std::size_t k = 0; k < c.retweets.size(); ++k) {
                const auto& rt = c.retweets[k];
                CHECK(*rt.retweet_of == c.origin.tweet_id);
                CHECK(users.insert(rt.user_id).second);
                if (k > 0) {
                    const auto& prev = c.retweets[k - 1];
                    CHECK(std::pair(c.effective_time(prev), prev.tweet_id) < std::pair(c.effective_time(rt), rt.tweet_id));
                }
            }
            if (c.stub_origin) stub_retweets += c.retweets.size();
            else total += 1 + c.retweets.size();
        }
        CHECK(total + stub_retweets <= recs.size());
        CHECK(std::is_sorted(set.cascades.begin(), set.cascades.end(),
                             [](const Cascade& a, const Cascade& b) { return a.origin.tweet_id < b.origin.tweet_id; }));
    }
}

}
