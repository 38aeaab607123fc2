#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <viralscope/common.hpp>
#include <viralscope/labels.hpp>
#include <viralscope/rng.hpp>

#include "helpers.hpp"

using namespace viralscope;

namespace {

CoderSheet sheet(std::string id, std::vector<std::string> features,
                 std::vector<std::pair<std::string, std::vector<std::uint8_t>>> rows)
{
    CoderSheet s;
    s.coder_id = std::move(id);
    s.features = std::move(features);
    for (auto& [t, v] : rows) s.rows[t] = v;
    return s;
}

// Textbook coincidence-matrix alpha for nominal data, written independently
// of the library: o[c][k] accumulates 1/(m-1) per ordered pair of coders.
double coincidence_alpha(const std::vector<CoderSheet>& sheets)
{
    double o[2][2] = {{0, 0}, {0, 0}};
    const auto& ref = sheets.front();
    for (const auto& [id, _] : ref.rows)
        for (std::size_t f = 0; f < ref.features.size(); ++f) {
            std::vector<int> vals;
            for (const auto& s : sheets) vals.push_back(s.rows.at(id)[f]);
            const double m = static_cast<double>(vals.size());
            for (std::size_t i = 0; i < vals.size(); ++i)
                for (std::size_t j = 0; j < vals.size(); ++j)
                    if (i != j) o[vals[i]][vals[j]] += 1.0 / (m - 1.0);
        }
    const double n0 = o[0][0] + o[0][1], n1 = o[1][0] + o[1][1], n = n0 + n1;
    const double d_o = o[0][1] + o[1][0];
    const double d_e = (n0 * n1 + n1 * n0) / (n - 1.0);
    return d_e == 0.0 ? 1.0 : 1.0 - d_o / d_e;
}

} // namespace

TEST_SUITE("labels") {

TEST_CASE("majority vote and consensus")
{
    const std::vector<std::string> f = {"x", "y"};
    const auto a = sheet("a", f, {{"t1", {1, 0}}, {"t2", {1, 1}}});
    const auto b = sheet("b", f, {{"t1", {1, 0}}, {"t2", {0, 1}}});
    const auto c = sheet("c", f, {{"t1", {0, 0}}, {"t2", {1, 1}}});
    const auto adj = majority_vote({a, b, c});
    CHECK(adj.labels.at("t1") == std::vector<std::uint8_t>{1, 0});
    CHECK(adj.labels.at("t2") == std::vector<std::uint8_t>{1, 1});
    CHECK(adj.consensus_rate == doctest::Approx(0.5));
    CHECK(majority_vote({a, a, a}).consensus_rate == 1.0);

    // Coder order does not matter.
    const auto adj2 = majority_vote({c, a, b});
    CHECK(adj2.labels == adj.labels);
    CHECK(adj2.consensus_rate == adj.consensus_rate);
}

TEST_CASE("even coder ties resolve to 0 and are counted")
{
    const std::vector<std::string> f = {"x"};
    const auto adj = majority_vote({sheet("a", f, {{"t", {1}}}), sheet("b", f, {{"t", {0}}})});
    CHECK(adj.labels.at("t") == std::vector<std::uint8_t>{0});
    CHECK(adj.tie_cells == 1);
}

TEST_CASE("mismatched sheets are rejected with a diff")
{
    const auto a = sheet("a", {"x"}, {{"t1", {1}}, {"t2", {0}}});
    const auto b = sheet("b", {"x"}, {{"t1", {1}}, {"t3", {0}}});
    try {
        majority_vote({a, b});
        FAIL("expected an InputError");
    } catch (const InputError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("t2") != std::string::npos);
        CHECK(msg.find("t3") != std::string::npos);
    }
    CHECK_THROWS_AS(majority_vote({a, sheet("b", {"y"}, {{"t1", {1}}, {"t2", {0}}})}), InputError);
    CHECK_THROWS_AS(majority_vote({a}), InputError);
}

TEST_CASE("alpha: perfect agreement and the hand-computed example")
{
    const std::vector<std::string> f = {"x"};
    const auto a = sheet("a", f, {{"1", {0}}, {"2", {1}}, {"3", {0}}, {"4", {1}}});
    const auto b = sheet("b", f, {{"1", {1}}, {"2", {0}}, {"3", {1}}, {"4", {0}}});
    CHECK(krippendorff_alpha({a, a}) == 1.0);
    // n0 = n1 = 4, D_o = 8, D_e = 2*4*4/7 -> alpha = 1 - 8*7/32.
    CHECK(krippendorff_alpha({a, b}) == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(coincidence_alpha({a, b}) == doctest::Approx(-0.75).epsilon(1e-14));
    const auto all_zero = sheet("z", f, {{"1", {0}}, {"2", {0}}, {"3", {0}}, {"4", {0}}});
    CHECK(krippendorff_alpha({all_zero, all_zero, all_zero}) == 1.0);
}

TEST_CASE("alpha matches the coincidence-matrix oracle on random sheets")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const int coders = 2 + static_cast<int>(rng.index(4));
        const std::size_t items = 5 + rng.index(30), feats = 1 + rng.index(6);
        std::vector<std::string> names;
        for (std::size_t f = 0; f < feats; ++f) names.push_back("f" + std::to_string(f));
        std::vector<std::vector<std::uint8_t>> truth(items);
        for (auto& row : truth)
            for (std::size_t f = 0; f < feats; ++f) row.push_back(rng.bernoulli(0.4));
        std::vector<CoderSheet> sheets;
        for (int k = 0; k < coders; ++k) {
            CoderSheet s;
            s.coder_id = "c" + std::to_string(k);
            s.features = names;
            for (std::size_t i = 0; i < items; ++i) {
                auto row = truth[i];
                for (auto& v : row)
                    if (rng.bernoulli(0.2)) v = 1 - v;
                s.rows["t" + std::to_string(i)] = row;
            }
            sheets.push_back(s);
        }
        const double alpha = krippendorff_alpha(sheets);
        CHECK(std::abs(alpha - coincidence_alpha(sheets)) <= 1e-12);
        bool identical = true;
        for (const auto& s : sheets) identical = identical && s.rows == sheets[0].rows;
        CHECK((alpha == 1.0) == identical);
    }
}

TEST_CASE("coder sheet files")
{
    const auto s = sheet("c1", {"x", "y"}, {{"t1", {1, 0}}, {"t2", {0, 1}}});
    const auto dir = testutil::temp_dir("sheets");
    {
        std::ofstream out(dir + "/labels_c1.csv");
        write_coder_sheet(out, s);
    }
    const auto back = read_coder_sheet(dir + "/labels_c1.csv", "c1");
    CHECK(back.rows == s.rows);
    CHECK(back.features == s.features);
    std::ofstream(dir + "/bad.csv") << "tweet_id,x\nt1,2\n";
    CHECK_THROWS_AS(read_coder_sheet(dir + "/bad.csv", "bad"), InputError);
    std::ofstream(dir + "/dup.csv") << "tweet_id,x\nt1,1\nt1,0\n";
    CHECK_THROWS_AS(read_coder_sheet(dir + "/dup.csv", "dup"), InputError);
}

TEST_CASE("hashtag and mention extraction")
{
    CHECK(extract_marks("Join us #ActOnClimate #ClimateStrike @GretaThunberg") == MarkCounts{2, 1});
    CHECK(extract_marks("100% # @ none") == MarkCounts{0, 0});
    CHECK(extract_marks("email me@example.com") == MarkCounts{0, 1});
    // Text between match sites does not change the counts.
    CHECK(extract_marks("lots of words here #a and @b") == extract_marks("#a @b"));
}

TEST_CASE("feature matrix assembly")
{
    Adjudication adj;
    adj.features = {"x", "y", "z"};
    std::map<std::string, TweetInfo> info;
    std::vector<ViralityEstimate> vir;
    auto add = [&](const std::string& id, const std::string& author, int group, double r,
                   Boundary b = Boundary::interior) {
        adj.labels[id] = {1, 0, 1};
        info[id] = TweetInfo{author, "text #tag @who"};
        ViralityEstimate e;
        e.tweet_id = id;
        e.group = group;
        e.r_hat = r;
        e.ln_r = b == Boundary::zero_successes ? NAN : std::log(r);
        e.boundary = b;
        vir.push_back(e);
    };
    for (int i = 0; i < 3; ++i) add("a" + std::to_string(i), "alice", 0, 0.1 * (i + 1));
    for (int i = 0; i < 2; ++i) add("b" + std::to_string(i), "bob", 0, 0.2);
    add("c0", "carol", 1, 0.3);
    add("z0", "alice", 0, 0.0, Boundary::zero_successes);
    adj.labels["u0"] = {0, 0, 0};

    const auto res = build_feature_matrix(adj, info, vir, 0, {"x", "z"}, 3);
    const auto& m = res.matrix;
    REQUIRE(m.rows.size() == 3);
    CHECK(m.authors() == std::vector<std::string>{"alice"});
    CHECK(m.binary_names == std::vector<std::string>{"x", "z"});
    CHECK(m.rows[0].binary == std::vector<std::uint8_t>{1, 1});
    CHECK(m.rows[0].hashtags == 1);
    CHECK(m.rows[0].mentions == 1);
    CHECK(m.rows[1].response == doctest::Approx(std::log(0.2)));
    CHECK(res.report.author_filtered == 2);
    CHECK(res.report.other_group == 1);
    CHECK(res.report.zero_successes == 1);
    CHECK(res.report.unscored == 1);

    CHECK_THROWS_AS(build_feature_matrix(adj, info, vir, 0, {"nope"}, 3), InputError);

    std::ostringstream out;
    write_features_csv(out, m);
    const auto path = testutil::temp_dir("features") + "/features_activist.csv";
    std::ofstream(path) << out.str();
    const auto back = read_features_csv(path);
    REQUIRE(back.rows.size() == 3);
    CHECK(back.binary_names == m.binary_names);
    CHECK(back.rows[2].response == m.rows[2].response);
    CHECK(back.rows[1].author_id == "alice");
}

}
