#include <doctest.h>

#include <viralscope/text.hpp>

using namespace viralscope;

TEST_SUITE("text") {

TEST_CASE("case-insensitive containment")
{
    CHECK(contains_ci("The CLIMATE emergency", "climate"));
    CHECK(contains_ci("climate", "CLIMATE"));
    CHECK_FALSE(contains_ci("clim ate", "climate"));
    CHECK(contains_ci("anything", ""));
    CHECK(to_lower_ascii("AbC-Ü") == "abc-Ü");
}

TEST_CASE("utf8 decoding")
{
    std::size_t len = 0;
    CHECK(decode_utf8("a", 0, len) == U'a');
    CHECK(len == 1);
    CHECK(decode_utf8("é", 0, len) == U'é');
    CHECK(len == 2);
    CHECK(decode_utf8("😀", 0, len) == U'😀');
    CHECK(len == 4);
    const std::string truncated = std::string("\xE2\x82");
    CHECK(decode_utf8(truncated, 0, len) == U'�');
    CHECK(len == 1);
}

TEST_CASE("word runs")
{
    CHECK(word_run_length("abc def", 0) == 3);
    CHECK(word_run_length("abc def", 3) == 0);
    CHECK(word_run_length("naïve!", 0) == std::string("naïve").size());
    CHECK(is_word_codepoint(U'_'));
    CHECK_FALSE(is_word_codepoint(U'😀'));
    CHECK_FALSE(is_word_codepoint(U'’')); // right single quote
}

TEST_CASE("marked tokens")
{
    const auto tags = find_hashtags("#ClimateCrisis is #real, # not, #a_b!");
    REQUIRE(tags.size() == 3);
    CHECK(tags[0] == "ClimateCrisis");
    CHECK(tags[1] == "real");
    CHECK(tags[2] == "a_b");
    CHECK(find_marked_tokens("@bob and @ alice", '@') == std::vector<std::string>{"bob"});
}

TEST_CASE("url stripping")
{
    CHECK(strip_urls("see https://t.co/abc now") == "see   now"); // replaced by a space
    CHECK(strip_urls("no links") == "no links");
    CHECK(strip_urls("http://x") == " ");
}

}
