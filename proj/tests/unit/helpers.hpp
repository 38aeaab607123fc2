#pragma once

#include <optional>
#include <string>
#include <vector>

#include <viralscope/ingest.hpp>

namespace testutil {

inline viralscope::TweetRecord tweet(std::string id, std::string user, std::int64_t ts,
                                     std::string text = "climate #ClimateCrisis")
{
    viralscope::TweetRecord r;
    r.tweet_id = std::move(id);
    r.user_id = std::move(user);
    r.timestamp = ts;
    r.text = std::move(text);
    r.lang = "en";
    return r;
}

inline viralscope::TweetRecord retweet(std::string id, std::string user, std::int64_t ts, std::string of,
                                       std::string text = "RT climate #ClimateCrisis")
{
    auto r = tweet(std::move(id), std::move(user), ts, std::move(text));
    r.retweet_of = std::move(of);
    return r;
}

/// Cascade built through the real cascade builder.
inline viralscope::Cascade cascade(const std::vector<viralscope::TweetRecord>& records)
{
    auto set = viralscope::build_cascades(records);
    return set.cascades.at(0);
}

std::string temp_dir(const std::string& name);

} // namespace testutil
