#include <viralscope/ingest.hpp>

#include <fstream>
#include <tuple>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include <viralscope/common.hpp>
#include <viralscope/text.hpp>

namespace viralscope {

using nlohmann::json;

namespace {

// Missing and null both mean "absent"; any other non-string type is malformed.
bool read_optional_string(const json& obj, const char* key, std::optional<std::string>& out)
{
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        out.reset();
        return true;
    }
    if (!it->is_string()) return false;
    out = it->get<std::string>();
    return !out->empty();
}

bool read_string(const json& obj, const char* key, std::string& out)
{
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

} // namespace

std::optional<TweetRecord> parse_record_line(const std::string& line)
{
    const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) return std::nullopt;

    TweetRecord r;
    if (!read_string(obj, "tweet_id", r.tweet_id) || r.tweet_id.empty()) return std::nullopt;
    if (!read_string(obj, "user_id", r.user_id) || r.user_id.empty()) return std::nullopt;
    if (!read_string(obj, "text", r.text)) return std::nullopt;

    const auto ts = obj.find("timestamp");
    if (ts == obj.end() || !ts->is_number_integer()) return std::nullopt;
    r.timestamp = ts->get<std::int64_t>();
    if (r.timestamp < 0) return std::nullopt;

    if (!read_optional_string(obj, "retweet_of", r.retweet_of)) return std::nullopt;
    if (!read_optional_string(obj, "reply_to", r.reply_to)) return std::nullopt;
    if (!read_optional_string(obj, "lang", r.lang)) return std::nullopt;
    if (r.retweet_of && *r.retweet_of == r.tweet_id) return std::nullopt;
    return r;
}

ParsedRecords parse_records(std::istream& in, int workers)
{
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
    }

    std::vector<std::optional<TweetRecord>> parsed(lines.size());
    parallel_for(lines.size(), workers, [&](std::size_t i) {
        if (lines[i].find_first_not_of(" \t") != std::string::npos)
            parsed[i] = parse_record_line(lines[i]);
    });

    ParsedRecords out;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
        ++out.report.lines;
        if (!parsed[i]) {
            ++out.report.malformed;
            continue;
        }
        if (!seen.insert(parsed[i]->tweet_id).second) {
            ++out.report.duplicates;
            continue;
        }
        out.records.push_back(std::move(*parsed[i]));
    }
    out.report.records = out.records.size();
    return out;
}

ParsedRecords parse_records(const std::string& path, int workers)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read tweet records: " + path);
    return parse_records(in, workers);
}

std::string record_to_json(const TweetRecord& r)
{
    auto opt = [](const std::optional<std::string>& v) -> json {
        return v ? json(*v) : json(nullptr);
    };
    // ordered_json keeps the documented key order in the output file.
    nlohmann::ordered_json obj;
    obj["tweet_id"] = r.tweet_id;
    obj["user_id"] = r.user_id;
    obj["timestamp"] = r.timestamp;
    obj["text"] = r.text;
    obj["retweet_of"] = opt(r.retweet_of);
    obj["reply_to"] = opt(r.reply_to);
    obj["lang"] = opt(r.lang);
    return obj.dump();
}

void write_records(std::ostream& out, const std::vector<TweetRecord>& records)
{
    for (const auto& r : records) out << record_to_json(r) << '\n';
}

void CorpusFilter::validate() const
{
    if (substring.empty()) throw InputError("corpus filter substring must be nonempty");
    for (const auto& p : seed_hashtag_pairs) {
        if (p.base.empty() || p.qualifier.empty())
            throw InputError("seed hashtag stems must be nonempty");
        if (to_lower_ascii(p.base) != p.base || to_lower_ascii(p.qualifier) != p.qualifier)
            throw InputError("seed hashtag stems must be lowercase: " + p.base + "+" + p.qualifier);
    }
}

bool hashtag_matches_pair(const std::string& text, const HashtagPair& pair)
{
    for (const auto& tag : find_hashtags(text)) {
        const std::string lower = to_lower_ascii(tag);
        if (lower.find(pair.base) != std::string::npos &&
            lower.find(pair.qualifier) != std::string::npos)
            return true;
    }
    return false;
}

namespace {

using RecordIndex = std::unordered_map<std::string, const TweetRecord*>;

RecordIndex index_records(const std::vector<TweetRecord>& records)
{
    RecordIndex idx;
    idx.reserve(records.size());
    for (const auto& r : records) idx.emplace(r.tweet_id, &r);
    return idx;
}

enum class ChainEnd { origin, missing, cycle };

struct ChainResult {
    ChainEnd end;
    std::string origin_id;
};

// Follows retweet_of links until a record without one, an absent id, or a loop.
ChainResult resolve_chain(const TweetRecord& r, const RecordIndex& idx)
{
    std::unordered_set<std::string> visited{r.tweet_id};
    std::string cur = *r.retweet_of;
    while (true) {
        const auto it = idx.find(cur);
        if (it == idx.end()) return {ChainEnd::missing, cur};
        if (!it->second->retweet_of) return {ChainEnd::origin, cur};
        if (!visited.insert(cur).second) return {ChainEnd::cycle, {}};
        cur = *it->second->retweet_of;
    }
}

} // namespace

FilterResult filter_corpus(const std::vector<TweetRecord>& records, const CorpusFilter& filter)
{
    filter.validate();
    const RecordIndex idx = index_records(records);

    // A retweet inherits text, language and reply status from its origin when
    // the origin is in the corpus; otherwise its own fields are used. Kept
    // retweets are re-pointed at that origin, so intermediate retweets that
    // fail the filter cannot break the chain on a second pass.
    FilterResult out;
    out.users_by_pair.resize(filter.seed_hashtag_pairs.size());
    for (const auto& r : records) {
        const TweetRecord* eff_ptr = &r;
        std::optional<std::string> origin_id;
        if (r.retweet_of) {
            ChainResult chain = resolve_chain(r, idx);
            if (chain.end == ChainEnd::origin) {
                eff_ptr = idx.at(chain.origin_id);
                origin_id = std::move(chain.origin_id);
            }
        }
        const TweetRecord& eff = *eff_ptr;
        if (filter.exclude_replies && (r.reply_to || eff.reply_to)) continue;
        if (!filter.lang_allow.empty() && (!eff.lang || !filter.lang_allow.count(*eff.lang)))
            continue;
        if (!contains_ci(eff.text, filter.substring)) continue;
        out.topical.push_back(r);
        if (origin_id) out.topical.back().retweet_of = origin_id;

        for (std::size_t p = 0; p < filter.seed_hashtag_pairs.size(); ++p) {
            const auto& pair = filter.seed_hashtag_pairs[p];
            if (hashtag_matches_pair(eff.text, pair) || hashtag_matches_pair(r.text, pair)) {
                out.users_by_pair[p].insert(r.user_id);
                out.eligible_users.insert(r.user_id);
            }
        }
    }
    return out;
}

CascadeSet build_cascades(const std::vector<TweetRecord>& records)
{
    const RecordIndex idx = index_records(records);
    CascadeSet out;

    std::map<std::string, Cascade> by_origin;
    for (const auto& r : records) {
        if (!r.retweet_of) {
            by_origin[r.tweet_id].origin = r;
        }
    }

    std::map<std::string, std::vector<const TweetRecord*>> pending;
    for (const auto& r : records) {
        if (!r.retweet_of) continue;
        const ChainResult chain = resolve_chain(r, idx);
        if (chain.end == ChainEnd::cycle) {
            ++out.report.unresolvable;
            continue;
        }
        pending[chain.origin_id].push_back(&r);
    }

    for (auto& [origin_id, rts] : pending) {
        auto it = by_origin.find(origin_id);
        if (it == by_origin.end()) {
            Cascade stub;
            stub.origin.tweet_id = origin_id;
            stub.origin.timestamp = (*std::min_element(rts.begin(), rts.end(),
                                                       [](auto* a, auto* b) {
                                                           return a->timestamp < b->timestamp;
                                                       }))->timestamp;
            stub.stub_origin = true;
            it = by_origin.emplace(origin_id, std::move(stub)).first;
            ++out.report.stub_origins;
        }
        Cascade& c = it->second;

        // Earliest retweet per user wins; the author's own retweets are dropped.
        std::map<std::string, const TweetRecord*> first_by_user;
        for (const TweetRecord* rt : rts) {
            if (!c.stub_origin && rt->user_id == c.origin.user_id) {
                ++out.report.self_retweets;
                continue;
            }
            auto [pos, inserted] = first_by_user.emplace(rt->user_id, rt);
            if (!inserted) {
                ++out.report.collapsed_repeats;
                const TweetRecord* prev = pos->second;
                if (std::tie(rt->timestamp, rt->tweet_id) < std::tie(prev->timestamp, prev->tweet_id))
                    pos->second = rt;
            }
        }
        for (const auto& [user, rt] : first_by_user) {
            c.retweets.push_back(*rt);
            c.retweets.back().retweet_of = origin_id; // chains point at the ultimate origin
            if (rt->timestamp < c.origin.timestamp) {
                c.timestamp_inversion = true;
                ++out.report.inversions;
            }
        }
        std::sort(c.retweets.begin(), c.retweets.end(),
                  [&c](const TweetRecord& a, const TweetRecord& b) {
                      const auto ta = c.effective_time(a), tb = c.effective_time(b);
                      return std::tie(ta, a.tweet_id) < std::tie(tb, b.tweet_id);
                  });
    }

    out.cascades.reserve(by_origin.size());
    for (auto& [id, c] : by_origin) out.cascades.push_back(std::move(c));
    out.report.cascades = out.cascades.size();
    return out;
}

} // namespace viralscope
