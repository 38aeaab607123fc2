#include <viralscope/exposure.hpp>

#include <algorithm>
#include <ostream>
#include <unordered_map>

namespace viralscope {

MainGroupChoice main_group(const Cascade& cascade, const PartitionAssignment& assignment)
{
    MainGroupChoice out;
    for (const auto& rt : cascade.retweets)
        if (const auto g = assignment.group_of(rt.user_id)) ++out.retweeters[*g];
    if (out.retweeters[0] + out.retweeters[1] == 0)
        throw UnscorableCascade("unscorable: no classified retweeters for tweet " +
                                cascade.origin.tweet_id);
    if (out.retweeters[0] != out.retweeters[1]) {
        out.group = out.retweeters[0] > out.retweeters[1] ? 0 : 1;
    } else if (const auto g = assignment.group_of(cascade.origin.user_id)) {
        out.group = *g;
    } else {
        out.group = 0;
        out.fallback = true;
    }
    return out;
}

std::string flag_string(unsigned flags)
{
    static constexpr std::pair<unsigned, const char*> names[] = {
        {kStubOrigin, "stub_origin"},
        {kTimestampInversion, "timestamp_inversion"},
        {kGroupFallback, "group_fallback"},
        {kUnexposedIncluded, "unexposed_included"},
        {kAuthorOutsideGroup, "author_outside_group"},
    };
    std::string out;
    for (const auto& [bit, name] : names) {
        if (!(flags & bit)) continue;
        if (!out.empty()) out += '|';
        out += name;
    }
    return out.empty() ? "none" : out;
}

std::vector<int> node_groups(const FollowerNetwork& follow, const PartitionAssignment& assignment)
{
    std::vector<int> out(follow.user_count(), -1);
    for (std::size_t i = 0; i < follow.user_count(); ++i)
        if (const auto g = assignment.group_of(follow.users()[i])) out[i] = *g;
    return out;
}

ExposureLedger build_exposure_ledger(const Cascade& cascade, const FollowerNetwork& follow,
                                     std::span<const int> node_group, int main_group,
                                     const ExposureOptions& options)
{
    ExposureLedger ledger;
    ledger.tweet_id = cascade.origin.tweet_id;
    ledger.origin_author = cascade.origin.user_id;
    ledger.group = main_group;
    if (cascade.stub_origin) ledger.flags |= kStubOrigin;
    if (cascade.timestamp_inversion) ledger.flags |= kTimestampInversion;

    const auto author = cascade.stub_origin ? std::nullopt : follow.index_of(cascade.origin.user_id);
    const int author_idx = author.value_or(-1);
    if (author_idx < 0 || node_group[author_idx] != main_group) ledger.flags |= kAuthorOutsideGroup;

    struct FirstExposure {
        long position; // -1 = the origin tweet, otherwise index into cascade.retweets
        int via;       // follow-network index of the source
    };
    std::unordered_map<int, FirstExposure> first;

    auto expose_followers = [&](int source, long position) {
        for (int f : follow.followers_of(source)) {
            if (node_group[f] != main_group || f == author_idx) continue;
            first.try_emplace(f, FirstExposure{position, source});
        }
    };

    if (author_idx >= 0) expose_followers(author_idx, -1);
    std::vector<std::pair<long, std::optional<int>>> main_retweeters;
    for (std::size_t p = 0; p < cascade.retweets.size(); ++p) {
        const auto idx = follow.index_of(cascade.retweets[p].user_id);
        const bool in_group = idx ? node_group[*idx] == main_group : false;
        if (!in_group) continue;
        main_retweeters.emplace_back(static_cast<long>(p), idx);
        expose_followers(*idx, static_cast<long>(p));
    }

    std::vector<int> success_idx;
    std::vector<int> unexposed_idx;
    for (const auto& [p, idx] : main_retweeters) {
        const auto it = first.find(*idx);
        if (it != first.end() && it->second.position < p) {
            success_idx.push_back(*idx);
        } else {
            unexposed_idx.push_back(*idx);
            if (it != first.end()) first.erase(it);
        }
    }
    std::sort(success_idx.begin(), success_idx.end());
    std::sort(unexposed_idx.begin(), unexposed_idx.end());

    std::vector<int> exposed_idx;
    exposed_idx.reserve(first.size());
    for (const auto& [u, _] : first) exposed_idx.push_back(u);
    std::sort(exposed_idx.begin(), exposed_idx.end());

    const auto& names = follow.users();
    for (int u : exposed_idx) {
        const auto& fe = first.at(u);
        const bool success = std::binary_search(success_idx.begin(), success_idx.end(), u);
        (success ? ledger.successes : ledger.failures).push_back(names[u]);
        ledger.attribution.push_back({names[u], names[fe.via]});
    }
    for (int u : unexposed_idx) ledger.unexposed_successes.push_back(names[u]);

    if (options.include_unexposed_retweeters && !unexposed_idx.empty()) {
        ledger.flags |= kUnexposedIncluded;
        for (int u : unexposed_idx) {
            ledger.successes.push_back(names[u]);
            ledger.attribution.push_back({names[u], ""});
        }
        std::sort(ledger.successes.begin(), ledger.successes.end());
        std::sort(ledger.attribution.begin(), ledger.attribution.end(),
                  [](const Exposure& a, const Exposure& b) { return a.user < b.user; });
    }

    ledger.exposed.reserve(ledger.successes.size() + ledger.failures.size());
    std::merge(ledger.successes.begin(), ledger.successes.end(), ledger.failures.begin(),
               ledger.failures.end(), std::back_inserter(ledger.exposed));
    return ledger;
}

ExposureLedger build_exposure_ledger(const Cascade& cascade, const FollowerNetwork& follow,
                                     const GroupScope& scope, const ExposureOptions& options)
{
    const auto groups = node_groups(follow, *scope.assignment);
    return build_exposure_ledger(cascade, follow, groups, scope.main_group, options);
}

void write_ledger_csv(std::ostream& out, const std::vector<ExposureLedger>& ledgers)
{
    out << "tweet_id,exposed,successes,failures,unexposed_successes,flags\n";
    for (const auto& l : ledgers) {
        out << l.tweet_id << ',' << l.exposed.size() << ',' << l.successes.size() << ','
            << l.failures.size() << ',' << l.unexposed_successes.size() << ','
            << flag_string(l.flags) << '\n';
    }
}

} // namespace viralscope
