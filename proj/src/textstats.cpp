#include <viralscope/textstats.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include <viralscope/text.hpp>

namespace viralscope {

namespace {

bool ends_with(const std::string& s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

std::string stem_plural(const std::string& token)
{
    // Leading '#'/'@' marks are kept and the stem applies to the word part.
    const std::size_t lead = (!token.empty() && (token[0] == '#' || token[0] == '@')) ? 1 : 0;
    std::string w = token.substr(lead);
    if (w.size() > 3 && ends_with(w, "ies") && !ends_with(w, "eies") && !ends_with(w, "aies")) {
        w.replace(w.size() - 3, 3, "y");
    } else if (w.size() > 4 && (ends_with(w, "sses") || ends_with(w, "xes") || ends_with(w, "ches") ||
                                ends_with(w, "shes") || ends_with(w, "zes"))) {
        w.resize(w.size() - 2);
    } else if (w.size() > 2 && ends_with(w, "s") && !ends_with(w, "us") && !ends_with(w, "ss") &&
               !ends_with(w, "is")) {
        w.pop_back();
    }
    return token.substr(0, lead) + w;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options)
{
    const std::string clean = to_lower_ascii(strip_urls(text));
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < clean.size()) {
        const std::size_t run = word_run_length(clean, i);
        if (run == 0) {
            std::size_t len;
            decode_utf8(clean, i, len);
            i += len;
            continue;
        }
        const bool marked = i > 0 && (clean[i - 1] == '#' || clean[i - 1] == '@');
        std::string tok = clean.substr(marked ? i - 1 : i, run + (marked ? 1 : 0));
        if (options.stem) tok = stem_plural(tok);
        out.push_back(std::move(tok));
        i += run;
    }
    return out;
}

namespace {

std::map<std::string, std::size_t> document_counts(const std::vector<std::string>& texts,
                                                   const TokenizerOptions& options)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& t : texts) {
        const auto toks = tokenize(t, options);
        const std::set<std::string> unique(toks.begin(), toks.end());
        for (const auto& tok : unique) ++counts[tok];
    }
    return counts;
}

std::vector<WordDiffRow> ranked(const std::map<std::string, std::size_t>& self,
                                const std::map<std::string, std::size_t>& other, std::size_t top_k)
{
    std::set<std::string> vocab;
    for (const auto& [t, _] : self) vocab.insert(t);
    for (const auto& [t, _] : other) vocab.insert(t);
    std::vector<WordDiffRow> rows;
    rows.reserve(vocab.size());
    for (const auto& t : vocab) {
        WordDiffRow r;
        r.token = t;
        if (auto it = self.find(t); it != self.end()) r.n_self = it->second;
        if (auto it = other.find(t); it != other.end()) r.n_other = it->second;
        r.diff = static_cast<long long>(r.n_self) - static_cast<long long>(r.n_other);
        rows.push_back(std::move(r));
    }
    std::sort(rows.begin(), rows.end(), [](const WordDiffRow& x, const WordDiffRow& y) {
        if (x.diff != y.diff) return x.diff > y.diff;
        return x.token < y.token;
    });
    if (top_k > 0 && rows.size() > top_k) rows.resize(top_k);
    return rows;
}

} // namespace

WordDiffTables word_diff_table(const std::vector<std::string>& group_a_texts,
                               const std::vector<std::string>& group_b_texts, std::size_t top_k,
                               const TokenizerOptions& options)
{
    const auto ca = document_counts(group_a_texts, options);
    const auto cb = document_counts(group_b_texts, options);
    return {ranked(ca, cb, top_k), ranked(cb, ca, top_k)};
}

void write_word_csv(std::ostream& out, const std::vector<WordDiffRow>& rows)
{
    out << "token,n_self,n_other,diff\n";
    for (const auto& r : rows) out << r.token << ',' << r.n_self << ',' << r.n_other << ',' << r.diff << '\n';
}

SpreadResult cross_group_counts(const std::vector<Cascade>& cascades,
                                const PartitionAssignment& assignment, const GroupNames& names,
                                std::size_t threshold)
{
    SpreadResult out;
    out.summary.threshold = threshold;
    for (const auto& c : cascades) {
        SpreadCount sc;
        sc.tweet_id = c.origin.tweet_id;
        for (const auto& rt : c.retweets) {
            const auto g = assignment.group_of(rt.user_id);
            if (!g) continue;
            if (*g == names.activist)
                ++sc.retweeters_activist;
            else
                ++sc.retweeters_skeptic;
        }
        if (sc.retweeters_activist + sc.retweeters_skeptic == 0) continue;
        if (sc.retweeters_activist > threshold && sc.retweeters_skeptic > threshold)
            ++out.summary.cross_spreading;
        out.counts.push_back(std::move(sc));
    }
    std::sort(out.counts.begin(), out.counts.end(),
              [](const SpreadCount& a, const SpreadCount& b) { return a.tweet_id < b.tweet_id; });
    out.summary.tweets = out.counts.size();
    return out;
}

void write_spread_csv(std::ostream& out, const std::vector<SpreadCount>& counts)
{
    out << "tweet_id,retweeters_activist,retweeters_skeptic\n";
    for (const auto& c : counts)
        out << c.tweet_id << ',' << c.retweeters_activist << ',' << c.retweeters_skeptic << '\n';
}

} // namespace viralscope
