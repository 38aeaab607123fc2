#include <viralscope/labels.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <viralscope/common.hpp>
#include <viralscope/csv.hpp>
#include <viralscope/text.hpp>

namespace viralscope {

CoderSheet read_coder_sheet(const std::string& path, std::string coder_id)
{
    const auto tab = csv::read_table(path);
    if (tab.header.empty() || tab.header[0] != "tweet_id")
        throw InputError(path + ": first column must be tweet_id");
    CoderSheet sheet;
    sheet.coder_id = std::move(coder_id);
    sheet.features.assign(tab.header.begin() + 1, tab.header.end());
    for (const auto& row : tab.rows) {
        std::vector<std::uint8_t> v;
        v.reserve(row.size() - 1);
        for (std::size_t j = 1; j < row.size(); ++j) {
            if (row[j] != "0" && row[j] != "1")
                throw InputError(path + ": label for " + row[0] + " must be 0 or 1, got '" + row[j] + "'");
            v.push_back(row[j] == "1");
        }
        if (!sheet.rows.emplace(row[0], std::move(v)).second)
            throw InputError(path + ": duplicate tweet_id " + row[0]);
    }
    return sheet;
}

void write_coder_sheet(std::ostream& out, const CoderSheet& sheet)
{
    out << "tweet_id";
    for (const auto& f : sheet.features) out << ',' << f;
    out << '\n';
    for (const auto& [id, v] : sheet.rows) {
        out << id;
        for (auto x : v) out << ',' << static_cast<int>(x);
        out << '\n';
    }
}

namespace {

void check_compatible(const std::vector<CoderSheet>& sheets)
{
    if (sheets.size() < 2) throw InputError("need at least two coder sheets");
    const CoderSheet& ref = sheets.front();
    std::ostringstream diff;
    for (std::size_t k = 1; k < sheets.size(); ++k) {
        const CoderSheet& s = sheets[k];
        if (s.features != ref.features)
            diff << "  " << s.coder_id << ": feature list differs from " << ref.coder_id << '\n';
        for (const auto& [id, _] : ref.rows)
            if (!s.rows.count(id)) diff << "  " << s.coder_id << ": missing tweet " << id << '\n';
        for (const auto& [id, _] : s.rows)
            if (!ref.rows.count(id)) diff << "  " << ref.coder_id << ": missing tweet " << id << '\n';
    }
    const std::string d = diff.str();
    if (!d.empty()) throw InputError("coder sheets do not match:\n" + d);
}

} // namespace

Adjudication majority_vote(const std::vector<CoderSheet>& sheets)
{
    check_compatible(sheets);
    Adjudication out;
    out.features = sheets.front().features;
    const std::size_t m = sheets.size();
    std::size_t cells = 0, unanimous = 0;
    for (const auto& [id, ref] : sheets.front().rows) {
        std::vector<std::uint8_t> v(ref.size());
        for (std::size_t j = 0; j < ref.size(); ++j) {
            std::size_t ones = 0;
            for (const auto& s : sheets) ones += s.rows.at(id)[j];
            ++cells;
            if (ones == 0 || ones == m) ++unanimous;
            if (2 * ones == m) ++out.tie_cells;
            v[j] = 2 * ones > m;
        }
        out.labels.emplace(id, std::move(v));
    }
    out.consensus_rate = cells ? static_cast<double>(unanimous) / static_cast<double>(cells) : 1.0;
    return out;
}

double krippendorff_alpha(const std::vector<CoderSheet>& sheets)
{
    check_compatible(sheets);
    const double m = static_cast<double>(sheets.size());
    // With two categories the coincidence matrix is fixed by the off-diagonal
    // mass o01 = sum over cells of n0*n1/(m-1) (each ordered pair direction)
    // and the category totals n0, n1.
    double o01 = 0.0, n1 = 0.0, n = 0.0;
    for (const auto& [id, ref] : sheets.front().rows) {
        for (std::size_t j = 0; j < ref.size(); ++j) {
            double ones = 0.0;
            for (const auto& s : sheets) ones += s.rows.at(id)[j];
            const double zeros = m - ones;
            o01 += ones * zeros / (m - 1.0);
            n1 += ones;
            n += m;
        }
    }
    const double n0 = n - n1;
    const double expected = 2.0 * n0 * n1 / (n - 1.0);
    if (expected == 0.0) return 1.0;
    return 1.0 - (2.0 * o01) / expected;
}

MarkCounts extract_marks(std::string_view text)
{
    return {find_marked_tokens(text, '#').size(), find_marked_tokens(text, '@').size()};
}

std::vector<std::string> FeatureMatrix::authors() const
{
    std::set<std::string> s;
    for (const auto& r : rows) s.insert(r.author_id);
    return {s.begin(), s.end()};
}

FeatureMatrixResult build_feature_matrix(const Adjudication& labels,
                                         const std::map<std::string, TweetInfo>& tweets,
                                         const std::vector<ViralityEstimate>& virality, int group,
                                         const std::vector<std::string>& features,
                                         std::size_t min_author_tweets)
{
    std::vector<std::size_t> cols;
    for (const auto& f : features) {
        const auto it = std::find(labels.features.begin(), labels.features.end(), f);
        if (it == labels.features.end()) throw InputError("feature not in label sheets: " + f);
        cols.push_back(static_cast<std::size_t>(it - labels.features.begin()));
    }
    std::map<std::string, const ViralityEstimate*> score;
    for (const auto& e : virality) score.emplace(e.tweet_id, &e);

    FeatureMatrixResult res;
    res.matrix.group = group;
    res.matrix.binary_names = features;
    std::vector<FeatureRow> candidates;
    for (const auto& [id, lab] : labels.labels) {
        ++res.report.labeled;
        const auto sc = score.find(id);
        if (sc == score.end()) {
            ++res.report.unscored;
            continue;
        }
        const ViralityEstimate& e = *sc->second;
        if (e.boundary == Boundary::zero_successes || !std::isfinite(e.ln_r)) {
            ++res.report.zero_successes;
            continue;
        }
        if (e.group != group) {
            ++res.report.other_group;
            continue;
        }
        const auto info = tweets.find(id);
        if (info == tweets.end()) throw InputError("labeled tweet missing from corpus: " + id);
        FeatureRow row;
        row.tweet_id = id;
        row.author_id = info->second.author;
        row.group = group;
        for (auto c : cols) row.binary.push_back(lab[c]);
        const MarkCounts mc = extract_marks(info->second.text);
        row.hashtags = mc.hashtags;
        row.mentions = mc.mentions;
        row.response = e.ln_r;
        candidates.push_back(std::move(row));
    }

    std::map<std::string, std::size_t> per_author;
    for (const auto& r : candidates) ++per_author[r.author_id];
    for (auto& r : candidates) {
        if (per_author[r.author_id] < min_author_tweets) {
            ++res.report.author_filtered;
            continue;
        }
        res.matrix.rows.push_back(std::move(r));
    }
    return res;
}

void write_features_csv(std::ostream& out, const FeatureMatrix& m)
{
    out << "tweet_id,author_id,group";
    for (const auto& f : m.binary_names) out << ',' << f;
    out << ",hashtags,mentions,response\n";
    for (const auto& r : m.rows) {
        out << r.tweet_id << ',' << r.author_id << ',' << r.group;
        for (auto x : r.binary) out << ',' << static_cast<int>(x);
        out << ',' << r.hashtags << ',' << r.mentions << ',' << csv::format_double(r.response) << '\n';
    }
}

FeatureMatrix read_features_csv(const std::string& path)
{
    const auto tab = csv::read_table(path);
    const auto& h = tab.header;
    if (h.size() < 6 || h[0] != "tweet_id" || h[1] != "author_id" || h[2] != "group" ||
        h[h.size() - 3] != "hashtags" || h[h.size() - 2] != "mentions" || h.back() != "response")
        throw InputError(path + ": unexpected features.csv header");
    FeatureMatrix m;
    m.binary_names.assign(h.begin() + 3, h.end() - 3);
    for (const auto& row : tab.rows) {
        FeatureRow r;
        r.tweet_id = row[0];
        r.author_id = row[1];
        r.group = static_cast<int>(csv::parse_int(row[2], "group"));
        for (std::size_t j = 3; j + 3 < row.size(); ++j) {
            const auto v = csv::parse_int(row[j], h[j]);
            if (v != 0 && v != 1) throw InputError(path + ": binary feature must be 0/1");
            r.binary.push_back(static_cast<std::uint8_t>(v));
        }
        r.hashtags = static_cast<std::size_t>(csv::parse_int(row[row.size() - 3], "hashtags"));
        r.mentions = static_cast<std::size_t>(csv::parse_int(row[row.size() - 2], "mentions"));
        r.response = csv::parse_double(row.back(), "response");
        m.group = r.group;
        m.rows.push_back(std::move(r));
    }
    return m;
}

} // namespace viralscope
