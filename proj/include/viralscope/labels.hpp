#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <viralscope/virality.hpp>

namespace viralscope {

/// Binary feature labels from one coder: tweet_id -> one 0/1 per feature.
struct CoderSheet {
    std::string coder_id;
    std::vector<std::string> features;
    std::map<std::string, std::vector<std::uint8_t>> rows;
};

/// Reads labels_<coder>.csv ("tweet_id,<feature1>,..."). Values must be 0 or 1.
CoderSheet read_coder_sheet(const std::string& path, std::string coder_id);
void write_coder_sheet(std::ostream& out, const CoderSheet& sheet);

struct Adjudication {
    std::vector<std::string> features;
    std::map<std::string, std::vector<std::uint8_t>> labels;
    double consensus_rate = 1.0; // fraction of cells where every coder agreed
    std::size_t tie_cells = 0;   // even splits, resolved to 0
};

/// Per-cell majority. Throws InputError listing the differences when the
/// sheets disagree on tweets or features.
Adjudication majority_vote(const std::vector<CoderSheet>& sheets);

/// Nominal Krippendorff's alpha over every (tweet, feature) cell, from the
/// pairable-value counts of each cell. 1.0 when no disagreement is expected.
double krippendorff_alpha(const std::vector<CoderSheet>& sheets);

struct MarkCounts {
    std::size_t hashtags = 0;
    std::size_t mentions = 0;
    bool operator==(const MarkCounts&) const = default;
};

/// '#' or '@' followed by at least one word character.
MarkCounts extract_marks(std::string_view text);

/// Labeled tweet metadata needed for the design matrix.
struct TweetInfo {
    std::string author;
    std::string text;
};

struct FeatureRow {
    std::string tweet_id;
    std::string author_id;
    int group = 0;
    std::vector<std::uint8_t> binary;
    std::size_t hashtags = 0;
    std::size_t mentions = 0;
    double response = 0.0; // ln r_hat
};

/// One group's regression data. Author indicators are implied by author_id;
/// to_design() expands them into a single column group.
struct FeatureMatrix {
    int group = 0;
    std::vector<std::string> binary_names;
    std::vector<FeatureRow> rows; // sorted by tweet_id
    std::vector<std::string> authors() const;
};

struct FeatureBuildReport {
    std::size_t labeled = 0;
    std::size_t zero_successes = 0;   // excluded: boundary estimate without successes
    std::size_t unscored = 0;         // labeled but absent from the virality table
    std::size_t other_group = 0;      // scored in the other group
    std::size_t author_filtered = 0;  // rows of authors below the tweet threshold
};

struct FeatureMatrixResult {
    FeatureMatrix matrix;
    FeatureBuildReport report;
};

/// Rows for tweets scored in `group` whose author has at least
/// `min_author_tweets` such tweets. `features` picks the adjudicated columns
/// used for this group, in order.
FeatureMatrixResult build_feature_matrix(const Adjudication& labels,
                                         const std::map<std::string, TweetInfo>& tweets,
                                         const std::vector<ViralityEstimate>& virality, int group,
                                         const std::vector<std::string>& features,
                                         std::size_t min_author_tweets = 3);

/// "tweet_id,author_id,group,<binary...>,hashtags,mentions,response"
void write_features_csv(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_features_csv(const std::string& path);

} // namespace viralscope
