#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <viralscope/ingest.hpp>

namespace viralscope {

/// Undirected co-retweet graph. Node ids are sorted; edges are (lo, hi)
/// index pairs, sorted and unique.
class RetweetNetwork {
public:
    RetweetNetwork() = default;

    /// Builds from named endpoints. Self-loops and repeats collapse; endpoints
    /// not in `nodes` throw InputError.
    RetweetNetwork(std::vector<std::string> nodes,
                   const std::vector<std::pair<std::string, std::string>>& edges);

    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    std::optional<int> index_of(std::string_view id) const;
    bool has_edge(std::string_view a, std::string_view b) const;

    /// Sorted neighbour lists by node index.
    std::vector<std::vector<int>> adjacency() const;

    /// Subgraph induced on the given node indices.
    RetweetNetwork induced(const std::vector<int>& keep) const;

private:
    std::vector<std::string> nodes_;
    std::vector<std::pair<int, int>> edges_;
};

/// Nodes are the eligible users; an edge joins a retweeter and the origin
/// author whenever both are eligible and distinct.
RetweetNetwork build_retweet_network(const std::vector<Cascade>& cascades,
                                     const std::set<std::string>& eligible_users);

/// Largest connected component; ties go to the component holding the
/// lexicographically smallest id.
RetweetNetwork largest_component(const RetweetNetwork& net);

/// Directed follow graph over a fixed universe. An edge follower -> followee
/// means the followee's posts reach the follower.
class FollowerNetwork {
public:
    FollowerNetwork() = default;

    /// `edges` are (follower, followee) indices into `users`, which must be
    /// sorted and unique. Duplicates and self-loops are discarded.
    FollowerNetwork(std::vector<std::string> users, std::vector<std::pair<int, int>> edges);

    const std::vector<std::string>& users() const { return users_; }
    std::size_t user_count() const { return users_.size(); }
    std::size_t edge_count() const { return followee_adj_.size(); }
    std::optional<int> index_of(std::string_view id) const;

    std::span<const int> followees_of(int user) const;
    std::span<const int> followers_of(int user) const;
    bool follows(int follower, int followee) const;

private:
    std::vector<std::string> users_;
    std::vector<std::size_t> followee_off_, follower_off_;
    std::vector<int> followee_adj_, follower_adj_;
};

struct FollowerLoadReport {
    std::size_t rows = 0;
    std::size_t kept = 0;
    std::size_t duplicates = 0;
    std::size_t unknown_endpoint = 0;
    std::size_t self_loops = 0;
};

struct LoadedFollowerNetwork {
    FollowerNetwork network;
    FollowerLoadReport report;
};

/// Reads edges.csv ("follower,followee"), keeping edges inside `universe`.
LoadedFollowerNetwork build_follower_network(std::istream& in, const std::set<std::string>& universe);
LoadedFollowerNetwork build_follower_network(const std::string& path,
                                             const std::set<std::string>& universe);

} // namespace viralscope
