#include <viralscope/graph.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <queue>

#include <viralscope/common.hpp>
#include <viralscope/csv.hpp>

namespace viralscope {

namespace {

std::optional<int> find_sorted(const std::vector<std::string>& v, std::string_view id)
{
    const auto it = std::lower_bound(v.begin(), v.end(), id,
                                     [](const std::string& a, std::string_view b) { return a < b; });
    if (it == v.end() || *it != id) return std::nullopt;
    return static_cast<int>(it - v.begin());
}

} // namespace

RetweetNetwork::RetweetNetwork(std::vector<std::string> nodes,
                               const std::vector<std::pair<std::string, std::string>>& edges)
    : nodes_(std::move(nodes))
{
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    edges_.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        const auto ia = index_of(a), ib = index_of(b);
        if (!ia || !ib) throw InputError("edge endpoint not in node set: " + a + "," + b);
        if (*ia == *ib) continue;
        edges_.emplace_back(std::min(*ia, *ib), std::max(*ia, *ib));
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

std::optional<int> RetweetNetwork::index_of(std::string_view id) const
{
    return find_sorted(nodes_, id);
}

bool RetweetNetwork::has_edge(std::string_view a, std::string_view b) const
{
    const auto ia = index_of(a), ib = index_of(b);
    if (!ia || !ib) return false;
    const std::pair<int, int> e{std::min(*ia, *ib), std::max(*ia, *ib)};
    return std::binary_search(edges_.begin(), edges_.end(), e);
}

std::vector<std::vector<int>> RetweetNetwork::adjacency() const
{
    std::vector<std::vector<int>> adj(nodes_.size());
    for (const auto& [a, b] : edges_) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& l : adj) std::sort(l.begin(), l.end());
    return adj;
}

RetweetNetwork RetweetNetwork::induced(const std::vector<int>& keep) const
{
    std::vector<int> remap(nodes_.size(), -1);
    std::vector<int> sorted_keep = keep;
    std::sort(sorted_keep.begin(), sorted_keep.end());
    RetweetNetwork out;
    for (int i : sorted_keep) {
        remap[i] = static_cast<int>(out.nodes_.size());
        out.nodes_.push_back(nodes_[i]);
    }
    for (const auto& [a, b] : edges_)
        if (remap[a] >= 0 && remap[b] >= 0) out.edges_.emplace_back(remap[a], remap[b]);
    return out;
}

RetweetNetwork build_retweet_network(const std::vector<Cascade>& cascades,
                                     const std::set<std::string>& eligible_users)
{
    std::vector<std::pair<std::string, std::string>> edges;
    for (const auto& c : cascades) {
        if (c.stub_origin || !eligible_users.count(c.origin.user_id)) continue;
        for (const auto& rt : c.retweets)
            if (eligible_users.count(rt.user_id) && rt.user_id != c.origin.user_id)
                edges.emplace_back(rt.user_id, c.origin.user_id);
    }
    return RetweetNetwork({eligible_users.begin(), eligible_users.end()}, edges);
}

RetweetNetwork largest_component(const RetweetNetwork& net)
{
    const std::size_t n = net.node_count();
    if (n == 0) return {};
    const auto adj = net.adjacency();
    std::vector<int> comp(n, -1);
    std::vector<int> best;
    int ncomp = 0;
    // Nodes are visited in id order, so the first component of a given size
    // found is the one holding the smallest id.
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> members{static_cast<int>(s)};
        comp[s] = ncomp;
        for (std::size_t head = 0; head < members.size(); ++head)
            for (int v : adj[members[head]])
                if (comp[v] < 0) {
                    comp[v] = ncomp;
                    members.push_back(v);
                }
        if (members.size() > best.size()) best = std::move(members);
        ++ncomp;
    }
    return net.induced(best);
}

FollowerNetwork::FollowerNetwork(std::vector<std::string> users, std::vector<std::pair<int, int>> edges)
    : users_(std::move(users))
{
    if (!std::is_sorted(users_.begin(), users_.end()) ||
        std::adjacent_find(users_.begin(), users_.end()) != users_.end())
        throw InputError("follower network universe must be sorted and unique");
    const int n = static_cast<int>(users_.size());
    std::erase_if(edges, [n](const auto& e) {
        return e.first == e.second || e.first < 0 || e.second < 0 || e.first >= n || e.second >= n;
    });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    followee_off_.assign(n + 1, 0);
    follower_off_.assign(n + 1, 0);
    for (const auto& [f, g] : edges) {
        ++followee_off_[f + 1];
        ++follower_off_[g + 1];
    }
    std::partial_sum(followee_off_.begin(), followee_off_.end(), followee_off_.begin());
    std::partial_sum(follower_off_.begin(), follower_off_.end(), follower_off_.begin());
    followee_adj_.resize(edges.size());
    follower_adj_.resize(edges.size());
    std::vector<std::size_t> fe(followee_off_.begin(), followee_off_.end() - 1);
    std::vector<std::size_t> fr(follower_off_.begin(), follower_off_.end() - 1);
    // Edges are sorted by follower then followee, so both lists come out sorted.
    for (const auto& [f, g] : edges) {
        followee_adj_[fe[f]++] = g;
        follower_adj_[fr[g]++] = f;
    }
}

std::optional<int> FollowerNetwork::index_of(std::string_view id) const
{
    return find_sorted(users_, id);
}

std::span<const int> FollowerNetwork::followees_of(int user) const
{
    return {followee_adj_.data() + followee_off_[user], followee_off_[user + 1] - followee_off_[user]};
}

std::span<const int> FollowerNetwork::followers_of(int user) const
{
    return {follower_adj_.data() + follower_off_[user], follower_off_[user + 1] - follower_off_[user]};
}

bool FollowerNetwork::follows(int follower, int followee) const
{
    const auto l = followees_of(follower);
    return std::binary_search(l.begin(), l.end(), followee);
}

LoadedFollowerNetwork build_follower_network(std::istream& in, const std::set<std::string>& universe)
{
    std::vector<std::string> users(universe.begin(), universe.end());
    LoadedFollowerNetwork out;
    std::string line;
    bool header = false;
    std::vector<std::pair<int, int>> edges;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        csv::chomp(line);
        if (line.empty()) continue;
        const auto fields = csv::split(line);
        if (!header) {
            if (fields.size() != 2 || fields[0] != "follower" || fields[1] != "followee")
                throw InputError("edges.csv: expected header 'follower,followee'");
            header = true;
            continue;
        }
        if (fields.size() != 2)
            throw InputError("edges.csv:" + std::to_string(lineno) + ": expected 2 fields");
        ++out.report.rows;
        const auto f = find_sorted(users, fields[0]);
        const auto g = find_sorted(users, fields[1]);
        if (!f || !g) {
            ++out.report.unknown_endpoint;
            continue;
        }
        if (*f == *g) {
            ++out.report.self_loops;
            continue;
        }
        edges.emplace_back(*f, *g);
    }
    if (!header) throw InputError("edges.csv: missing header");
    const std::size_t candidates = edges.size();
    out.network = FollowerNetwork(std::move(users), std::move(edges));
    out.report.kept = out.network.edge_count();
    out.report.duplicates = candidates - out.report.kept;
    return out;
}

LoadedFollowerNetwork build_follower_network(const std::string& path,
                                             const std::set<std::string>& universe)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read follower edges: " + path);
    return build_follower_network(in, universe);
}

} // namespace viralscope
