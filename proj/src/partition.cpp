#include <viralscope/partition.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <tuple>

#include <viralscope/common.hpp>
#include <viralscope/rng.hpp>

namespace viralscope {

std::optional<int> PartitionAssignment::group_of(std::string_view user) const
{
    const auto it = std::lower_bound(users.begin(), users.end(), user,
                                     [](const std::string& a, std::string_view b) { return a < b; });
    if (it == users.end() || *it != user) return std::nullopt;
    return group[it - users.begin()];
}

std::size_t PartitionAssignment::group_size(int g) const
{
    return static_cast<std::size_t>(std::count(group.begin(), group.end(), g));
}

std::size_t max_group_size(std::size_t n, double balance_tol)
{
    const auto by_tol = static_cast<std::size_t>(std::floor((0.5 + balance_tol) * n + 1e-9));
    return std::max(by_tol, (n + 1) / 2);
}

std::size_t count_cut(const RetweetNetwork& net, const std::vector<int>& group)
{
    std::size_t cut = 0;
    for (const auto& [a, b] : net.edges())
        if (group[a] != group[b]) ++cut;
    return cut;
}

PartitionAssignment make_assignment(const RetweetNetwork& net, std::vector<int> group)
{
    PartitionAssignment out;
    out.users = net.nodes();
    out.group = std::move(group);
    out.cut_size = count_cut(net, out.group);
    const std::size_t n = out.users.size();
    if (n > 0) {
        const std::size_t g1 = out.group_size(1);
        out.balance = static_cast<double>(std::max(g1, n - g1)) / static_cast<double>(n);
    }
    return out;
}

namespace {

// Vertex- and edge-weighted graph in CSR form used across coarsening levels.
struct WGraph {
    std::vector<long long> vwgt;
    std::vector<std::size_t> off;
    std::vector<int> nbr;
    std::vector<long long> ewgt;
    long long total = 0;

    int n() const { return static_cast<int>(vwgt.size()); }
};

WGraph from_network(const RetweetNetwork& net)
{
    WGraph g;
    const auto adj = net.adjacency();
    g.vwgt.assign(adj.size(), 1);
    g.total = static_cast<long long>(adj.size());
    g.off.push_back(0);
    for (const auto& l : adj) {
        for (int v : l) {
            g.nbr.push_back(v);
            g.ewgt.push_back(1);
        }
        g.off.push_back(g.nbr.size());
    }
    return g;
}

struct Coarsened {
    WGraph graph;
    std::vector<int> cmap;
};

Coarsened coarsen(const WGraph& g, Rng& rng, long long max_vwgt)
{
    const int n = g.n();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    std::vector<int> match(n, -1);
    for (int v : order) {
        if (match[v] >= 0) continue;
        int best = -1;
        long long best_w = -1;
        for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e) {
            const int u = g.nbr[e];
            if (match[u] >= 0 || g.vwgt[v] + g.vwgt[u] > max_vwgt) continue;
            if (g.ewgt[e] > best_w || (g.ewgt[e] == best_w && g.vwgt[u] < g.vwgt[best])) {
                best = u;
                best_w = g.ewgt[e];
            }
        }
        if (best >= 0) {
            match[v] = best;
            match[best] = v;
        } else {
            match[v] = v;
        }
    }

    Coarsened out;
    out.cmap.assign(n, -1);
    std::vector<std::pair<int, int>> members;
    for (int v = 0; v < n; ++v) {
        if (out.cmap[v] >= 0) continue;
        const int c = static_cast<int>(members.size());
        out.cmap[v] = c;
        out.cmap[match[v]] = c;
        members.emplace_back(v, match[v]);
    }

    WGraph& cg = out.graph;
    const int nc = static_cast<int>(members.size());
    cg.vwgt.resize(nc);
    cg.total = g.total;
    cg.off.push_back(0);
    std::vector<long long> slot(nc, -1);
    for (int c = 0; c < nc; ++c) {
        const auto [a, b] = members[c];
        cg.vwgt[c] = g.vwgt[a] + (b != a ? g.vwgt[b] : 0);
        const std::size_t row_start = cg.nbr.size();
        for (int k = 0; k < (a == b ? 1 : 2); ++k) {
            const int v = k == 0 ? a : b;
            for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e) {
                const int cu = out.cmap[g.nbr[e]];
                if (cu == c) continue;
                if (slot[cu] < 0) {
                    slot[cu] = static_cast<long long>(cg.nbr.size());
                    cg.nbr.push_back(cu);
                    cg.ewgt.push_back(g.ewgt[e]);
                } else {
                    cg.ewgt[slot[cu]] += g.ewgt[e];
                }
            }
        }
        for (std::size_t e = row_start; e < cg.nbr.size(); ++e) slot[cg.nbr[e]] = -1;
        cg.off.push_back(cg.nbr.size());
    }
    return out;
}

// Lexicographic quality of a split: overweight first, then cut, then imbalance.
struct SplitKey {
    long long overweight;
    long long cut;
    long long imbalance;

    auto tie() const { return std::tie(overweight, cut, imbalance); }
    bool operator<(const SplitKey& o) const { return tie() < o.tie(); }
};

SplitKey split_key(const std::array<long long, 2>& w, long long cut, long long limit)
{
    return {std::max(0LL, std::max(w[0], w[1]) - limit), cut, std::llabs(w[0] - w[1])};
}

long long cut_of(const WGraph& g, const std::vector<int>& side)
{
    long long cut = 0;
    for (int v = 0; v < g.n(); ++v)
        for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e)
            if (side[v] != side[g.nbr[e]]) cut += g.ewgt[e];
    return cut / 2;
}

std::array<long long, 2> side_weights(const WGraph& g, const std::vector<int>& side)
{
    std::array<long long, 2> w{0, 0};
    for (int v = 0; v < g.n(); ++v) w[side[v]] += g.vwgt[v];
    return w;
}

// Moving v off side s is allowed if both sides stay nonempty and the heavier
// side ends within the limit, or at least lighter than before.
bool move_allowed(const std::array<long long, 2>& w, long long vw, int s, long long limit)
{
    if (w[s] - vw <= 0) return false;
    const long long new_max = std::max(w[s] - vw, w[1 - s] + vw);
    return new_max <= limit || new_max < std::max(w[0], w[1]);
}

struct GainOrder {
    bool operator()(const std::pair<long long, int>& a, const std::pair<long long, int>& b) const
    {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    }
};

/// One Fiduccia-Mattheyses pass with rollback to the best prefix.
/// Returns true if the split improved.
bool fm_pass(const WGraph& g, std::vector<int>& side, long long limit)
{
    const int n = g.n();
    std::vector<long long> gain(n, 0);
    for (int v = 0; v < n; ++v)
        for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e)
            gain[v] += side[g.nbr[e]] != side[v] ? g.ewgt[e] : -g.ewgt[e];

    std::array<std::set<std::pair<long long, int>, GainOrder>, 2> queues;
    for (int v = 0; v < n; ++v) queues[side[v]].emplace(gain[v], v);

    auto w = side_weights(g, side);
    long long cut = cut_of(g, side);
    const SplitKey start = split_key(w, cut, limit);
    SplitKey best = start;
    std::size_t best_len = 0;
    std::vector<int> moves;
    std::vector<char> locked(n, 0);
    std::size_t since_best = 0;
    const std::size_t patience = std::max<std::size_t>(64, static_cast<std::size_t>(n) / 20);

    while (since_best < patience) {
        int pick = -1;
        for (int s = 0; s < 2; ++s) {
            int scanned = 0;
            for (const auto& [gv, v] : queues[s]) {
                if (++scanned > 64) break;
                if (!move_allowed(w, g.vwgt[v], s, limit)) continue;
                if (pick < 0 || gv > gain[pick] ||
                    (gv == gain[pick] && w[s] > w[side[pick]]) ||
                    (gv == gain[pick] && w[s] == w[side[pick]] && v < pick))
                    pick = v;
                break;
            }
        }
        if (pick < 0) break;

        const int s = side[pick];
        queues[s].erase({gain[pick], pick});
        locked[pick] = 1;
        side[pick] = 1 - s;
        w[s] -= g.vwgt[pick];
        w[1 - s] += g.vwgt[pick];
        cut -= gain[pick];
        gain[pick] = -gain[pick];
        for (std::size_t e = g.off[pick]; e < g.off[pick + 1]; ++e) {
            const int u = g.nbr[e];
            // u's edge to pick flipped between internal and external.
            const long long delta = side[u] == side[pick] ? -2 * g.ewgt[e] : 2 * g.ewgt[e];
            if (!locked[u]) queues[side[u]].erase({gain[u], u});
            gain[u] += delta;
            if (!locked[u]) queues[side[u]].emplace(gain[u], u);
        }
        moves.push_back(pick);

        const SplitKey k = split_key(w, cut, limit);
        if (k < best) {
            best = k;
            best_len = moves.size();
            since_best = 0;
        } else {
            ++since_best;
        }
    }
    for (std::size_t i = moves.size(); i > best_len; --i) side[moves[i - 1]] ^= 1;
    return best < start;
}

void fm_refine(const WGraph& g, std::vector<int>& side, long long limit, int max_passes = 12)
{
    for (int p = 0; p < max_passes; ++p)
        if (!fm_pass(g, side, limit)) break;
}

/// Greedy graph growing: side 1 grows from `start` by best gain until it
/// holds half the weight.
std::vector<int> grow_split(const WGraph& g, int start, long long limit)
{
    const int n = g.n();
    std::vector<int> side(n, 0);
    std::vector<long long> gain(n, 0);
    for (int v = 0; v < n; ++v)
        for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e) gain[v] -= g.ewgt[e];
    std::set<std::pair<long long, int>, GainOrder> queue;
    for (int v = 0; v < n; ++v) queue.emplace(gain[v], v);

    std::array<long long, 2> w{g.total, 0};
    auto move = [&](int v) {
        queue.erase({gain[v], v});
        side[v] = 1;
        w[0] -= g.vwgt[v];
        w[1] += g.vwgt[v];
        for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e) {
            const int u = g.nbr[e];
            if (side[u] == 1) continue;
            queue.erase({gain[u], u});
            gain[u] += 2 * g.ewgt[e];
            queue.emplace(gain[u], u);
        }
    };
    move(start);
    while (2 * w[1] < g.total && !queue.empty()) {
        int pick = -1;
        for (const auto& [gv, v] : queue) {
            if (w[1] + g.vwgt[v] <= limit && w[0] - g.vwgt[v] > 0) {
                pick = v;
                break;
            }
        }
        if (pick < 0) break;
        move(pick);
    }
    return side;
}

// Applies strictly improving single moves that keep both groups within the limit.
void hill_climb(const WGraph& g, std::vector<int>& side, long long limit)
{
    auto w = side_weights(g, side);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int v = 0; v < g.n(); ++v) {
            const int s = side[v];
            if (w[s] - g.vwgt[v] <= 0 || w[1 - s] + g.vwgt[v] > limit) continue;
            long long gain = 0;
            for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e)
                gain += side[g.nbr[e]] != s ? g.ewgt[e] : -g.ewgt[e];
            if (gain > 0) {
                side[v] = 1 - s;
                w[s] -= g.vwgt[v];
                w[1 - s] += g.vwgt[v];
                changed = true;
            }
        }
    }
}

// Moves best-gain vertices off the heavy side until within the limit.
void rebalance(const WGraph& g, std::vector<int>& side, long long limit)
{
    auto w = side_weights(g, side);
    while (std::max(w[0], w[1]) > limit) {
        const int heavy = w[0] > w[1] ? 0 : 1;
        int pick = -1;
        long long best_gain = 0;
        for (int v = 0; v < g.n(); ++v) {
            if (side[v] != heavy) continue;
            long long gain = 0;
            for (std::size_t e = g.off[v]; e < g.off[v + 1]; ++e)
                gain += side[g.nbr[e]] != heavy ? g.ewgt[e] : -g.ewgt[e];
            if (pick < 0 || gain > best_gain) {
                pick = v;
                best_gain = gain;
            }
        }
        side[pick] = 1 - heavy;
        w[heavy] -= g.vwgt[pick];
        w[1 - heavy] += g.vwgt[pick];
    }
}

std::vector<int> multilevel_bisect(const WGraph& finest, long long limit, Rng& rng)
{
    constexpr int kCoarsenTo = 40;
    constexpr int kInitialTrials = 8;

    std::vector<WGraph> levels{finest};
    std::vector<std::vector<int>> cmaps;
    const long long max_vwgt = std::max(1LL, (3 * finest.total) / (2 * kCoarsenTo));
    while (levels.back().n() > kCoarsenTo) {
        Coarsened c = coarsen(levels.back(), rng, max_vwgt);
        if (c.graph.n() * 20 > levels.back().n() * 19) break; // < 5% reduction
        cmaps.push_back(std::move(c.cmap));
        levels.push_back(std::move(c.graph));
    }

    const WGraph& coarsest = levels.back();
    std::vector<int> best_side;
    SplitKey best_key{};
    for (int t = 0; t < kInitialTrials; ++t) {
        const int start = static_cast<int>(rng.index(coarsest.n()));
        auto side = grow_split(coarsest, start, limit);
        fm_refine(coarsest, side, limit);
        const SplitKey k = split_key(side_weights(coarsest, side), cut_of(coarsest, side), limit);
        if (best_side.empty() || k < best_key) {
            best_side = std::move(side);
            best_key = k;
        }
    }

    std::vector<int> side = std::move(best_side);
    for (std::size_t lvl = cmaps.size(); lvl-- > 0;) {
        std::vector<int> finer(levels[lvl].n());
        for (int v = 0; v < levels[lvl].n(); ++v) finer[v] = side[cmaps[lvl][v]];
        side = std::move(finer);
        fm_refine(levels[lvl], side, limit);
    }
    rebalance(finest, side, limit);
    fm_refine(finest, side, limit);
    hill_climb(finest, side, limit);
    return side;
}

} // namespace

PartitionAssignment bisect_partition(const RetweetNetwork& net, double balance_tol, std::uint64_t seed)
{
    if (net.node_count() < 2) throw InputError("not bisectable: need at least two nodes");
    if (!(balance_tol >= 0.0) || balance_tol > 0.5)
        throw InputError("balance_tol must be in [0, 0.5]");

    constexpr int kAttempts = 4;
    const WGraph g = from_network(net);
    const long long limit = static_cast<long long>(max_group_size(net.node_count(), balance_tol));

    std::vector<int> best;
    SplitKey best_key{};
    for (int a = 0; a < kAttempts; ++a) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(a)));
        auto side = multilevel_bisect(g, limit, rng);
        const SplitKey k = split_key(side_weights(g, side), cut_of(g, side), limit);
        if (best.empty() || k < best_key) {
            best = std::move(side);
            best_key = k;
        }
    }
    if (best[0] != 0)
        for (auto& s : best) s ^= 1;
    return make_assignment(net, std::move(best));
}

GroupNames name_groups(const PartitionAssignment& assignment,
                       const std::set<std::string>& activist_pair_users,
                       const std::set<std::string>& skeptic_pair_users)
{
    auto tally = [&](const std::set<std::string>& users) {
        std::array<std::size_t, 2> c{0, 0};
        for (const auto& u : users)
            if (const auto g = assignment.group_of(u)) ++c[*g];
        return c;
    };
    const auto sk = tally(skeptic_pair_users);
    const auto ac = tally(activist_pair_users);
    int skeptic = 1;
    if (sk[0] != sk[1])
        skeptic = sk[0] > sk[1] ? 0 : 1;
    else if (ac[0] != ac[1])
        skeptic = ac[0] > ac[1] ? 1 : 0;
    return {1 - skeptic, skeptic};
}

void write_partition_dot(std::ostream& out, const RetweetNetwork& net,
                         const PartitionAssignment& assignment, const GroupNames& names)
{
    out << "graph retweets {\n  node [shape=point];\n";
    for (std::size_t i = 0; i < net.node_count(); ++i) {
        const int g = assignment.group[i];
        const char* color = g == names.activist ? "orange" : "green";
        out << "  \"" << net.nodes()[i] << "\" [color=" << color << ", group=" << g << "];\n";
    }
    for (const auto& [a, b] : net.edges())
        out << "  \"" << net.nodes()[a] << "\" -- \"" << net.nodes()[b] << "\";\n";
    out << "}\n";
}

} // namespace viralscope
