#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <viralscope/graph.hpp>

namespace viralscope {

/// Two-way split of a user set. `users` is sorted; `group[i]` is 0 or 1.
struct PartitionAssignment {
    std::vector<std::string> users;
    std::vector<int> group;
    std::size_t cut_size = 0;
    double balance = 0.0; // largest group's share of users

    std::optional<int> group_of(std::string_view user) const;
    std::size_t group_size(int g) const;
};

/// Largest group size a bisection of n nodes may have under `balance_tol`:
/// max(floor((0.5 + tol) * n), ceil(n / 2)).
std::size_t max_group_size(std::size_t n, double balance_tol);

/// Number of edges whose endpoints sit in different groups.
std::size_t count_cut(const RetweetNetwork& net, const std::vector<int>& group);

/// Minimum edge-cut bisection: heavy-edge-matching coarsening, greedy
/// graph-growing initial split, Fiduccia-Mattheyses refinement on the way
/// back up, and a final single-move hill climb so no balance-respecting move
/// reduces the cut. Group 0 always contains the smallest user id.
/// Throws InputError ("not bisectable") for fewer than two nodes.
PartitionAssignment bisect_partition(const RetweetNetwork& net, double balance_tol = 0.1,
                                     std::uint64_t seed = 0);

/// Rebuilds an assignment from explicit labels and recomputes cut and balance.
PartitionAssignment make_assignment(const RetweetNetwork& net, std::vector<int> group);

struct GroupNames {
    int activist = 0;
    int skeptic = 1;
};

/// The group holding more users matched by the skeptic seed pair is the
/// skeptic group. Ties fall back to the activist-pair count, then to group 1.
GroupNames name_groups(const PartitionAssignment& assignment,
                       const std::set<std::string>& activist_pair_users,
                       const std::set<std::string>& skeptic_pair_users);

void write_partition_dot(std::ostream& out, const RetweetNetwork& net,
                         const PartitionAssignment& assignment, const GroupNames& names);

} // namespace viralscope
