#pragma once

#include <functional>
#include <set>
#include <vector>

#include "slsm/predicate.hpp"

namespace slsm {

struct Range {
    uint64_t id = 0;
    Key start;
    Key end;  // exclusive; empty bytes mean +inf
    std::vector<NodeId> replicas;
    NodeId leaseholder = 0;

    bool covers(const Key& k) const { return !(k < start) && (end.b.empty() || k < end); }
};

// Placement metadata: contiguous, disjoint ranges covering the whole
// keyspace, each with a leaseholder. Replication is metadata only; the
// leaseholder copy is authoritative.
class Cluster {
public:
    Cluster() = default;
    Cluster(int num_nodes, int replication_factor = 3);

    int num_nodes() const { return num_nodes_; }
    const std::vector<Range>& ranges() const { return ranges_; }

    size_t range_index(const Key& k) const;
    const Range& route(const Key& k) const { return ranges_[range_index(k)]; }
    NodeId leaseholder(const Key& k) const { return route(k).leaseholder; }

    // Distinct leaseholders of the ranges overlapping [start, end).
    std::set<NodeId> leaseholders_in(const KeyInterval& iv) const;

    // Splits the covering range at `boundary`. Rejected when the boundary
    // falls strictly inside a colocation prefix group.
    uint64_t split_range(const Key& boundary);
    void transfer_lease(uint64_t range_id, NodeId node);
    Range* find_range(uint64_t range_id);

    // Moves any boundary strictly inside a group down to its group root.
    // Used when a group-grained colocation is registered on a table whose
    // ranges were split at finer key boundaries.
    void normalize_boundaries();

    void set_group_root_fn(std::function<Key(const Key&)> fn) { group_root_ = std::move(fn); }

private:
    int num_nodes_ = 1;
    int replication_factor_ = 3;
    uint64_t next_range_id_ = 1;
    std::vector<Range> ranges_;
    std::function<Key(const Key&)> group_root_;

    std::vector<NodeId> default_replicas() const;
};

}  // namespace slsm
