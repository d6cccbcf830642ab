#include "slsm/cluster.hpp"

#include <algorithm>

namespace slsm {

Cluster::Cluster(int num_nodes, int replication_factor)
    : num_nodes_(num_nodes), replication_factor_(replication_factor) {
    if (num_nodes < 1) throw ConfigError("cluster needs at least one node");
    Range r;
    r.id = next_range_id_++;
    r.start = Key{};
    r.end = Key{};
    r.replicas = default_replicas();
    r.leaseholder = 0;
    ranges_.push_back(std::move(r));
}

std::vector<NodeId> Cluster::default_replicas() const {
    std::vector<NodeId> out;
    const int n = std::min(num_nodes_, replication_factor_);
    for (int i = 0; i < n; ++i) out.push_back(i);
    return out;
}

size_t Cluster::range_index(const Key& k) const {
    // ranges_ is sorted by start; find the last range with start <= k
    size_t lo = 0, hi = ranges_.size();
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (ranges_[mid].start < k || ranges_[mid].start == k) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

std::set<NodeId> Cluster::leaseholders_in(const KeyInterval& iv) const {
    std::set<NodeId> out;
    size_t i = range_index(iv.start);
    for (; i < ranges_.size(); ++i) {
        if (!iv.end.b.empty() && !(ranges_[i].start < iv.end)) break;
        out.insert(ranges_[i].leaseholder);
    }
    return out;
}

uint64_t Cluster::split_range(const Key& boundary) {
    if (boundary.b.empty()) throw ConfigError("cannot split at the keyspace origin");
    if (group_root_) {
        Key root = group_root_(boundary);
        if (root != boundary) {
            throw ConfigError("split boundary falls inside a colocation prefix group");
        }
    }
    size_t idx = range_index(boundary);
    Range& left = ranges_[idx];
    if (left.start == boundary) return left.id;  // already a boundary
    Range right;
    right.id = next_range_id_++;
    right.start = boundary;
    right.end = left.end;
    right.replicas = left.replicas;
    right.leaseholder = left.leaseholder;
    left.end = boundary;
    uint64_t id = right.id;
    ranges_.insert(ranges_.begin() + static_cast<ptrdiff_t>(idx) + 1, std::move(right));
    return id;
}

void Cluster::transfer_lease(uint64_t range_id, NodeId node) {
    Range* r = find_range(range_id);
    if (!r) throw ConfigError("no range with id " + std::to_string(range_id));
    if (node < 0 || node >= num_nodes_) throw ConfigError("no such node");
    if (std::find(r->replicas.begin(), r->replicas.end(), node) == r->replicas.end()) {
        r->replicas.push_back(node);
    }
    r->leaseholder = node;
}

Range* Cluster::find_range(uint64_t range_id) {
    for (Range& r : ranges_) {
        if (r.id == range_id) return &r;
    }
    return nullptr;
}

void Cluster::normalize_boundaries() {
    if (!group_root_) return;
    for (size_t i = 1; i < ranges_.size();) {
        Key root = group_root_(ranges_[i].start);
        if (root == ranges_[i].start) {
            ++i;
            continue;
        }
        if (root == ranges_[i - 1].start || root < ranges_[i - 1].start) {
            // merging left: the whole group belongs to the previous range
            ranges_[i - 1].end = ranges_[i].end;
            ranges_.erase(ranges_.begin() + static_cast<ptrdiff_t>(i));
        } else {
            ranges_[i - 1].end = root;
            ranges_[i].start = root;
            ++i;
        }
    }
}

}  // namespace slsm
