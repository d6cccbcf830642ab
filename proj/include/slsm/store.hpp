#pragma once

#include <iosfwd>
#include <map>
#include <optional>

#include "slsm/catalog.hpp"
#include "slsm/predicate.hpp"

namespace slsm {

// Committed row storage, ordered by key. All access goes through the
// transaction engine's lock protocol.
class Store {
public:
    using Map = std::map<Key, RowValue>;

    const RowValue* get(const Key& k) const {
        auto it = rows_.find(k);
        return it == rows_.end() ? nullptr : &it->second;
    }
    void put(const Key& k, RowValue v) { rows_[k] = std::move(v); }
    bool erase(const Key& k) { return rows_.erase(k) > 0; }

    Map::const_iterator lower_bound(const Key& k) const { return rows_.lower_bound(k); }
    Map::const_iterator begin() const { return rows_.begin(); }
    Map::const_iterator end() const { return rows_.end(); }
    size_t size() const { return rows_.size(); }

    // One "hexkey<TAB>v1,v2,..." line per row, in key order.
    void dump(std::ostream& out, const KeyInterval& iv) const;
    void dump_all(std::ostream& out) const;
    // Loads rows dumped by `dump`; column types come from the owning table.
    void load(std::istream& in, const Catalog& cat);

private:
    Map rows_;
};

}  // namespace slsm
