#include "slsm/catalog.hpp"

#include <algorithm>

namespace slsm {

const char* to_string(MigrationClass c) {
    switch (c) {
        case MigrationClass::Split: return "split";
        case MigrationClass::Join: return "join";
        default: return "preaggregate";
    }
}

const char* to_string(Strategy s) {
    switch (s) {
        case Strategy::Osc: return "osc";
        case Strategy::Bullfrog: return "bullfrog";
        case Strategy::SlsmBasic: return "slsm_basic";
        case Strategy::SlsmMigOpt: return "slsm_mig_opt";
        case Strategy::SlsmUserOpt: return "slsm_user_opt";
        default: return "slsm_full";
    }
}

std::optional<Strategy> strategy_from_string(const std::string& s) {
    if (s == "osc") return Strategy::Osc;
    if (s == "bullfrog") return Strategy::Bullfrog;
    if (s == "slsm_basic" || s == "basic") return Strategy::SlsmBasic;
    if (s == "slsm_mig_opt") return Strategy::SlsmMigOpt;
    if (s == "slsm_user_opt") return Strategy::SlsmUserOpt;
    if (s == "slsm_full") return Strategy::SlsmFull;
    return std::nullopt;
}

std::optional<MigrationClass> migration_class_from_string(const std::string& s) {
    if (s == "split") return MigrationClass::Split;
    if (s == "join") return MigrationClass::Join;
    if (s == "preaggregate" || s == "preagg") return MigrationClass::Preaggregate;
    return std::nullopt;
}

void MigrationSpec::validate() const {
    switch (mclass) {
        case MigrationClass::Split:
            if (old_tables.size() != 1 || new_tables.size() != 2) {
                throw CatalogError("split migration requires 1 old table and 2 new tables");
            }
            break;
        case MigrationClass::Join:
            if (old_tables.size() != 2 || new_tables.size() != 1) {
                throw CatalogError("join migration requires 2 old tables and 1 new table");
            }
            if (join_keys.empty()) throw CatalogError("join migration requires join keys");
            break;
        case MigrationClass::Preaggregate:
            if (old_tables.size() != 1 || new_tables.size() != 1) {
                throw CatalogError("preaggregate migration requires 1 old and 1 new table");
            }
            if (group_keys.empty()) throw CatalogError("preaggregate requires group keys");
            if (agg_source_column.empty() || agg_dest_column.empty()) {
                throw CatalogError("preaggregate requires an aggregate column");
            }
            break;
    }
    for (const auto& nt : new_tables) {
        if (nt.pk.empty()) throw CatalogError("new table " + nt.name + " has empty pk");
    }
}

TableId Catalog::add_table(const std::string& name, std::vector<ColumnDef> columns,
                           const std::vector<std::string>& pk_cols, KeyMode key_mode) {
    if (by_name_.count(name)) throw CatalogError("table already exists: " + name);
    if (pk_cols.empty()) throw CatalogError("table " + name + " has empty pk");
    TableDescriptor t;
    t.id = next_id_++;
    t.name = name;
    t.columns = std::move(columns);
    t.key_mode = key_mode;
    for (const auto& c : pk_cols) {
        int idx = t.col_index(c);
        if (idx < 0) throw CatalogError("pk column not found: " + name + "." + c);
        t.pk.push_back(static_cast<size_t>(idx));
    }
    if (key_mode.prefixed) {
        const auto& parent = table(key_mode.parent_tid);
        if (key_mode.prefix_cols == 0 || key_mode.prefix_cols > parent.pk.size() ||
            key_mode.prefix_cols > t.pk.size()) {
            throw CatalogError("bad colocation prefix arity for " + name);
        }
        for (size_t i = 0; i < key_mode.prefix_cols; ++i) {
            if (t.columns[t.pk[i]].type != parent.columns[parent.pk[i]].type) {
                throw CatalogError("prefix pk type mismatch for " + name);
            }
        }
        note_prefixed_child(key_mode.parent_tid, key_mode.prefix_cols);
    }
    TableId id = t.id;
    by_name_[name] = id;
    tables_[id] = std::move(t);
    return id;
}

const TableDescriptor& Catalog::table(TableId id) const {
    auto it = tables_.find(id);
    if (it == tables_.end()) throw CatalogError("no table with id " + std::to_string(id));
    return it->second;
}

const TableDescriptor& Catalog::table(const std::string& name) const {
    const TableDescriptor* t = find(name);
    if (!t) throw CatalogError("no table named " + name);
    return *t;
}

const TableDescriptor* Catalog::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &tables_.at(it->second);
}

const TableDescriptor* Catalog::find(TableId id) const {
    auto it = tables_.find(id);
    return it == tables_.end() ? nullptr : &it->second;
}

Key Catalog::row_key_from_pk(const TableDescriptor& t, std::span<const Value> pk) const {
    if (pk.size() != t.pk.size()) throw EncodingError("pk arity mismatch for " + t.name);
    for (size_t i = 0; i < pk.size(); ++i) {
        if (value_type(pk[i]) != t.columns[t.pk[i]].type) {
            throw EncodingError("pk type mismatch for " + t.name);
        }
    }
    if (!t.key_mode.prefixed) return keycodec::encode_key(t.id, pk);
    const size_t p = t.key_mode.prefix_cols;
    return keycodec::encode_prefixed_key(t.key_mode.parent_tid, pk.subspan(0, p), t.id,
                                         pk.subspan(p));
}

Key Catalog::row_key(const TableDescriptor& t, const RowValue& row) const {
    return row_key_from_pk(t, t.pk_of(row));
}

Key Catalog::plain_row_key(const TableDescriptor& t, const RowValue& row) const {
    return keycodec::encode_key(t.id, t.pk_of(row));
}

bool Catalog::belongs_to(const TableDescriptor& t, const Key& key) const {
    try {
        size_t pos = 0;
        if (!t.key_mode.prefixed) {
            if (keycodec::decode_table_id(key, &pos) != t.id) return false;
            auto types = t.pk_types();
            keycodec::decode_values(key, types, &pos);
            return pos == key.b.size();
        }
        if (keycodec::decode_table_id(key, &pos) != t.key_mode.parent_tid) return false;
        const auto& parent = table(t.key_mode.parent_tid);
        std::vector<ColType> prefix_types;
        for (size_t i = 0; i < t.key_mode.prefix_cols; ++i) {
            prefix_types.push_back(parent.columns[parent.pk[i]].type);
        }
        keycodec::decode_values(key, prefix_types, &pos);
        if (keycodec::decode_table_id(key, &pos) != t.id) return false;
        std::vector<ColType> suffix_types;
        for (size_t i = t.key_mode.prefix_cols; i < t.pk.size(); ++i) {
            suffix_types.push_back(t.columns[t.pk[i]].type);
        }
        keycodec::decode_values(key, suffix_types, &pos);
        return pos == key.b.size();
    } catch (const EncodingError&) {
        return false;
    }
}

Key Catalog::group_root(const Key& key) const {
    try {
        size_t pos = 0;
        TableId tid = keycodec::decode_table_id(key, &pos);
        auto it = group_arity_.find(tid);
        if (it == group_arity_.end()) return key;
        const auto& parent = table(tid);
        std::vector<ColType> types;
        for (size_t i = 0; i < it->second && i < parent.pk.size(); ++i) {
            types.push_back(parent.columns[parent.pk[i]].type);
        }
        size_t p = pos;
        keycodec::decode_values(key, types, &p);
        Key root;
        root.b = key.b.substr(0, p);
        return root;
    } catch (const EncodingError&) {
        // region boundaries (bare table id etc.) are their own roots
        return key;
    }
}

size_t Catalog::group_arity(TableId parent) const {
    auto it = group_arity_.find(parent);
    return it == group_arity_.end() ? 0 : it->second;
}

void Catalog::note_prefixed_child(TableId parent, size_t prefix_cols) {
    auto it = group_arity_.find(parent);
    if (it == group_arity_.end()) {
        group_arity_[parent] = prefix_cols;
    } else {
        it->second = std::min(it->second, prefix_cols);
    }
}

}  // namespace slsm
