#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slsm/keycodec.hpp"
#include "slsm/value.hpp"

namespace slsm {

struct ColumnDef {
    std::string name;
    ColType type;
};

// Plain tables own the keyspace region of their table id. Prefixed tables
// store rows under the parent table's keys so both always share a range.
struct KeyMode {
    bool prefixed = false;
    TableId parent_tid = 0;
    // Number of leading parent pk columns forming the shared prefix. Equal
    // to the parent pk arity except for group-grained colocation, where the
    // prefix is the parent key truncated to the group columns.
    size_t prefix_cols = 0;
};

struct TableDescriptor {
    TableId id = 0;
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<size_t> pk;  // indices into columns, in key order
    KeyMode key_mode;

    int col_index(const std::string& col) const {
        for (size_t i = 0; i < columns.size(); ++i) {
            if (columns[i].name == col) return static_cast<int>(i);
        }
        return -1;
    }

    std::vector<ColType> pk_types() const {
        std::vector<ColType> out;
        out.reserve(pk.size());
        for (size_t i : pk) out.push_back(columns[i].type);
        return out;
    }

    std::vector<Value> pk_of(const RowValue& row) const {
        std::vector<Value> out;
        out.reserve(pk.size());
        for (size_t i : pk) out.push_back(row.columns[i]);
        return out;
    }
};

enum class MigrationClass { Split, Join, Preaggregate };
enum class Strategy { Osc, Bullfrog, SlsmBasic, SlsmMigOpt, SlsmUserOpt, SlsmFull };

const char* to_string(MigrationClass c);
const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(const std::string& s);
std::optional<MigrationClass> migration_class_from_string(const std::string& s);

inline bool is_lazy(Strategy s) { return s != Strategy::Osc; }
inline bool wants_prefixed(Strategy s) {
    return s == Strategy::SlsmMigOpt || s == Strategy::SlsmFull;
}
inline bool is_fused(Strategy s) {
    return s == Strategy::SlsmUserOpt || s == Strategy::SlsmFull;
}

struct ColumnSource {
    std::string table;
    std::string column;
};

struct NewTableDef {
    std::string name;
    std::vector<ColumnDef> columns;
    std::vector<std::string> pk;
    // dest column name -> source (table, column); the aggregate output
    // column of a preaggregate has no entry here.
    std::vector<std::pair<std::string, ColumnSource>> column_map;
};

struct MigrationSpec {
    MigrationClass mclass = MigrationClass::Split;
    Strategy strategy = Strategy::SlsmFull;
    std::vector<std::string> old_tables;  // 1 (split/preagg) or 2 (join)
    std::vector<NewTableDef> new_tables;  // 2 (split) or 1
    // join: equality pairs (column on old_tables[0], column on old_tables[1])
    std::vector<std::pair<std::string, std::string>> join_keys;
    std::vector<std::string> group_keys;  // preagg: source column names
    std::string agg_source_column;        // preagg: sum() input on the source
    std::string agg_dest_column;          // preagg: output column on the new table

    void validate() const;  // class-consistent arity checks
};

enum class OscState { Absent, DeleteOnly, WriteOnly, Public };

struct MigrationState {
    OscState osc_state = OscState::Absent;
    Key backfill_watermark;
    Key drain_cursor;
    bool done = false;
};

// Runtime handle for one registered migration.
struct Migration {
    int handle = 0;
    MigrationSpec spec;
    std::vector<TableId> old_tids;
    std::vector<TableId> new_tids;
    TableId anchor_tid = 0;  // driving source: the table the drain walks
    bool prefixed = false;
    bool prefix_fallback = false;  // requested prefixed mode but pk containment failed
    MigrationState state;
    Tick registered_at = -1;
    Tick first_service = -1;
    Tick done_at = -1;

    // resolved column maps, one per new table: dest column index ->
    // (source tid, source column index); -1 column marks the aggregate output
    struct ResolvedColumn {
        TableId src_tid = 0;
        int src_col = -1;
    };
    std::vector<std::vector<ResolvedColumn>> column_maps;
    // join: per source tid, the column indexes of the join keys, in key order
    std::map<TableId, std::vector<size_t>> join_key_cols;
    // preagg: source column indexes of the group keys and the summed column
    std::vector<size_t> group_key_cols;
    size_t agg_src_col = 0;

    // captured at registration for bullfrog whole-table drains
    std::vector<Key> initial_anchor_keys;

    bool active() const { return !state.done; }
};

class Catalog {
public:
    TableId add_table(const std::string& name, std::vector<ColumnDef> columns,
                      const std::vector<std::string>& pk_cols, KeyMode key_mode = {});

    const TableDescriptor& table(TableId id) const;
    const TableDescriptor& table(const std::string& name) const;
    const TableDescriptor* find(const std::string& name) const;
    const TableDescriptor* find(TableId id) const;
    const std::map<TableId, TableDescriptor>& tables() const { return tables_; }

    // Storage key for a row of `t` (prefixed layout when applicable).
    Key row_key(const TableDescriptor& t, const RowValue& row) const;
    Key row_key_from_pk(const TableDescriptor& t, std::span<const Value> pk) const;
    // Canonical plain-encoded key, independent of the storage layout.
    Key plain_row_key(const TableDescriptor& t, const RowValue& row) const;

    // True when `key` is a row of table `t` (skips interleaved children of a
    // parent region and the parent rows under a child scan).
    bool belongs_to(const TableDescriptor& t, const Key& key) const;

    // Colocation grouping. Returns the smallest prefix-group root covering
    // `key`, or `key` itself when the key is not inside a group. Range
    // boundaries must equal their own group root.
    Key group_root(const Key& key) const;
    size_t group_arity(TableId parent) const;  // 0 when no prefixed children

    void note_prefixed_child(TableId parent, size_t prefix_cols);

private:
    std::map<TableId, TableDescriptor> tables_;
    std::map<std::string, TableId> by_name_;
    std::map<TableId, size_t> group_arity_;  // parent tid -> prefix col count
    TableId next_id_ = 51;
};

}  // namespace slsm
