#pragma once

#include "slsm/engine.hpp"

namespace slsm {

// Strategy executors. A lazy pair (migration work + user statement) runs
// inside one engine transaction, so no other transaction observes the
// migrated-but-unprocessed intermediate state.
struct MigrationExec {
    static ExecResult run_lazy(Engine& eng, Txn& txn, Migration& mig,
                               const TableDescriptor& new_t, const Statement& stmt);
    static ExecResult run_fusion(Engine& eng, Txn& txn, Migration& mig,
                                 const TableDescriptor& new_t, const Statement& stmt);
    static ExecResult run_insert_direct(Engine& eng, Txn& txn, Migration& mig,
                                        const TableDescriptor& new_t, const Statement& stmt);
    static ExecResult run_osc(Engine& eng, Txn& txn, Migration& mig,
                              const TableDescriptor& old_t, const Statement& stmt);
    // Statement addressed to a source table while a lazy migration is active.
    static ExecResult run_source_stmt(Engine& eng, Txn& txn, Migration& mig,
                                      const TableDescriptor& old_t, const Statement& stmt);

    struct LockPlan {
        std::vector<KeyInterval> old_ivs;
        std::vector<KeyInterval> new_ivs;
        std::vector<KeyInterval> all() const {
            std::vector<KeyInterval> out = old_ivs;
            out.insert(out.end(), new_ivs.begin(), new_ivs.end());
            return out;
        }
    };

    static std::map<TableId, Predicate> rewrite_scope(Engine& eng, const Migration& mig,
                                                      TableId new_tid, const Predicate& p,
                                                      bool* widened);
    static LockPlan lazy_lock_plan(Engine& eng, const Migration& mig,
                                   const TableDescriptor& new_t, const Statement& stmt,
                                   const std::map<TableId, Predicate>& scope);

    // Migrates every not-yet-migrated source row selected by `scope`.
    // Collects the rows inserted into table `collect_tid` (plain-key order).
    static size_t migrate_matching(Engine& eng, Txn& txn, Migration& mig,
                                   const std::map<TableId, Predicate>& scope,
                                   std::vector<std::pair<Key, RowValue>>* inserted,
                                   TableId collect_tid);

    // Hop accounting for one lazy/fusion statement; returns the placement
    // category label used in metrics.
    static std::string charge_lazy_hops(Engine& eng, Txn& txn, const Migration& mig,
                                        const LockPlan& plan, bool fused);

    static RowValue map_row(const Migration& mig, size_t new_idx,
                            const std::map<TableId, const RowValue*>& sources);
    static Key group_root_for(Engine& eng, const Migration& mig, const Key& anchor_key);
    static KeyInterval widen_to_groups(Engine& eng, const Migration& mig, KeyInterval iv);

    static ExecResult apply_on_table(Engine& eng, Txn& txn, const TableDescriptor& t,
                                     const Statement& stmt);

    // OSC helpers
    static void mirror_upsert(Engine& eng, Txn& txn, Migration& mig,
                              const TableDescriptor& src, const RowValue& row);
    static void mirror_delete(Engine& eng, Txn& txn, Migration& mig,
                              const TableDescriptor& src, const RowValue& row);
};

}  // namespace slsm
