#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "slsm/cluster.hpp"
#include "slsm/store.hpp"

namespace slsm {

enum class StmtKind { Select, Insert, Update, Delete };

struct Assignment {
    std::string column;
    Value value;
};

struct Statement {
    StmtKind kind = StmtKind::Select;
    std::string table;
    Predicate pred;               // select/update/delete
    std::vector<Value> row;       // insert payload; source-shaped for lazy
                                  // direct inserts on split/join targets
    std::vector<Assignment> sets; // update

    static Statement select(std::string table, Predicate p) {
        return Statement{StmtKind::Select, std::move(table), std::move(p), {}, {}};
    }
    static Statement insert(std::string table, std::vector<Value> row) {
        return Statement{StmtKind::Insert, std::move(table), {}, std::move(row), {}};
    }
    static Statement update(std::string table, Predicate p, std::vector<Assignment> sets) {
        return Statement{StmtKind::Update, std::move(table), std::move(p), {}, std::move(sets)};
    }
    static Statement del(std::string table, Predicate p) {
        return Statement{StmtKind::Delete, std::move(table), std::move(p), {}, {}};
    }
};

struct HopEntry {
    NodeId from = 0;
    NodeId to = 0;
    std::string purpose;
};

class Engine;
struct MigrationExec;

class Txn {
public:
    TxnId id = 0;
    uint64_t priority = 0;  // wound-wait timestamp; retries keep the original
    NodeId gateway = 0;
    Tick begin_tick = 0;

    int round_trips = 0;
    std::vector<HopEntry> ledger;
    Tick last_stmt_duration = 0;  // virtual cost of the most recent statement
    Tick total_duration = 0;

    bool touched_new_schema = false;
    std::string category;  // placement category of the last lazy statement

    bool active = true;
    bool wounded = false;

private:
    friend class Engine;
    friend struct MigrationExec;
    std::vector<KeyInterval> locks_;
    struct RowUndo {
        Key key;
        std::optional<RowValue> prev;
    };
    struct MarkerUndo {
        Key key;
        bool was_set;
    };
    std::vector<RowUndo> row_undo_;
    std::vector<MarkerUndo> marker_undo_;
    std::vector<Key> migrated_keys_;   // counter bumps to revert on abort
    std::set<int> served_migrations_;  // handles whose first service this txn provides
};

struct EngineConfig {
    int nodes = 3;
    double rtt_ms = 11.78;
    double svc_mig_ms = 0.0;       // simulated service time of migration work
    double svc_usr_ms = 0.0;       // simulated service time of user work
    double prefix_overhead_ms = 0.0;  // extra per-statement cost of prefixed keys
    bool wall_clock = false;
    size_t osc_batch_size = 500;
    uint64_t seed = 1;
};

enum class ExecStatus { Ok, Blocked, Wounded, Error };

struct ExecResult {
    ExecStatus status = ExecStatus::Ok;
    std::vector<RowValue> rows;
    std::string error;

    bool ok() const { return status == ExecStatus::Ok; }
};

struct AvailabilityReport {
    Tick registered = -1;
    Tick first_service = -1;
    Tick done = -1;
};

class Engine {
public:
    explicit Engine(EngineConfig cfg);

    Catalog& catalog() { return catalog_; }
    const Catalog& catalog() const { return catalog_; }
    Cluster& cluster() { return cluster_; }
    const Cluster& cluster() const { return cluster_; }
    Store& store() { return store_; }
    const Store& store() const { return store_; }
    const EngineConfig& config() const { return cfg_; }

    // -- time ------------------------------------------------------------
    Tick now() const { return now_; }
    void set_now(Tick t) { now_ = t; }

    // -- transactions ----------------------------------------------------
    Txn& begin(NodeId gateway);
    // Retry after a wound keeps the original wound-wait priority.
    Txn& begin_retry(NodeId gateway, uint64_t priority);
    ExecResult execute(Txn& txn, const Statement& stmt);
    bool commit(Txn& txn);  // false when the txn was wounded meanwhile
    void abort(Txn& txn);

    // -- migration admin -------------------------------------------------
    int register_migration(const MigrationSpec& spec);
    Migration* migration(int handle);
    const std::vector<std::unique_ptr<Migration>>& migrations() const { return migrations_; }
    // Active migration whose old or new side includes this table.
    Migration* migration_for_table(TableId tid);
    // Advances the OSC state machine by one step (state transition or one
    // backfill batch). Returns the state after the step.
    OscState osc_step(Migration& mig);
    AvailabilityReport availability(const Migration& mig) const;
    // Attempts a trivial new-schema select now; records and returns the
    // first-service tick, or -1 while the new schema cannot serve yet.
    Tick availability_probe(int handle, NodeId gateway = 0);

    // Rewrites a conjunctive predicate over a new table into per-source
    // predicates. Throws RewriteUnsupported for columns without a rule.
    std::map<TableId, Predicate> rewrite_predicate(const Migration& mig, TableId new_tid,
                                                   const Predicate& p) const;

    // Migrates every not-yet-migrated source row in `keys` (anchor-table
    // keys) within `txn`. Used by the background drain.
    size_t migrate_anchor_keys(Txn& txn, Migration& mig, std::span<const Key> keys);

    // -- locked storage access (lock + leaseholder audited) ---------------
    std::vector<std::pair<Key, RowValue>> scan_rows(Txn& txn, const TableDescriptor& t,
                                                    const KeyInterval& iv);
    const RowValue* read_row(Txn& txn, const Key& k);
    void write_row(Txn& txn, const Key& k, RowValue row);
    bool erase_row(Txn& txn, const Key& k);
    bool marker_set(const Key& k) const { return markers_.count(k) > 0; }
    void set_marker(Txn& txn, const Key& k);
    void bump_migrated(Txn& txn, const Key& k);
    int migrated_count(const Key& k) const;

    // acquire intervals for txn; Blocked => nothing new is held
    ExecStatus acquire_locks(Txn& txn, std::span<const KeyInterval> ivs);

    // -- hop accounting ---------------------------------------------------
    void charge_hop(Txn& txn, NodeId from, NodeId to, const std::string& purpose);
    void charge_service(Txn& txn, Tick amount);

    // Test hook: perform a point read executed at `node`, tripping the
    // routing-violation audit when `node` is not the key's leaseholder.
    const RowValue* read_at(Txn& txn, NodeId node, const Key& k);

    // Invoked after every successful commit (exclusivity audits in tests).
    std::function<void(Engine&, Txn&)> post_commit_hook;

    // Statements on OSC new tables before `public` fail with this message.
    static constexpr const char* kNotAvailable = "table not available yet";

private:
    friend struct MigrationExec;

    EngineConfig cfg_;
    Catalog catalog_;
    Cluster cluster_;
    Store store_;
    std::set<Key> markers_;
    std::map<Key, int> migrated_counts_;
    std::atomic<Tick> now_{0};  // wall-clock mode updates it from worker threads
    TxnId next_txn_id_ = 1;
    int next_handle_ = 1;
    Rng admin_rng_{1};
    Tick rtt_ = 0;
    Tick svc_mig_ = 0;
    Tick svc_usr_ = 0;
    Tick prefix_overhead_ = 0;

    std::vector<std::unique_ptr<Txn>> txns_;
    struct LockEntry {
        KeyInterval iv;
        Txn* owner;
    };
    std::vector<LockEntry> lock_table_;
    std::vector<std::unique_ptr<Migration>> migrations_;

    std::recursive_mutex mu_;  // wall-clock mode serializes through this

    void release_locks(Txn& txn);
    void rollback(Txn& txn);
    void wound(Txn& victim);
    bool covered_by_locks(const Txn& txn, const Key& k) const;
    void audit_access(const Txn& txn, const Key& k);

    ExecResult execute_locked(Txn& txn, const Statement& stmt);
    ExecResult plain_execute(Txn& txn, const TableDescriptor& t, const Statement& stmt);
    void finish_commit(Txn& txn);
};

// Canonical logical dump of a table: plain-encoded keys regardless of the
// physical layout, one row per line, in pk order.
std::string canonical_table_dump(const Engine& eng, const TableDescriptor& t);

}  // namespace slsm
