#include "slsm/engine.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

#include "slsm/migration_exec.hpp"

namespace slsm {

Engine::Engine(EngineConfig cfg)
    : cfg_(cfg),
      cluster_(cfg.nodes),
      admin_rng_(cfg.seed),
      rtt_(ms_to_ticks(cfg.rtt_ms)),
      svc_mig_(ms_to_ticks(cfg.svc_mig_ms)),
      svc_usr_(ms_to_ticks(cfg.svc_usr_ms)),
      prefix_overhead_(ms_to_ticks(cfg.prefix_overhead_ms)) {
    cluster_.set_group_root_fn([this](const Key& k) { return catalog_.group_root(k); });
}

Txn& Engine::begin(NodeId gateway) {
    std::lock_guard lk(mu_);
    auto t = std::make_unique<Txn>();
    t->id = next_txn_id_++;
    t->priority = t->id;
    t->gateway = gateway;
    t->begin_tick = now_;
    txns_.push_back(std::move(t));
    return *txns_.back();
}

Txn& Engine::begin_retry(NodeId gateway, uint64_t priority) {
    Txn& t = begin(gateway);
    t.priority = priority;
    return t;
}

void Engine::release_locks(Txn& txn) {
    std::erase_if(lock_table_, [&](const LockEntry& e) { return e.owner == &txn; });
    txn.locks_.clear();
}

void Engine::rollback(Txn& txn) {
    for (auto it = txn.row_undo_.rbegin(); it != txn.row_undo_.rend(); ++it) {
        if (it->prev) {
            store_.put(it->key, *it->prev);
        } else {
            store_.erase(it->key);
        }
    }
    for (auto it = txn.marker_undo_.rbegin(); it != txn.marker_undo_.rend(); ++it) {
        if (it->was_set) {
            markers_.insert(it->key);
        } else {
            markers_.erase(it->key);
        }
    }
    for (const Key& k : txn.migrated_keys_) {
        if (--migrated_counts_[k] == 0) migrated_counts_.erase(k);
    }
    txn.row_undo_.clear();
    txn.marker_undo_.clear();
    txn.migrated_keys_.clear();
    txn.served_migrations_.clear();
}

void Engine::wound(Txn& victim) {
    rollback(victim);
    release_locks(victim);
    victim.wounded = true;
    victim.active = false;
}

ExecStatus Engine::acquire_locks(Txn& txn, std::span<const KeyInterval> ivs) {
    // Wound-wait: an older requester wounds younger holders; a younger
    // requester waits. Nothing is granted on Blocked.
    std::vector<Txn*> to_wound;
    for (const KeyInterval& iv : ivs) {
        for (const LockEntry& e : lock_table_) {
            if (e.owner == &txn || !e.iv.overlaps(iv)) continue;
            if (e.owner->priority < txn.priority) return ExecStatus::Blocked;
            to_wound.push_back(e.owner);
        }
    }
    for (Txn* v : to_wound) {
        if (v->active) wound(*v);
    }
    for (const KeyInterval& iv : ivs) {
        lock_table_.push_back(LockEntry{iv, &txn});
        txn.locks_.push_back(iv);
    }
    return ExecStatus::Ok;
}

bool Engine::covered_by_locks(const Txn& txn, const Key& k) const {
    for (const KeyInterval& iv : txn.locks_) {
        if (iv.contains(k)) return true;
    }
    return false;
}

void Engine::audit_access(const Txn& txn, const Key& k) {
    if (!covered_by_locks(txn, k)) {
        throw std::logic_error("storage access without a covering lock: " + k.hex());
    }
}

std::vector<std::pair<Key, RowValue>> Engine::scan_rows(Txn& txn, const TableDescriptor& t,
                                                        const KeyInterval& iv) {
    std::vector<std::pair<Key, RowValue>> out;
    for (auto it = store_.lower_bound(iv.start); it != store_.end(); ++it) {
        if (!iv.end.b.empty() && !(it->first < iv.end)) break;
        if (!catalog_.belongs_to(t, it->first)) continue;
        audit_access(txn, it->first);
        out.emplace_back(it->first, it->second);
    }
    return out;
}

const RowValue* Engine::read_row(Txn& txn, const Key& k) {
    audit_access(txn, k);
    return store_.get(k);
}

void Engine::write_row(Txn& txn, const Key& k, RowValue row) {
    audit_access(txn, k);
    const RowValue* prev = store_.get(k);
    txn.row_undo_.push_back({k, prev ? std::optional<RowValue>(*prev) : std::nullopt});
    store_.put(k, std::move(row));
}

bool Engine::erase_row(Txn& txn, const Key& k) {
    audit_access(txn, k);
    const RowValue* prev = store_.get(k);
    if (!prev) return false;
    txn.row_undo_.push_back({k, *prev});
    return store_.erase(k);
}

void Engine::set_marker(Txn& txn, const Key& k) {
    audit_access(txn, k);
    txn.marker_undo_.push_back({k, markers_.count(k) > 0});
    markers_.insert(k);
}

void Engine::bump_migrated(Txn& txn, const Key& k) {
    ++migrated_counts_[k];
    txn.migrated_keys_.push_back(k);
}

int Engine::migrated_count(const Key& k) const {
    auto it = migrated_counts_.find(k);
    return it == migrated_counts_.end() ? 0 : it->second;
}

void Engine::charge_hop(Txn& txn, NodeId from, NodeId to, const std::string& purpose) {
    if (from == to) return;  // same-node messages are free
    txn.ledger.push_back(HopEntry{from, to, purpose});
    ++txn.round_trips;
    txn.last_stmt_duration += rtt_;
    txn.total_duration += rtt_;
}

void Engine::charge_service(Txn& txn, Tick amount) {
    txn.last_stmt_duration += amount;
    txn.total_duration += amount;
}

const RowValue* Engine::read_at(Txn& txn, NodeId node, const Key& k) {
    if (cluster_.leaseholder(k) != node) {
        throw RoutingViolation("read at node " + std::to_string(node) +
                               " which does not hold the lease for " + k.hex());
    }
    return read_row(txn, k);
}

bool Engine::commit(Txn& txn) {
    std::lock_guard lk(mu_);
    if (txn.wounded) return false;
    if (!txn.active) throw std::logic_error("commit on finished txn");
    finish_commit(txn);
    return true;
}

void Engine::finish_commit(Txn& txn) {
    txn.row_undo_.clear();
    txn.marker_undo_.clear();
    txn.migrated_keys_.clear();
    for (int h : txn.served_migrations_) {
        if (Migration* m = migration(h); m && m->first_service < 0) m->first_service = now_;
    }
    txn.served_migrations_.clear();
    release_locks(txn);
    txn.active = false;
    if (post_commit_hook) post_commit_hook(*this, txn);
}

void Engine::abort(Txn& txn) {
    std::lock_guard lk(mu_);
    if (!txn.active) {
        txn.wounded = false;
        return;  // already wounded and rolled back
    }
    rollback(txn);
    release_locks(txn);
    txn.active = false;
}

Migration* Engine::migration(int handle) {
    for (auto& m : migrations_) {
        if (m->handle == handle) return m.get();
    }
    return nullptr;
}

Migration* Engine::migration_for_table(TableId tid) {
    for (auto& m : migrations_) {
        if (!m->active()) continue;
        if (std::find(m->old_tids.begin(), m->old_tids.end(), tid) != m->old_tids.end() ||
            std::find(m->new_tids.begin(), m->new_tids.end(), tid) != m->new_tids.end()) {
            return m.get();
        }
    }
    return nullptr;
}

AvailabilityReport Engine::availability(const Migration& mig) const {
    return AvailabilityReport{mig.registered_at, mig.first_service, mig.done_at};
}

ExecResult Engine::execute(Txn& txn, const Statement& stmt) {
    std::lock_guard lk(mu_);
    if (txn.wounded) return {ExecStatus::Wounded, {}, "wounded"};
    if (!txn.active) throw std::logic_error("execute on finished txn");
    txn.last_stmt_duration = 0;
    try {
        return execute_locked(txn, stmt);
    } catch (const ConstraintError& e) {
        return {ExecStatus::Error, {}, e.what()};
    } catch (const CatalogError& e) {
        return {ExecStatus::Error, {}, e.what()};
    } catch (const EncodingError& e) {
        return {ExecStatus::Error, {}, e.what()};
    }
}

ExecResult Engine::execute_locked(Txn& txn, const Statement& stmt) {
    const TableDescriptor* t = catalog_.find(stmt.table);
    if (!t) throw CatalogError("no table named " + stmt.table);

    if (Migration* mig = migration_for_table(t->id)) {
        const bool is_new = std::find(mig->new_tids.begin(), mig->new_tids.end(), t->id) !=
                            mig->new_tids.end();
        if (mig->spec.strategy == Strategy::Osc) {
            if (is_new) {
                if (mig->state.osc_state != OscState::Public) {
                    return {ExecStatus::Error, {}, kNotAvailable};
                }
                return plain_execute(txn, *t, stmt);
            }
            return MigrationExec::run_osc(*this, txn, *mig, *t, stmt);
        }
        if (is_new) {
            if (stmt.kind == StmtKind::Insert) {
                return MigrationExec::run_insert_direct(*this, txn, *mig, *t, stmt);
            }
            if (is_fused(mig->spec.strategy)) {
                return MigrationExec::run_fusion(*this, txn, *mig, *t, stmt);
            }
            return MigrationExec::run_lazy(*this, txn, *mig, *t, stmt);
        }
        return MigrationExec::run_source_stmt(*this, txn, *mig, *t, stmt);
    }
    // a completed lazy migration still accepts source-shaped inserts on its
    // new tables, so clients need not switch payload shapes at drain time
    if (stmt.kind == StmtKind::Insert && stmt.row.size() != t->columns.size()) {
        for (auto& m : migrations_) {
            if (std::find(m->new_tids.begin(), m->new_tids.end(), t->id) != m->new_tids.end()) {
                return MigrationExec::run_insert_direct(*this, txn, *m, *t, stmt);
            }
        }
    }
    return plain_execute(txn, *t, stmt);
}

ExecResult Engine::plain_execute(Txn& txn, const TableDescriptor& t, const Statement& stmt) {
    if (stmt.kind == StmtKind::Insert) {
        if (stmt.row.size() != t.columns.size()) {
            throw ConstraintError("insert arity mismatch for " + t.name);
        }
        RowValue row{stmt.row};
        Key k = catalog_.row_key(t, row);
        Key end = k;
        end.b.push_back('\0');
        KeyInterval iv{k, end};
        if (ExecStatus st = acquire_locks(txn, std::span(&iv, 1)); st != ExecStatus::Ok) {
            return {st, {}, "lock conflict"};
        }
        if (read_row(txn, k)) throw ConstraintError("duplicate pk in " + t.name);
        write_row(txn, k, std::move(row));
        for (NodeId n : cluster_.leaseholders_in(iv)) {
            charge_hop(txn, txn.gateway, n, "stmt");
        }
        charge_service(txn, svc_usr_);
        return {ExecStatus::Ok, {}, ""};
    }

    KeyInterval iv = scan_interval(catalog_, t, stmt.pred);
    if (ExecStatus st = acquire_locks(txn, std::span(&iv, 1)); st != ExecStatus::Ok) {
        return {st, {}, "lock conflict"};
    }
    std::vector<RowValue> out;
    auto rows = scan_rows(txn, t, iv);
    for (auto& [k, row] : rows) {
        if (!stmt.pred.matches(t, row)) continue;
        switch (stmt.kind) {
            case StmtKind::Select:
                out.push_back(row);
                break;
            case StmtKind::Update: {
                RowValue updated = row;
                for (const Assignment& a : stmt.sets) {
                    int idx = t.col_index(a.column);
                    if (idx < 0) throw CatalogError("no column " + a.column + " in " + t.name);
                    if (std::find(t.pk.begin(), t.pk.end(), static_cast<size_t>(idx)) !=
                        t.pk.end()) {
                        throw CatalogError("updating pk columns is unsupported");
                    }
                    updated.columns[static_cast<size_t>(idx)] = a.value;
                }
                write_row(txn, k, updated);
                out.push_back(std::move(updated));
                break;
            }
            case StmtKind::Delete:
                erase_row(txn, k);
                out.push_back(row);
                break;
            default:
                break;
        }
    }
    for (NodeId n : cluster_.leaseholders_in(iv)) {
        charge_hop(txn, txn.gateway, n, "stmt");
    }
    charge_service(txn, svc_usr_);
    return {ExecStatus::Ok, std::move(out), ""};
}

std::string canonical_table_dump(const Engine& eng, const TableDescriptor& t) {
    // logical rows, plain-encoded keys, independent of the physical layout
    std::map<Key, const RowValue*> rows;
    KeyInterval iv = table_interval(t);
    const Store& store = eng.store();
    for (auto it = store.lower_bound(iv.start); it != store.end(); ++it) {
        if (!iv.end.b.empty() && !(it->first < iv.end)) break;
        if (!eng.catalog().belongs_to(t, it->first)) continue;
        rows.emplace(eng.catalog().plain_row_key(t, it->second), &it->second);
    }
    std::ostringstream out;
    for (const auto& [k, row] : rows) {
        out << k.hex() << '\t';
        for (size_t i = 0; i < row->columns.size(); ++i) {
            if (i) out << ',';
            out << value_to_string(row->columns[i]);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace slsm
