#include <algorithm>
#include <limits>

#include "slsm/migration_exec.hpp"

namespace slsm {

namespace {

Value default_value(ColType t) {
    switch (t) {
        case ColType::Int: return int64_t{0};
        case ColType::Dec: return Dec{0};
        default: return std::string{};
    }
}

Value sentinel_value(ColType t) {
    switch (t) {
        case ColType::Int: return std::numeric_limits<int64_t>::min() + 1;
        case ColType::Dec: return Dec{std::numeric_limits<int64_t>::min() + 1};
        default: return std::string("\x01__probe__");
    }
}

Key point_end(const Key& k) {
    Key e = k;
    e.b.push_back('\0');
    return e;
}

Value add_values(const Value& a, const Value& b) {
    if (std::holds_alternative<Dec>(a)) return std::get<Dec>(a) + std::get<Dec>(b);
    return std::get<int64_t>(a) + std::get<int64_t>(b);
}

Value sub_values(const Value& a, const Value& b) {
    if (std::holds_alternative<Dec>(a)) return std::get<Dec>(a) - std::get<Dec>(b);
    return std::get<int64_t>(a) - std::get<int64_t>(b);
}

// Truncates an anchor-region key to its first `arity` pk columns.
std::optional<Key> truncate_key(const Catalog& cat, const TableDescriptor& anchor, size_t arity,
                                const Key& key) {
    try {
        size_t pos = 0;
        if (keycodec::decode_table_id(key, &pos) != anchor.id) return std::nullopt;
        std::vector<ColType> types;
        for (size_t i = 0; i < arity; ++i) types.push_back(anchor.columns[anchor.pk[i]].type);
        keycodec::decode_values(key, types, &pos);
        Key root;
        root.b = key.b.substr(0, pos);
        return root;
    } catch (const EncodingError&) {
        return std::nullopt;
    }
    (void)cat;
}

// Predicate restricted to columns that exist on `t`.
Predicate restrict_pred(const TableDescriptor& t, const Predicate& p) {
    Predicate out;
    for (const Condition& c : p.conds) {
        if (t.col_index(c.column) >= 0) out.conds.push_back(c);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Registration
// ---------------------------------------------------------------------------

int Engine::register_migration(const MigrationSpec& spec) {
    std::lock_guard lk(mu_);
    spec.validate();

    auto mig = std::make_unique<Migration>();
    mig->handle = next_handle_++;
    mig->spec = spec;

    for (const auto& name : spec.old_tables) {
        const TableDescriptor* t = catalog_.find(name);
        if (!t) throw CatalogError("old table does not exist: " + name);
        if (migration_for_table(t->id)) {
            throw CatalogError("conflicting active migration on " + name);
        }
        mig->old_tids.push_back(t->id);
    }

    // anchor: the source the drain walks; for joins, the side whose rows map
    // one-to-one onto new rows (the other side must be point-lookupable via
    // the join keys)
    TableId partner_tid = 0;
    if (spec.mclass == MigrationClass::Join) {
        const auto& t0 = catalog_.table(mig->old_tids[0]);
        const auto& t1 = catalog_.table(mig->old_tids[1]);
        auto pk_in_join_cols = [&](const TableDescriptor& t, bool left) {
            for (size_t pk_col : t.pk) {
                const std::string& name = t.columns[pk_col].name;
                bool found = false;
                for (const auto& [l, r] : spec.join_keys) {
                    if ((left ? l : r) == name) found = true;
                }
                if (!found) return false;
            }
            return true;
        };
        if (pk_in_join_cols(t1, false)) {
            mig->anchor_tid = t0.id;
            partner_tid = t1.id;
        } else if (pk_in_join_cols(t0, true)) {
            mig->anchor_tid = t1.id;
            partner_tid = t0.id;
        } else {
            throw CatalogError("join requires one side whose pk is covered by the join keys");
        }
    } else {
        mig->anchor_tid = mig->old_tids[0];
    }
    const TableDescriptor& anchor = catalog_.table(mig->anchor_tid);

    // colocation prefix arity and pk-containment check
    size_t prefix_cols = anchor.pk.size();
    if (spec.mclass == MigrationClass::Preaggregate) {
        prefix_cols = spec.group_keys.size();
        for (size_t i = 0; i < prefix_cols && i < anchor.pk.size(); ++i) {
            if (spec.group_keys[i] != anchor.columns[anchor.pk[i]].name) prefix_cols = 0;
        }
        if (prefix_cols > anchor.pk.size()) prefix_cols = 0;
    }
    auto contains_anchor_pk = [&](const NewTableDef& nt) {
        if (prefix_cols == 0 || nt.pk.size() < prefix_cols) return false;
        for (size_t i = 0; i < prefix_cols; ++i) {
            const std::string& dest = nt.pk[i];
            bool ok = false;
            for (const auto& [d, src] : nt.column_map) {
                if (d == dest && src.table == anchor.name &&
                    src.column == anchor.columns[anchor.pk[i]].name) {
                    ok = true;
                }
            }
            if (!ok) return false;
        }
        return true;
    };
    bool containment = true;
    for (const auto& nt : spec.new_tables) containment = containment && contains_anchor_pk(nt);

    if (wants_prefixed(spec.strategy)) {
        if (containment) {
            mig->prefixed = true;
        } else {
            mig->prefix_fallback = true;  // fall back to plain keys
        }
    }

    // install the new (empty) tables
    for (const auto& nt : spec.new_tables) {
        KeyMode mode;
        if (mig->prefixed) {
            mode.prefixed = true;
            mode.parent_tid = mig->anchor_tid;
            mode.prefix_cols = prefix_cols;
        }
        TableId tid = catalog_.add_table(nt.name, nt.columns, nt.pk, mode);
        mig->new_tids.push_back(tid);
        if (!mig->prefixed) {
            cluster_.split_range(keycodec::table_region_start(tid));
            uint64_t rid = cluster_.split_range(keycodec::table_region_end(tid));
            // the freshly created right-hand range is the tail; the table's
            // own range is the one covering its region start
            (void)rid;
            const Range& r = cluster_.route(keycodec::table_region_start(tid));
            cluster_.transfer_lease(r.id, static_cast<NodeId>(admin_rng_.below(
                                              static_cast<uint64_t>(cfg_.nodes))));
        }
    }
    if (mig->prefixed && spec.mclass == MigrationClass::Preaggregate) {
        // group-grained colocation may invalidate finer existing boundaries
        cluster_.normalize_boundaries();
    }

    // resolve column maps
    for (size_t i = 0; i < spec.new_tables.size(); ++i) {
        const auto& nt = spec.new_tables[i];
        const TableDescriptor& nd = catalog_.table(mig->new_tids[i]);
        std::vector<Migration::ResolvedColumn> cols;
        for (const auto& col : nd.columns) {
            const ColumnSource* src = nullptr;
            for (const auto& [d, s] : nt.column_map) {
                if (d == col.name) src = &s;
            }
            if (!src) {
                if (spec.mclass == MigrationClass::Preaggregate &&
                    col.name == spec.agg_dest_column) {
                    cols.push_back({mig->anchor_tid, -1});
                    continue;
                }
                throw CatalogError("no column mapping for " + nt.name + "." + col.name);
            }
            const TableDescriptor& st = catalog_.table(src->table);
            int idx = st.col_index(src->column);
            if (idx < 0) throw CatalogError("bad column source " + src->table + "." + src->column);
            cols.push_back({st.id, idx});
        }
        mig->column_maps.push_back(std::move(cols));
    }

    if (spec.mclass == MigrationClass::Join) {
        for (const auto& [l, r] : spec.join_keys) {
            const TableDescriptor& t0 = catalog_.table(mig->old_tids[0]);
            const TableDescriptor& t1 = catalog_.table(mig->old_tids[1]);
            int i0 = t0.col_index(l);
            int i1 = t1.col_index(r);
            if (i0 < 0 || i1 < 0) throw CatalogError("bad join key " + l + "=" + r);
            mig->join_key_cols[t0.id].push_back(static_cast<size_t>(i0));
            mig->join_key_cols[t1.id].push_back(static_cast<size_t>(i1));
        }
        (void)partner_tid;
    }
    if (spec.mclass == MigrationClass::Preaggregate) {
        for (const auto& g : spec.group_keys) {
            int idx = anchor.col_index(g);
            if (idx < 0) throw CatalogError("bad group key " + g);
            mig->group_key_cols.push_back(static_cast<size_t>(idx));
        }
        int idx = anchor.col_index(spec.agg_source_column);
        if (idx < 0) throw CatalogError("bad aggregate column " + spec.agg_source_column);
        mig->agg_src_col = static_cast<size_t>(idx);
    }

    mig->state.drain_cursor = keycodec::table_region_start(mig->anchor_tid);
    mig->registered_at = now_;
    if (spec.strategy == Strategy::Bullfrog) {
        // bullfrog's background pass replays the whole table as captured now
        KeyInterval iv{keycodec::table_region_start(mig->anchor_tid),
                       keycodec::table_region_end(mig->anchor_tid)};
        for (auto it = store_.lower_bound(iv.start); it != store_.end(); ++it) {
            if (!(it->first < iv.end)) break;
            if (catalog_.belongs_to(anchor, it->first)) {
                mig->initial_anchor_keys.push_back(it->first);
            }
        }
    }

    migrations_.push_back(std::move(mig));
    return migrations_.back()->handle;
}

// ---------------------------------------------------------------------------
// Predicate rewriting
// ---------------------------------------------------------------------------

std::map<TableId, Predicate> Engine::rewrite_predicate(const Migration& mig, TableId new_tid,
                                                       const Predicate& p) const {
    size_t idx = 0;
    while (idx < mig.new_tids.size() && mig.new_tids[idx] != new_tid) ++idx;
    if (idx == mig.new_tids.size()) throw CatalogError("table not part of this migration");
    const TableDescriptor& nd = catalog_.table(new_tid);

    std::map<TableId, Predicate> out;
    for (TableId tid : mig.old_tids) out[tid];  // tautology per source by default
    for (const Condition& c : p.conds) {
        int dest = nd.col_index(c.column);
        if (dest < 0) throw CatalogError("predicate column not in " + nd.name + ": " + c.column);
        const auto& rc = mig.column_maps[idx][static_cast<size_t>(dest)];
        if (rc.src_col < 0) {
            throw RewriteUnsupported("predicate on aggregate output column " + c.column);
        }
        const TableDescriptor& sd = catalog_.table(rc.src_tid);
        out[rc.src_tid].conds.push_back(
            Condition{sd.columns[static_cast<size_t>(rc.src_col)].name, c.op, c.literal});
        if (mig.spec.mclass == MigrationClass::Join) {
            // an equality on a join key constrains both sources
            auto it = mig.join_key_cols.find(rc.src_tid);
            if (it != mig.join_key_cols.end()) {
                for (size_t pos = 0; pos < it->second.size(); ++pos) {
                    if (it->second[pos] != static_cast<size_t>(rc.src_col)) continue;
                    for (TableId other : mig.old_tids) {
                        if (other == rc.src_tid) continue;
                        const auto& cols = mig.join_key_cols.at(other);
                        const TableDescriptor& od = catalog_.table(other);
                        out[other].conds.push_back(
                            Condition{od.columns[cols[pos]].name, c.op, c.literal});
                    }
                }
            }
        }
    }
    return out;
}

std::map<TableId, Predicate> MigrationExec::rewrite_scope(Engine& eng, const Migration& mig,
                                                          TableId new_tid, const Predicate& p,
                                                          bool* widened) {
    try {
        if (widened) *widened = false;
        return eng.rewrite_predicate(mig, new_tid, p);
    } catch (const RewriteUnsupported&) {
        // unrewritable predicate: widen the migration scope to the whole
        // table (whole groups fall out of the group widening below)
        if (widened) *widened = true;
        std::map<TableId, Predicate> out;
        for (TableId tid : mig.old_tids) out[tid];
        return out;
    }
}

// ---------------------------------------------------------------------------
// Lock planning and hop accounting
// ---------------------------------------------------------------------------

Key MigrationExec::group_root_for(Engine& eng, const Migration& mig, const Key& anchor_key) {
    const TableDescriptor& anchor = eng.catalog().table(mig.anchor_tid);
    const size_t arity = mig.spec.mclass == MigrationClass::Preaggregate
                             ? mig.group_key_cols.size()
                             : anchor.pk.size();
    auto root = truncate_key(eng.catalog(), anchor, arity, anchor_key);
    return root ? *root : anchor_key;
}

KeyInterval MigrationExec::widen_to_groups(Engine& eng, const Migration& mig, KeyInterval iv) {
    if (mig.spec.mclass != MigrationClass::Preaggregate) return iv;
    const TableDescriptor& anchor = eng.catalog().table(mig.anchor_tid);
    const size_t arity = mig.group_key_cols.size();
    if (auto root = truncate_key(eng.catalog(), anchor, arity, iv.start)) iv.start = *root;
    if (!iv.end.b.empty()) {
        if (auto root = truncate_key(eng.catalog(), anchor, arity, iv.end)) {
            if (*root != iv.end) {
                auto e = keycodec::prefix_end(*root);
                iv.end = e ? *e : Key{};
            }
        }
    }
    return iv;
}

MigrationExec::LockPlan MigrationExec::lazy_lock_plan(Engine& eng, const Migration& mig,
                                                      const TableDescriptor& new_t,
                                                      const Statement& stmt,
                                                      const std::map<TableId, Predicate>& scope) {
    (void)new_t;
    LockPlan plan;
    for (TableId tid : mig.old_tids) {
        const TableDescriptor& sd = eng.catalog().table(tid);
        auto it = scope.find(tid);
        KeyInterval iv = scan_interval(eng.catalog(), sd,
                                       it == scope.end() ? Predicate::all() : it->second);
        if (tid == mig.anchor_tid) iv = widen_to_groups(eng, mig, iv);
        plan.old_ivs.push_back(iv);
    }
    for (TableId tid : mig.new_tids) {
        const TableDescriptor& nd = eng.catalog().table(tid);
        plan.new_ivs.push_back(scan_interval(eng.catalog(), nd, restrict_pred(nd, stmt.pred)));
    }
    return plan;
}

std::string MigrationExec::charge_lazy_hops(Engine& eng, Txn& txn, const Migration& mig,
                                            const LockPlan& plan, bool fused) {
    std::set<NodeId> old_lhs, new_lhs;
    for (const auto& iv : plan.old_ivs) {
        auto l = eng.cluster().leaseholders_in(iv);
        old_lhs.insert(l.begin(), l.end());
    }
    for (const auto& iv : plan.new_ivs) {
        auto l = eng.cluster().leaseholders_in(iv);
        new_lhs.insert(l.begin(), l.end());
    }
    const NodeId g = txn.gateway;
    std::set<NodeId> remote_old = old_lhs, remote_new = new_lhs;
    remote_old.erase(g);
    remote_new.erase(g);
    std::set<NodeId> contacts = remote_old;
    contacts.insert(remote_new.begin(), remote_new.end());
    for (NodeId n : contacts) eng.charge_hop(txn, g, n, fused ? "fusion" : "lazy");
    // without fusion the migrated rows relay through the gateway whenever
    // the old and new leaseholders are distinct remote nodes
    if (!fused && !remote_old.empty() && !remote_new.empty() && remote_old != remote_new) {
        eng.charge_hop(txn, g, *remote_new.begin(), "relay");
    }
    Tick svc = fused ? std::max(eng.svc_mig_, eng.svc_usr_) : eng.svc_mig_ + eng.svc_usr_;
    if (mig.prefixed) svc += eng.prefix_overhead_;
    eng.charge_service(txn, svc);

    if (old_lhs.size() == 1 && new_lhs.size() == 1) {
        const NodeId o = *old_lhs.begin(), n = *new_lhs.begin();
        if (g == o && g == n) return "gateway_old_new";
        if (g == o) return "gateway_old";
        if (g == n) return "gateway_new";
        if (o == n) return "old_new";
        return "none";
    }
    return "-";
}

// ---------------------------------------------------------------------------
// Row mapping and migration of matching scopes
// ---------------------------------------------------------------------------

RowValue MigrationExec::map_row(const Migration& mig, size_t new_idx,
                                const std::map<TableId, const RowValue*>& sources) {
    RowValue out;
    const auto& cols = mig.column_maps[new_idx];
    out.columns.reserve(cols.size());
    for (const auto& rc : cols) {
        if (rc.src_col < 0) {
            out.columns.push_back(Value{Dec{0}});  // aggregate slot, caller fills
            continue;
        }
        out.columns.push_back(sources.at(rc.src_tid)->columns[static_cast<size_t>(rc.src_col)]);
    }
    return out;
}

namespace {

// partner pk values derived from an anchor row through the join keys
std::vector<Value> partner_pk_from_anchor(const Catalog& cat, const Migration& mig,
                                          TableId partner_tid, const RowValue& anchor_row) {
    const TableDescriptor& partner = cat.table(partner_tid);
    const auto& pcols = mig.join_key_cols.at(partner_tid);
    const auto& acols = mig.join_key_cols.at(mig.anchor_tid);
    std::vector<Value> pk;
    for (size_t pk_col : partner.pk) {
        bool found = false;
        for (size_t pos = 0; pos < pcols.size(); ++pos) {
            if (pcols[pos] == pk_col) {
                pk.push_back(anchor_row.columns[acols[pos]]);
                found = true;
                break;
            }
        }
        if (!found) throw CatalogError("partner pk column not covered by join keys");
    }
    return pk;
}

}  // namespace

size_t MigrationExec::migrate_matching(Engine& eng, Txn& txn, Migration& mig,
                                       const std::map<TableId, Predicate>& scope,
                                       std::vector<std::pair<Key, RowValue>>* inserted,
                                       TableId collect_tid) {
    const Catalog& cat = eng.catalog();
    const TableDescriptor& anchor = cat.table(mig.anchor_tid);
    auto it = scope.find(mig.anchor_tid);
    const Predicate anchor_pred = it == scope.end() ? Predicate::all() : it->second;
    KeyInterval iv = widen_to_groups(eng, mig, scan_interval(cat, anchor, anchor_pred));
    auto rows = eng.scan_rows(txn, anchor, iv);

    size_t migrated = 0;
    switch (mig.spec.mclass) {
        case MigrationClass::Split: {
            for (auto& [k, row] : rows) {
                if (!anchor_pred.matches(anchor, row)) continue;
                std::map<TableId, const RowValue*> sources{{anchor.id, &row}};
                for (size_t i = 0; i < mig.new_tids.size(); ++i) {
                    const TableDescriptor& nd = cat.table(mig.new_tids[i]);
                    RowValue nr = map_row(mig, i, sources);
                    Key nk = cat.row_key(nd, nr);
                    if (nd.id == collect_tid && inserted) {
                        inserted->emplace_back(cat.plain_row_key(nd, nr), nr);
                    }
                    eng.write_row(txn, nk, std::move(nr));
                }
                eng.erase_row(txn, k);
                eng.bump_migrated(txn, k);
                ++migrated;
            }
            break;
        }
        case MigrationClass::Join: {
            TableId partner_tid =
                mig.old_tids[0] == mig.anchor_tid ? mig.old_tids[1] : mig.old_tids[0];
            const TableDescriptor& partner = cat.table(partner_tid);
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            for (auto& [k, row] : rows) {
                if (!anchor_pred.matches(anchor, row)) continue;
                if (eng.marker_set(k)) continue;
                auto ppk = partner_pk_from_anchor(cat, mig, partner_tid, row);
                Key pkey = cat.row_key_from_pk(partner, ppk);
                const RowValue* prow = eng.read_row(txn, pkey);
                if (prow) {
                    std::map<TableId, const RowValue*> sources{{anchor.id, &row},
                                                               {partner_tid, prow}};
                    RowValue nr = map_row(mig, 0, sources);
                    Key nk = cat.row_key(nd, nr);
                    if (nd.id == collect_tid && inserted) {
                        inserted->emplace_back(cat.plain_row_key(nd, nr), nr);
                    }
                    eng.write_row(txn, nk, std::move(nr));
                    eng.set_marker(txn, pkey);
                }
                eng.set_marker(txn, k);
                eng.bump_migrated(txn, k);
                ++migrated;
            }
            break;
        }
        case MigrationClass::Preaggregate: {
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            std::vector<Key> roots;
            for (auto& [k, row] : rows) {
                if (!anchor_pred.matches(anchor, row)) continue;
                if (eng.marker_set(k)) continue;
                Key root = group_root_for(eng, mig, k);
                if (std::find(roots.begin(), roots.end(), root) == roots.end()) {
                    roots.push_back(root);
                }
            }
            for (const Key& root : roots) {
                auto e = keycodec::prefix_end(root);
                KeyInterval giv{root, e ? *e : Key{}};
                auto grows = eng.scan_rows(txn, anchor, giv);
                if (grows.empty()) continue;
                std::map<TableId, const RowValue*> sources{{anchor.id, &grows.front().second}};
                RowValue nr = map_row(mig, 0, sources);
                Value total = default_value(nd.columns[static_cast<size_t>(
                                                          nd.col_index(mig.spec.agg_dest_column))]
                                                .type);
                for (auto& [gk, grow] : grows) {
                    total = add_values(total, grow.columns[mig.agg_src_col]);
                }
                int agg_idx = nd.col_index(mig.spec.agg_dest_column);
                nr.columns[static_cast<size_t>(agg_idx)] = total;
                Key nk = cat.row_key(nd, nr);
                if (nd.id == collect_tid && inserted) {
                    inserted->emplace_back(cat.plain_row_key(nd, nr), nr);
                }
                eng.write_row(txn, nk, std::move(nr));
                for (auto& [gk, grow] : grows) {
                    eng.set_marker(txn, gk);
                    eng.bump_migrated(txn, gk);
                    ++migrated;
                }
            }
            break;
        }
    }
    if (inserted) {
        std::sort(inserted->begin(), inserted->end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return migrated;
}

// ---------------------------------------------------------------------------
// Statement application on one table (locks already held)
// ---------------------------------------------------------------------------

ExecResult MigrationExec::apply_on_table(Engine& eng, Txn& txn, const TableDescriptor& t,
                                         const Statement& stmt) {
    const Catalog& cat = eng.catalog();
    KeyInterval iv = scan_interval(cat, t, stmt.pred);
    std::vector<RowValue> out;
    auto rows = eng.scan_rows(txn, t, iv);
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
                eng.write_row(txn, k, updated);
                out.push_back(std::move(updated));
                break;
            }
            case StmtKind::Delete:
                eng.erase_row(txn, k);
                out.push_back(row);
                break;
            default:
                break;
        }
    }
    return {ExecStatus::Ok, std::move(out), ""};
}

// ---------------------------------------------------------------------------
// Lazy and fusion execution
// ---------------------------------------------------------------------------

ExecResult MigrationExec::run_lazy(Engine& eng, Txn& txn, Migration& mig,
                                   const TableDescriptor& new_t, const Statement& stmt) {
    bool widened = false;
    auto scope = rewrite_scope(eng, mig, new_t.id, stmt.pred, &widened);
    LockPlan plan = lazy_lock_plan(eng, mig, new_t, stmt, scope);
    auto ivs = plan.all();
    if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) return {ExecStatus::Blocked, {}, ""};

    migrate_matching(eng, txn, mig, scope, nullptr, 0);
    ExecResult res = apply_on_table(eng, txn, new_t, stmt);
    txn.category = charge_lazy_hops(eng, txn, mig, plan, /*fused=*/false);
    txn.touched_new_schema = true;
    txn.served_migrations_.insert(mig.handle);
    return res;
}

ExecResult MigrationExec::run_fusion(Engine& eng, Txn& txn, Migration& mig,
                                     const TableDescriptor& new_t, const Statement& stmt) {
    bool widened = false;
    auto scope = rewrite_scope(eng, mig, new_t.id, stmt.pred, &widened);
    LockPlan plan = lazy_lock_plan(eng, mig, new_t, stmt, scope);
    auto ivs = plan.all();
    if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) return {ExecStatus::Blocked, {}, ""};

    ExecResult res;
    if (stmt.kind == StmtKind::Select) {
        // scan of the new schema, merged with the insert-returning stream
        const Catalog& cat = eng.catalog();
        std::vector<std::pair<Key, RowValue>> existing;
        KeyInterval niv = scan_interval(cat, new_t, stmt.pred);
        for (auto& [k, row] : eng.scan_rows(txn, new_t, niv)) {
            if (stmt.pred.matches(new_t, row)) {
                existing.emplace_back(cat.plain_row_key(new_t, row), row);
            }
        }
        std::vector<std::pair<Key, RowValue>> inserted;
        migrate_matching(eng, txn, mig, scope, &inserted, new_t.id);
        std::erase_if(inserted,
                      [&](const auto& kv) { return !stmt.pred.matches(new_t, kv.second); });
        std::vector<std::pair<Key, RowValue>> merged;
        std::merge(existing.begin(), existing.end(), inserted.begin(), inserted.end(),
                   std::back_inserter(merged),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
        res.status = ExecStatus::Ok;
        for (auto& [k, row] : merged) res.rows.push_back(std::move(row));
    } else {
        // update/delete: migrate (insert-returning), then mutate the merged
        // rows in the new schema within the same transaction
        migrate_matching(eng, txn, mig, scope, nullptr, 0);
        res = apply_on_table(eng, txn, new_t, stmt);
    }
    txn.category = charge_lazy_hops(eng, txn, mig, plan, /*fused=*/true);
    txn.touched_new_schema = true;
    txn.served_migrations_.insert(mig.handle);
    return res;
}

// ---------------------------------------------------------------------------
// Direct INSERT on a lazily migrating new table
// ---------------------------------------------------------------------------

ExecResult MigrationExec::run_insert_direct(Engine& eng, Txn& txn, Migration& mig,
                                            const TableDescriptor& new_t, const Statement& stmt) {
    (void)new_t;
    const Catalog& cat = eng.catalog();
    const TableDescriptor& anchor = cat.table(mig.anchor_tid);
    std::vector<KeyInterval> ivs;
    std::vector<KeyInterval> old_side, new_side;

    auto charge_insert = [&](bool prefixed) {
        std::set<NodeId> contacts;
        for (const auto& iv : ivs) {
            auto l = eng.cluster().leaseholders_in(iv);
            contacts.insert(l.begin(), l.end());
        }
        contacts.erase(txn.gateway);
        for (NodeId n : contacts) eng.charge_hop(txn, txn.gateway, n, "insert");
        eng.charge_service(txn, eng.svc_usr_ + (prefixed ? eng.prefix_overhead_ : Tick{0}));
    };

    switch (mig.spec.mclass) {
        case MigrationClass::Split: {
            if (stmt.row.size() != anchor.columns.size()) {
                throw ConstraintError("split direct insert expects a source-shaped row");
            }
            RowValue old_row{stmt.row};
            Key old_key = cat.row_key(anchor, old_row);
            auto ge = keycodec::prefix_end(old_key);
            ivs.push_back({old_key, ge ? *ge : Key{}});  // covers colocated children
            std::map<TableId, const RowValue*> sources{{anchor.id, &old_row}};
            std::vector<std::pair<Key, RowValue>> new_rows;
            for (size_t i = 0; i < mig.new_tids.size(); ++i) {
                const TableDescriptor& nd = cat.table(mig.new_tids[i]);
                RowValue nr = map_row(mig, i, sources);
                Key nk = cat.row_key(nd, nr);
                if (!mig.prefixed) ivs.push_back({nk, point_end(nk)});
                new_rows.emplace_back(std::move(nk), std::move(nr));
            }
            if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) return {ExecStatus::Blocked, {}, ""};
            if (eng.read_row(txn, old_key)) {
                throw ConstraintError("pk still present unmigrated in " + anchor.name);
            }
            for (auto& [nk, nr] : new_rows) {
                if (eng.read_row(txn, nk)) throw ConstraintError("duplicate pk in new schema");
                eng.write_row(txn, nk, std::move(nr));
            }
            charge_insert(mig.prefixed);
            break;
        }
        case MigrationClass::Join: {
            if (stmt.row.size() != anchor.columns.size()) {
                throw ConstraintError("join direct insert expects an anchor-shaped row");
            }
            TableId partner_tid =
                mig.old_tids[0] == mig.anchor_tid ? mig.old_tids[1] : mig.old_tids[0];
            const TableDescriptor& partner = cat.table(partner_tid);
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            RowValue anchor_row{stmt.row};
            Key anchor_key = cat.row_key(anchor, anchor_row);
            auto ge = keycodec::prefix_end(anchor_key);
            ivs.push_back({anchor_key, ge ? *ge : Key{}});
            Key pkey = cat.row_key_from_pk(
                partner, partner_pk_from_anchor(cat, mig, partner_tid, anchor_row));
            ivs.push_back({pkey, point_end(pkey)});
            std::optional<KeyInterval> plain_new;
            if (!mig.prefixed) {
                // the new key depends on the partner row only through
                // non-key columns, so the anchor pk determines it
                std::map<TableId, const RowValue*> probe{{anchor.id, &anchor_row},
                                                         {partner_tid, &anchor_row}};
                (void)probe;
            }
            if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) return {ExecStatus::Blocked, {}, ""};
            if (eng.read_row(txn, anchor_key) && !eng.marker_set(anchor_key)) {
                throw ConstraintError("pk still present unmigrated in " + anchor.name);
            }
            const RowValue* prow = eng.read_row(txn, pkey);
            if (!prow) throw ConstraintError("no matching row in " + partner.name);
            std::map<TableId, const RowValue*> sources{{anchor.id, &anchor_row},
                                                       {partner_tid, prow}};
            RowValue nr = map_row(mig, 0, sources);
            Key nk = cat.row_key(nd, nr);
            if (!mig.prefixed) {
                KeyInterval niv{nk, point_end(nk)};
                if (eng.acquire_locks(txn, std::span(&niv, 1)) != ExecStatus::Ok) {
                    return {ExecStatus::Blocked, {}, ""};
                }
                ivs.push_back(niv);
            }
            if (eng.read_row(txn, nk)) throw ConstraintError("duplicate pk in " + nd.name);
            eng.write_row(txn, nk, std::move(nr));
            (void)plain_new;
            charge_insert(mig.prefixed);
            break;
        }
        case MigrationClass::Preaggregate: {
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            if (stmt.row.size() != nd.columns.size()) {
                throw ConstraintError("preaggregate direct insert expects a new-table row");
            }
            RowValue nr{stmt.row};
            Key nk = cat.row_key(nd, nr);
            // the whole group must already be consumed from the source
            std::vector<Value> gvals = nd.pk_of(nr);
            gvals.resize(mig.group_key_cols.size());
            Key root = keycodec::encode_key(mig.anchor_tid, gvals);
            auto ge = keycodec::prefix_end(root);
            ivs.push_back({root, ge ? *ge : Key{}});
            if (!mig.prefixed) ivs.push_back({nk, point_end(nk)});
            if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) return {ExecStatus::Blocked, {}, ""};
            for (auto& [k, row] : eng.scan_rows(txn, anchor, ivs.front())) {
                if (!eng.marker_set(k)) {
                    throw ConstraintError("group still present unmigrated in " + anchor.name);
                }
            }
            if (eng.read_row(txn, nk)) throw ConstraintError("duplicate pk in " + nd.name);
            eng.write_row(txn, nk, std::move(nr));
            charge_insert(mig.prefixed);
            break;
        }
    }
    txn.touched_new_schema = true;
    txn.served_migrations_.insert(mig.handle);
    return {ExecStatus::Ok, {}, ""};
}

// ---------------------------------------------------------------------------
// Statements on source tables while a lazy migration is active
// ---------------------------------------------------------------------------

ExecResult MigrationExec::run_source_stmt(Engine& eng, Txn& txn, Migration& mig,
                                          const TableDescriptor& old_t, const Statement& stmt) {
    const Catalog& cat = eng.catalog();
    if (stmt.kind == StmtKind::Select) return eng.plain_execute(txn, old_t, stmt);

    switch (mig.spec.mclass) {
        case MigrationClass::Split: {
            if (stmt.kind == StmtKind::Insert) {
                if (stmt.row.size() != old_t.columns.size()) {
                    throw ConstraintError("insert arity mismatch for " + old_t.name);
                }
                RowValue row{stmt.row};
                Key k = cat.row_key(old_t, row);
                auto ge = keycodec::prefix_end(k);
                std::vector<KeyInterval> ivs{{k, ge ? *ge : Key{}}};
                std::map<TableId, const RowValue*> sources{{old_t.id, &row}};
                const TableDescriptor& n0 = cat.table(mig.new_tids[0]);
                RowValue nr0 = map_row(mig, 0, sources);
                Key nk0 = cat.row_key(n0, nr0);
                if (!mig.prefixed) ivs.push_back({nk0, point_end(nk0)});
                if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) {
                    return {ExecStatus::Blocked, {}, ""};
                }
                if (eng.read_row(txn, nk0)) {
                    throw ConstraintError("pk already migrated to new schema");
                }
                if (eng.read_row(txn, k)) throw ConstraintError("duplicate pk in " + old_t.name);
                eng.write_row(txn, k, std::move(row));
                std::set<NodeId> contacts = eng.cluster().leaseholders_in(ivs.front());
                contacts.erase(txn.gateway);
                for (NodeId n : contacts) eng.charge_hop(txn, txn.gateway, n, "stmt");
                eng.charge_service(txn, eng.svc_usr_);
                return {ExecStatus::Ok, {}, ""};
            }
            return eng.plain_execute(txn, old_t, stmt);
        }
        case MigrationClass::Join: {
            // columns copied into the joined table must stay immutable while
            // the migration is live; migrated rows would go stale otherwise
            if (stmt.kind == StmtKind::Update) {
                for (const Assignment& a : stmt.sets) {
                    int idx = old_t.col_index(a.column);
                    for (const auto& rc : mig.column_maps[0]) {
                        if (rc.src_tid == old_t.id && rc.src_col == idx) {
                            throw ConstraintError(
                                "updating columns copied by an active join migration "
                                "is unsupported");
                        }
                    }
                }
            }
            if (stmt.kind == StmtKind::Insert && old_t.id == mig.anchor_tid) {
                RowValue row{stmt.row};
                Key k = cat.row_key(old_t, row);
                if (eng.marker_set(k)) {
                    throw ConstraintError("pk already migrated to new schema");
                }
            }
            return eng.plain_execute(txn, old_t, stmt);
        }
        case MigrationClass::Preaggregate: {
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            const int agg_idx = nd.col_index(mig.spec.agg_dest_column);
            if (stmt.kind == StmtKind::Insert) {
                if (stmt.row.size() != old_t.columns.size()) {
                    throw ConstraintError("insert arity mismatch for " + old_t.name);
                }
                RowValue row{stmt.row};
                Key k = cat.row_key(old_t, row);
                Key root = group_root_for(eng, mig, k);
                auto ge = keycodec::prefix_end(root);
                std::vector<KeyInterval> ivs{{root, ge ? *ge : Key{}}};
                std::map<TableId, const RowValue*> sources{{old_t.id, &row}};
                RowValue nr = map_row(mig, 0, sources);
                Key nk = cat.row_key(nd, nr);
                if (!mig.prefixed) ivs.push_back({nk, point_end(nk)});
                if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) {
                    return {ExecStatus::Blocked, {}, ""};
                }
                if (eng.read_row(txn, k)) throw ConstraintError("duplicate pk in " + old_t.name);
                const RowValue* agg = eng.read_row(txn, nk);
                if (agg) {
                    // group already migrated: fold the new row in immediately
                    RowValue updated = *agg;
                    updated.columns[static_cast<size_t>(agg_idx)] =
                        add_values(updated.columns[static_cast<size_t>(agg_idx)],
                                   row.columns[mig.agg_src_col]);
                    eng.write_row(txn, nk, std::move(updated));
                    eng.write_row(txn, k, std::move(row));
                    eng.set_marker(txn, k);
                    eng.bump_migrated(txn, k);
                } else {
                    eng.write_row(txn, k, std::move(row));
                }
                std::set<NodeId> contacts = eng.cluster().leaseholders_in(ivs.front());
                contacts.erase(txn.gateway);
                for (NodeId n : contacts) eng.charge_hop(txn, txn.gateway, n, "stmt");
                eng.charge_service(txn, eng.svc_usr_);
                return {ExecStatus::Ok, {}, ""};
            }
            // update/delete: keep migrated groups' aggregates in step
            KeyInterval iv =
                widen_to_groups(eng, mig, scan_interval(cat, old_t, stmt.pred));
            std::vector<KeyInterval> ivs{iv};
            if (!mig.prefixed) ivs.push_back(table_interval(nd));
            if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) {
                return {ExecStatus::Blocked, {}, ""};
            }
            std::vector<RowValue> out;
            for (auto& [k, row] : eng.scan_rows(txn, old_t, iv)) {
                if (!stmt.pred.matches(old_t, row)) continue;
                const bool marked = eng.marker_set(k);
                std::map<TableId, const RowValue*> sources{{old_t.id, &row}};
                RowValue nr = map_row(mig, 0, sources);
                Key nk = cat.row_key(nd, nr);
                if (stmt.kind == StmtKind::Update) {
                    RowValue updated = row;
                    for (const Assignment& a : stmt.sets) {
                        int idx = old_t.col_index(a.column);
                        if (idx < 0) {
                            throw CatalogError("no column " + a.column + " in " + old_t.name);
                        }
                        updated.columns[static_cast<size_t>(idx)] = a.value;
                    }
                    if (marked) {
                        const RowValue* agg = eng.read_row(txn, nk);
                        if (agg) {
                            RowValue na = *agg;
                            Value delta = sub_values(updated.columns[mig.agg_src_col],
                                                     row.columns[mig.agg_src_col]);
                            na.columns[static_cast<size_t>(agg_idx)] =
                                add_values(na.columns[static_cast<size_t>(agg_idx)], delta);
                            eng.write_row(txn, nk, std::move(na));
                        }
                    }
                    eng.write_row(txn, k, updated);
                    out.push_back(std::move(updated));
                } else {  // delete
                    if (marked) {
                        const RowValue* agg = eng.read_row(txn, nk);
                        if (agg) {
                            RowValue na = *agg;
                            na.columns[static_cast<size_t>(agg_idx)] =
                                sub_values(na.columns[static_cast<size_t>(agg_idx)],
                                           row.columns[mig.agg_src_col]);
                            eng.write_row(txn, nk, std::move(na));
                        }
                    }
                    eng.erase_row(txn, k);
                    out.push_back(row);
                }
            }
            std::set<NodeId> contacts = eng.cluster().leaseholders_in(iv);
            contacts.erase(txn.gateway);
            for (NodeId n : contacts) eng.charge_hop(txn, txn.gateway, n, "stmt");
            eng.charge_service(txn, eng.svc_usr_);
            return {ExecStatus::Ok, std::move(out), ""};
        }
    }
    return eng.plain_execute(txn, old_t, stmt);
}

// ---------------------------------------------------------------------------
// OSC: double writes, backfill, state machine
// ---------------------------------------------------------------------------

void MigrationExec::mirror_upsert(Engine& eng, Txn& txn, Migration& mig,
                                  const TableDescriptor& src, const RowValue& row) {
    const Catalog& cat = eng.catalog();
    switch (mig.spec.mclass) {
        case MigrationClass::Split: {
            std::map<TableId, const RowValue*> sources{{src.id, &row}};
            for (size_t i = 0; i < mig.new_tids.size(); ++i) {
                const TableDescriptor& nd = cat.table(mig.new_tids[i]);
                RowValue nr = map_row(mig, i, sources);
                Key dest = cat.row_key(nd, nr);
                eng.write_row(txn, dest, std::move(nr));
            }
            break;
        }
        case MigrationClass::Join: {
            TableId partner_tid =
                mig.old_tids[0] == mig.anchor_tid ? mig.old_tids[1] : mig.old_tids[0];
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            if (src.id == mig.anchor_tid) {
                const TableDescriptor& partner = cat.table(partner_tid);
                Key pkey = cat.row_key_from_pk(
                    partner, partner_pk_from_anchor(cat, mig, partner_tid, row));
                const RowValue* prow = eng.read_row(txn, pkey);
                if (!prow) break;
                std::map<TableId, const RowValue*> sources{{src.id, &row},
                                                           {partner_tid, prow}};
                RowValue nr = map_row(mig, 0, sources);
                Key dest = cat.row_key(nd, nr);
                eng.write_row(txn, dest, std::move(nr));
            } else {
                // partner write: refresh every joined row deriving from it
                const TableDescriptor& anchor = cat.table(mig.anchor_tid);
                const auto& pcols = mig.join_key_cols.at(src.id);
                const auto& acols = mig.join_key_cols.at(mig.anchor_tid);
                for (auto& [k, arow] : eng.scan_rows(txn, anchor, table_interval(anchor))) {
                    bool match = true;
                    for (size_t pos = 0; pos < pcols.size(); ++pos) {
                        if (arow.columns[acols[pos]] != row.columns[pcols[pos]]) match = false;
                    }
                    if (!match) continue;
                    std::map<TableId, const RowValue*> sources{{mig.anchor_tid, &arow},
                                                               {src.id, &row}};
                    RowValue nr = map_row(mig, 0, sources);
                    Key dest = cat.row_key(nd, nr);
                    eng.write_row(txn, dest, std::move(nr));
                }
            }
            break;
        }
        case MigrationClass::Preaggregate: {
            // recompute the whole group from the (already updated) source
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            Key root = group_root_for(eng, mig, cat.row_key(src, row));
            auto ge = keycodec::prefix_end(root);
            KeyInterval giv{root, ge ? *ge : Key{}};
            auto grows = eng.scan_rows(txn, src, giv);
            std::map<TableId, const RowValue*> sources{{src.id, &row}};
            RowValue nr = map_row(mig, 0, sources);
            Key nk = cat.row_key(nd, nr);
            if (grows.empty()) {
                eng.erase_row(txn, nk);
                break;
            }
            int agg_idx = nd.col_index(mig.spec.agg_dest_column);
            Value total = default_value(nd.columns[static_cast<size_t>(agg_idx)].type);
            for (auto& [gk, grow] : grows) total = add_values(total, grow.columns[mig.agg_src_col]);
            nr.columns[static_cast<size_t>(agg_idx)] = total;
            eng.write_row(txn, nk, std::move(nr));
            break;
        }
    }
}

void MigrationExec::mirror_delete(Engine& eng, Txn& txn, Migration& mig,
                                  const TableDescriptor& src, const RowValue& row) {
    const Catalog& cat = eng.catalog();
    switch (mig.spec.mclass) {
        case MigrationClass::Split: {
            std::map<TableId, const RowValue*> sources{{src.id, &row}};
            for (size_t i = 0; i < mig.new_tids.size(); ++i) {
                const TableDescriptor& nd = cat.table(mig.new_tids[i]);
                RowValue nr = map_row(mig, i, sources);
                eng.erase_row(txn, cat.row_key(nd, nr));
            }
            break;
        }
        case MigrationClass::Join: {
            if (src.id != mig.anchor_tid) break;  // partner deletes are a non-goal
            TableId partner_tid =
                mig.old_tids[0] == mig.anchor_tid ? mig.old_tids[1] : mig.old_tids[0];
            const TableDescriptor& nd = cat.table(mig.new_tids[0]);
            const TableDescriptor& partner = cat.table(partner_tid);
            Key pkey =
                cat.row_key_from_pk(partner, partner_pk_from_anchor(cat, mig, partner_tid, row));
            const RowValue* prow = eng.read_row(txn, pkey);
            RowValue filler = row;
            std::map<TableId, const RowValue*> sources{{src.id, &row},
                                                       {partner_tid, prow ? prow : &filler}};
            // the new key depends only on anchor pk columns for a valid spec
            if (prow) {
                RowValue nr = map_row(mig, 0, sources);
                eng.erase_row(txn, cat.row_key(nd, nr));
            }
            break;
        }
        case MigrationClass::Preaggregate:
            mirror_upsert(eng, txn, mig, src, row);  // recompute handles removal
            break;
    }
}

ExecResult MigrationExec::run_osc(Engine& eng, Txn& txn, Migration& mig,
                                  const TableDescriptor& old_t, const Statement& stmt) {
    const Catalog& cat = eng.catalog();
    const OscState st = mig.state.osc_state;
    const bool is_write = stmt.kind != StmtKind::Select;
    const bool mirror_writes = is_write && st == OscState::WriteOnly;
    const bool mirror_deletes = is_write && (st == OscState::DeleteOnly || mirror_writes);

    std::vector<KeyInterval> ivs;
    KeyInterval base;
    if (stmt.kind == StmtKind::Insert) {
        if (stmt.row.size() != old_t.columns.size()) {
            throw ConstraintError("insert arity mismatch for " + old_t.name);
        }
        RowValue row{stmt.row};
        Key k = cat.row_key(old_t, row);
        base = {k, point_end(k)};
    } else {
        base = scan_interval(cat, old_t, stmt.pred);
        if (mig.spec.mclass == MigrationClass::Preaggregate && mirror_writes) {
            base = widen_to_groups(eng, mig, base);
        }
    }
    ivs.push_back(base);
    if (mirror_writes || mirror_deletes) {
        for (TableId tid : mig.new_tids) ivs.push_back(table_interval(cat.table(tid)));
        if (mig.spec.mclass == MigrationClass::Join) {
            for (TableId tid : mig.old_tids) {
                if (tid != old_t.id) ivs.push_back(table_interval(cat.table(tid)));
            }
        }
    }
    if (eng.acquire_locks(txn, ivs) != ExecStatus::Ok) return {ExecStatus::Blocked, {}, ""};

    std::vector<RowValue> out;
    int mirror_ops = 0;
    if (stmt.kind == StmtKind::Insert) {
        RowValue row{stmt.row};
        Key k = cat.row_key(old_t, row);
        if (eng.read_row(txn, k)) throw ConstraintError("duplicate pk in " + old_t.name);
        eng.write_row(txn, k, row);
        if (mirror_writes) {
            mirror_upsert(eng, txn, mig, old_t, row);
            ++mirror_ops;
        }
    } else {
        for (auto& [k, row] : eng.scan_rows(txn, old_t, base)) {
            if (!stmt.pred.matches(old_t, row)) continue;
            switch (stmt.kind) {
                case StmtKind::Select:
                    out.push_back(row);
                    break;
                case StmtKind::Update: {
                    RowValue updated = row;
                    for (const Assignment& a : stmt.sets) {
                        int idx = old_t.col_index(a.column);
                        if (idx < 0) {
                            throw CatalogError("no column " + a.column + " in " + old_t.name);
                        }
                        updated.columns[static_cast<size_t>(idx)] = a.value;
                    }
                    eng.write_row(txn, k, updated);
                    if (mirror_writes) {
                        mirror_upsert(eng, txn, mig, old_t, updated);
                        ++mirror_ops;
                    }
                    out.push_back(std::move(updated));
                    break;
                }
                case StmtKind::Delete:
                    eng.erase_row(txn, k);
                    if (mirror_deletes) {
                        mirror_delete(eng, txn, mig, old_t, row);
                        ++mirror_ops;
                    }
                    out.push_back(row);
                    break;
                default:
                    break;
            }
        }
    }

    std::set<NodeId> contacts = eng.cluster().leaseholders_in(base);
    if (mirror_ops > 0) {
        for (size_t i = 1; i < ivs.size(); ++i) {
            auto l = eng.cluster().leaseholders_in(ivs[i]);
            contacts.insert(l.begin(), l.end());
        }
    }
    contacts.erase(txn.gateway);
    for (NodeId n : contacts) {
        eng.charge_hop(txn, txn.gateway, n, mirror_ops ? "stmt+mirror" : "stmt");
    }
    eng.charge_service(txn, eng.svc_usr_);
    return {ExecStatus::Ok, std::move(out), ""};
}

OscState Engine::osc_step(Migration& mig) {
    std::lock_guard lk(mu_);
    if (mig.spec.strategy != Strategy::Osc) throw CatalogError("osc_step on a lazy migration");
    if (mig.state.done) return OscState::Public;

    switch (mig.state.osc_state) {
        case OscState::Absent:
            mig.state.osc_state = OscState::DeleteOnly;
            return mig.state.osc_state;
        case OscState::DeleteOnly:
            mig.state.osc_state = OscState::WriteOnly;
            mig.state.backfill_watermark = keycodec::table_region_start(mig.anchor_tid);
            return mig.state.osc_state;
        case OscState::WriteOnly:
            break;
        case OscState::Public:
            return OscState::Public;
    }

    // one backfill batch, watermark ordered
    const TableDescriptor& anchor = catalog_.table(mig.anchor_tid);
    const Key region_end = keycodec::table_region_end(mig.anchor_tid);
    std::vector<Key> batch;
    for (auto it = store_.lower_bound(mig.state.backfill_watermark); it != store_.end(); ++it) {
        if (!(it->first < region_end)) break;
        if (!catalog_.belongs_to(anchor, it->first)) continue;
        batch.push_back(it->first);
        if (batch.size() >= cfg_.osc_batch_size) break;
    }
    if (batch.empty()) {
        mig.state.osc_state = OscState::Public;
        mig.state.done = true;
        mig.done_at = now_;
        return OscState::Public;
    }

    Txn& txn = begin(0);
    Key batch_end = batch.back();
    batch_end.b.push_back('\0');
    std::vector<KeyInterval> ivs{{mig.state.backfill_watermark, batch_end}};
    if (mig.spec.mclass == MigrationClass::Preaggregate) {
        ivs[0] = MigrationExec::widen_to_groups(*this, mig, ivs[0]);
    }
    for (TableId tid : mig.new_tids) ivs.push_back(table_interval(catalog_.table(tid)));
    if (mig.spec.mclass == MigrationClass::Join) {
        for (TableId tid : mig.old_tids) {
            if (tid != mig.anchor_tid) ivs.push_back(table_interval(catalog_.table(tid)));
        }
    }
    if (acquire_locks(txn, ivs) != ExecStatus::Ok) {
        abort(txn);
        return mig.state.osc_state;  // no progress this tick, retried later
    }
    for (const Key& k : batch) {
        const RowValue* row = read_row(txn, k);
        if (!row) continue;  // deleted concurrently
        RowValue copy = *row;
        MigrationExec::mirror_upsert(*this, txn, mig, anchor, copy);
    }
    std::set<NodeId> contacts;
    for (const auto& iv : ivs) {
        auto l = cluster_.leaseholders_in(iv);
        contacts.insert(l.begin(), l.end());
    }
    contacts.erase(0);
    for (NodeId n : contacts) charge_hop(txn, 0, n, "backfill");
    charge_service(txn, svc_mig_);
    mig.state.backfill_watermark = batch_end;
    commit(txn);
    return mig.state.osc_state;
}

// ---------------------------------------------------------------------------
// Availability probe and drain support
// ---------------------------------------------------------------------------

Tick Engine::availability_probe(int handle, NodeId gateway) {
    Migration* mig = migration(handle);
    if (!mig) throw CatalogError("no migration with handle " + std::to_string(handle));
    const TableDescriptor& nd = catalog_.table(mig->new_tids[0]);
    Statement probe = Statement::select(
        nd.name, Predicate::eq(nd.columns[nd.pk[0]].name, sentinel_value(nd.columns[nd.pk[0]].type)));
    Txn& txn = begin(gateway);
    ExecResult res = execute(txn, probe);
    if (!res.ok()) {
        abort(txn);
        return -1;
    }
    if (!commit(txn)) return -1;
    // plain service (post-public osc, or an already-drained migration)
    // commits without touching the lazy bookkeeping
    if (mig->first_service < 0) mig->first_service = now_;
    return mig->first_service;
}

size_t Engine::migrate_anchor_keys(Txn& txn, Migration& mig, std::span<const Key> keys) {
    std::lock_guard lk(mu_);
    if (keys.empty()) return 0;
    const TableDescriptor& anchor = catalog_.table(mig.anchor_tid);

    std::vector<KeyInterval> ivs;
    for (const Key& k : keys) {
        Key root = MigrationExec::group_root_for(*this, mig, k);
        auto e = keycodec::prefix_end(root);
        ivs.push_back({root, e ? *e : Key{}});
    }
    if (!mig.prefixed) {
        for (TableId tid : mig.new_tids) ivs.push_back(table_interval(catalog_.table(tid)));
    }
    if (mig.spec.mclass == MigrationClass::Join) {
        for (TableId tid : mig.old_tids) {
            if (tid != mig.anchor_tid) ivs.push_back(table_interval(catalog_.table(tid)));
        }
    }
    if (acquire_locks(txn, ivs) != ExecStatus::Ok) return static_cast<size_t>(-1);

    // scope: exactly these anchor rows (and their groups)
    size_t migrated = 0;
    for (const Key& k : keys) {
        const RowValue* row = store_.get(k);
        if (!row) continue;
        if ((mig.spec.mclass != MigrationClass::Split) && marker_set(k)) continue;
        RowValue copy = *row;
        Predicate pred;
        for (size_t i = 0; i < anchor.pk.size(); ++i) {
            pred.with_eq(anchor.columns[anchor.pk[i]].name, copy.columns[anchor.pk[i]]);
        }
        std::map<TableId, Predicate> scope;
        for (TableId tid : mig.old_tids) scope[tid];
        scope[mig.anchor_tid] = pred;
        migrated += MigrationExec::migrate_matching(*this, txn, mig, scope, nullptr, 0);
    }
    std::set<NodeId> contacts;
    for (const auto& iv : ivs) {
        auto l = cluster_.leaseholders_in(iv);
        contacts.insert(l.begin(), l.end());
    }
    contacts.erase(txn.gateway);
    for (NodeId n : contacts) charge_hop(txn, txn.gateway, n, "drain");
    charge_service(txn, svc_mig_);
    return migrated;
}

}  // namespace slsm
