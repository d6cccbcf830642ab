// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

#include "slsm/background.hpp"
#include "slsm/bench.hpp"
#include "slsm/migration_exec.hpp"

using namespace slsm;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream why;
    template <typename T>
    void expect(bool cond, const T& detail) {
        if (!cond) {
            if (!ok) why << "; ";
            why << detail;
            ok = false;
        }
    }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<unreadable:" + p.string() + ">";
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

EngineConfig engine_cfg(int nodes = 3, double rtt = 1.0) {
    EngineConfig c;
    c.nodes = nodes;
    c.rtt_ms = rtt;
    return c;
}

ExecResult run1(Engine& eng, const Statement& s) {
    Txn& t = eng.begin(0);
    ExecResult r = eng.execute(t, s);
    if (r.ok()) {
        if (!eng.commit(t)) r.status = ExecStatus::Wounded;
    } else {
        eng.abort(t);
    }
    return r;
}

// shared benchmark settings; the drain is slowed so a measurable share of
// the run happens while the migration is still in flight
BenchConfig bench_cfg(Strategy s, double rtt, int nodes) {
    BenchConfig c;
    c.scale = 1;
    c.strategy = s;
    c.migration = MigrationClass::Split;
    c.rtt_ms = rtt;
    c.nodes = nodes;
    c.seed = 7;
    c.duration_ms = 15000;
    c.migration_start_ms = 500;
    c.sessions = 8;
    c.drain_batch = 16;
    c.drain_pace_ms = 50;
    return c;
}

double new_schema_mean(Strategy s, double rtt, int nodes, Check& c) {
    MetricsReport rep = run_benchmark(bench_cfg(s, rtt, nodes));
    Summary ns = rep.summarize_new_schema();
    c.expect(ns.committed > 50, std::string(to_string(s)) + ": too few new-schema txns (" +
                                    std::to_string(ns.committed) + ")");
    return ns.mean_ms;
}

// ---------------------------------------------------------------------------
// Criterion 1: Table 1 hop reproduction
// ---------------------------------------------------------------------------
bool criterion1(Check& c) {
    struct Row {
        Strategy s;
        int want[5];  // gateway_old_new, gateway_old, gateway_new, old_new, none
        bool constructible[5];
    };
    const Row rows[] = {
        {Strategy::SlsmBasic, {0, 1, 1, 1, 3}, {true, true, true, true, true}},
        {Strategy::Bullfrog, {0, 1, 1, 1, 3}, {true, true, true, true, true}},
        {Strategy::SlsmMigOpt, {0, 0, 0, 1, 0}, {true, false, false, true, false}},
        {Strategy::SlsmFull, {0, 0, 0, 1, 0}, {true, false, false, true, false}},
        {Strategy::SlsmUserOpt, {0, 1, 1, 1, 2}, {true, true, true, true, true}},
    };
    for (const Row& row : rows) {
        for (int k = 0; k < 5; ++k) {
            HopAuditResult r = hop_audit(row.s, kHopCategories[k]);
            std::string tag = std::string(to_string(row.s)) + "/" + kHopCategories[k];
            c.expect(r.constructible == row.constructible[k], tag + " constructibility");
            if (r.constructible && row.constructible[k]) {
                c.expect(r.round_trips == row.want[k],
                         tag + " got " + std::to_string(r.round_trips) + " want " +
                             std::to_string(row.want[k]));
                c.expect(r.overlapped == is_fused(row.s), tag + " overlap flag");
            }
        }
    }
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 2: latency ordering at rtt = 22 ms
// ---------------------------------------------------------------------------
bool criterion2(Check& c) {
    const double rtt = 22.33;
    double full = new_schema_mean(Strategy::SlsmFull, rtt, 3, c);
    double mig_opt = new_schema_mean(Strategy::SlsmMigOpt, rtt, 3, c);
    double user_opt = new_schema_mean(Strategy::SlsmUserOpt, rtt, 3, c);
    double basic = new_schema_mean(Strategy::SlsmBasic, rtt, 3, c);
    auto gap = [&](double lo, double hi, const char* what) {
        c.expect(hi > lo * 1.05, std::string(what) + " gap <=5% (" + std::to_string(lo) + " vs " +
                                     std::to_string(hi) + ")");
    };
    gap(full, mig_opt, "full<mig_opt");
    gap(mig_opt, basic, "mig_opt<basic");
    gap(full, user_opt, "full<user_opt");
    gap(user_opt, basic, "user_opt<basic");
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 3: slsm_full >= 20% below bullfrog at rtt ~ 12 ms
// ---------------------------------------------------------------------------
bool criterion3(Check& c) {
    const double rtt = 11.78;
    double full = new_schema_mean(Strategy::SlsmFull, rtt, 3, c);
    double bullfrog = new_schema_mean(Strategy::Bullfrog, rtt, 3, c);
    c.expect(full <= 0.8 * bullfrog, "full " + std::to_string(full) + " not >=20% below bullfrog " +
                                         std::to_string(bullfrog));
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 4: availability gap
// ---------------------------------------------------------------------------
bool criterion4(Check& c) {
    const MigrationClass classes[] = {MigrationClass::Split, MigrationClass::Join,
                                      MigrationClass::Preaggregate};
    const Strategy lazies[] = {Strategy::Bullfrog, Strategy::SlsmBasic, Strategy::SlsmMigOpt,
                               Strategy::SlsmUserOpt, Strategy::SlsmFull};
    for (MigrationClass mc : classes) {
        for (Strategy s : lazies) {
            Engine eng(engine_cfg());
            tpcc::load(eng, 1, 4);
            eng.set_now(ms_to_ticks(777));
            int h = eng.register_migration(tpcc::migration_spec(mc, s));
            Tick fs = eng.availability_probe(h);
            std::string tag = std::string(to_string(mc)) + "/" + to_string(s);
            c.expect(eng.migration(h)->registered_at == ms_to_ticks(777), tag + " registration tick");
            c.expect(fs == ms_to_ticks(777), tag + " lazy first-service != registration");
        }
        // osc: first service == done, many backfill steps later
        EngineConfig ec = engine_cfg();
        ec.osc_batch_size = 500;
        Engine eng(ec);
        tpcc::load(eng, 1, 4);
        int h = eng.register_migration(tpcc::migration_spec(mc, Strategy::Osc));
        Migration& m = *eng.migration(h);
        int steps = 0;
        std::string tag = std::string(to_string(mc)) + "/osc";
        while (m.state.osc_state != OscState::Public && steps < 100000) {
            c.expect(eng.availability_probe(h) < 0, tag + " served before public");
            if (!c.ok) break;
            eng.set_now(eng.now() + ms_to_ticks(1));
            eng.osc_step(m);
            ++steps;
        }
        c.expect(m.state.osc_state == OscState::Public, tag + " never reached public");
        c.expect(steps - 2 >= 20, tag + " only " + std::to_string(steps - 2) + " backfill steps");
        Tick fs = eng.availability_probe(h);
        c.expect(fs == m.done_at, tag + " osc first-service != done");
        c.expect(m.done_at > m.registered_at, tag + " done tick not after registration");
    }
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 5: exclusivity under randomized concurrency
// ---------------------------------------------------------------------------

// interleaved multi-client driver with wound-wait retries; audits after
// every commit
struct ConcurrentDriver {
    Engine& eng;
    Rng rng;
    std::function<std::vector<Statement>(Rng&, int)> make_script;
    std::function<void(Check&)> audit;
    Check& check;

    struct Client {
        Txn* txn = nullptr;
        std::vector<Statement> script;
        size_t step = 0;
        uint64_t prio = 0;
        bool has_prio = false;
    };

    int run(int target_commits, int clients_n) {
        std::vector<Client> clients(clients_n);
        int committed = 0;
        int made = 0;
        auto fresh = [&](Client& cl) {
            cl.script = make_script(rng, made++);
            cl.txn = cl.has_prio ? &eng.begin_retry(0, cl.prio) : &eng.begin(0);
            cl.prio = cl.txn->priority;
            cl.has_prio = true;
            cl.step = 0;
        };
        auto restart = [&](Client& cl) {
            eng.abort(*cl.txn);
            cl.txn = &eng.begin_retry(0, cl.prio);
            cl.step = 0;
        };
        for (auto& cl : clients) fresh(cl);
        int guard = 0;
        while (committed < target_commits && ++guard < 500000 && check.ok) {
            Client& cl = clients[rng.below(static_cast<uint64_t>(clients_n))];
            if (cl.txn->wounded) {
                restart(cl);
                continue;
            }
            if (cl.step >= cl.script.size()) {
                if (eng.commit(*cl.txn)) {
                    ++committed;
                    audit(check);
                    cl.has_prio = false;
                    fresh(cl);
                } else {
                    cl.txn = &eng.begin_retry(0, cl.prio);
                    cl.step = 0;
                }
                continue;
            }
            ExecResult r = eng.execute(*cl.txn, cl.script[cl.step]);
            switch (r.status) {
                case ExecStatus::Ok:
                    ++cl.step;
                    break;
                case ExecStatus::Wounded:
                    restart(cl);
                    break;
                case ExecStatus::Blocked:
                    break;  // try again later
                case ExecStatus::Error:
                    check.expect(false, "unexpected statement error: " + r.error);
                    break;
            }
        }
        for (auto& cl : clients) eng.abort(*cl.txn);
        check.expect(committed >= target_commits, "driver stalled before target commits");
        return committed;
    }
};

bool criterion5(Check& c) {
    // --- split -------------------------------------------------------------
    {
        Engine eng(engine_cfg());
        TableId user = eng.catalog().add_table(
            "user", {{"id", ColType::Int}, {"bio", ColType::Str}, {"rights", ColType::Int}},
            {"id"});
        const auto& ut = eng.catalog().table(user);
        const int n = 300;
        for (int64_t i = 1; i <= n; ++i) {
            RowValue r{{i, "b" + std::to_string(i), i % 7}};
            eng.store().put(eng.catalog().row_key(ut, r), r);
        }
        MigrationSpec sp;
        sp.mclass = MigrationClass::Split;
        sp.strategy = Strategy::SlsmFull;
        sp.old_tables = {"user"};
        sp.new_tables.push_back({"user_core",
                                 {{"id", ColType::Int}, {"bio", ColType::Str}},
                                 {"id"},
                                 {{"id", {"user", "id"}}, {"bio", {"user", "bio"}}}});
        sp.new_tables.push_back({"user_rights",
                                 {{"id", ColType::Int}, {"rights", ColType::Int}},
                                 {"id"},
                                 {{"id", {"user", "id"}}, {"rights", {"user", "rights"}}}});
        eng.register_migration(sp);
        const auto& core_t = eng.catalog().table("user_core");
        const auto& rights_t = eng.catalog().table("user_rights");
        std::set<int64_t> ids;
        for (int64_t i = 1; i <= n; ++i) ids.insert(i);
        auto audit = [&](Check& ck) {
            for (int64_t id : ids) {
                Key ok = keycodec::encode_key(user, std::vector<Value>{id});
                bool in_old = eng.store().get(ok) != nullptr;
                bool in_new =
                    eng.store().get(eng.catalog().row_key_from_pk(
                        core_t, std::vector<Value>{id})) != nullptr ||
                    eng.store().get(eng.catalog().row_key_from_pk(
                        rights_t, std::vector<Value>{id})) != nullptr;
                ck.expect(!(in_old && in_new),
                          "split id " + std::to_string(id) + " visible in both schemas");
                ck.expect(eng.migrated_count(ok) <= 1,
                          "split id " + std::to_string(id) + " migrated twice");
            }
        };
        ConcurrentDriver drv{eng, Rng(501), {}, audit, c};
        drv.make_script = [&](Rng& rng, int made) {
            std::vector<Statement> sc;
            for (int k = 0; k < 2; ++k) {
                int64_t id = rng.range(1, n);
                switch (rng.below(4)) {
                    case 0:
                        sc.push_back(Statement::select("user_core", Predicate::eq("id", id)));
                        break;
                    case 1:
                        sc.push_back(Statement::update("user_core", Predicate::eq("id", id),
                                                       {{"bio", "w" + std::to_string(made)}}));
                        break;
                    case 2:
                        sc.push_back(Statement::update("user_rights", Predicate::eq("id", id),
                                                       {{"rights", rng.range(0, 99)}}));
                        break;
                    default: {
                        int64_t fresh_id = 10000 + made * 2 + k;
                        ids.insert(fresh_id);
                        sc.push_back(Statement::insert(
                            "user", {fresh_id, "n" + std::to_string(fresh_id), rng.range(0, 6)}));
                        break;
                    }
                }
            }
            return sc;
        };
        drv.run(334, 3);
    }
    if (!c.ok) return false;

    // --- join --------------------------------------------------------------
    {
        Engine eng(engine_cfg());
        eng.catalog().add_table("ord", {{"o", ColType::Int}, {"amt", ColType::Dec}}, {"o"});
        TableId line = eng.catalog().add_table("line",
                                               {{"o", ColType::Int},
                                                {"l", ColType::Int},
                                                {"qty", ColType::Int},
                                                {"memo", ColType::Str}},
                                               {"o", "l"});
        const auto& ot = eng.catalog().table("ord");
        const auto& lt = eng.catalog().table(line);
        std::set<std::pair<int64_t, int64_t>> line_pks;
        for (int64_t o = 1; o <= 40; ++o) {
            RowValue orow{{o, Dec{o * 100}}};
            eng.store().put(eng.catalog().row_key(ot, orow), orow);
            for (int64_t l = 1; l <= 5; ++l) {
                RowValue lr{{o, l, (o + l) % 9, std::string("m")}};
                eng.store().put(eng.catalog().row_key(lt, lr), lr);
                line_pks.insert({o, l});
            }
        }
        MigrationSpec sp;
        sp.mclass = MigrationClass::Join;
        sp.strategy = Strategy::SlsmFull;
        sp.old_tables = {"line", "ord"};
        sp.join_keys = {{"o", "o"}};
        sp.new_tables.push_back({"line_ord",
                                 {{"o", ColType::Int},
                                  {"l", ColType::Int},
                                  {"qty", ColType::Int},
                                  {"amt", ColType::Dec}},
                                 {"o", "l"},
                                 {{"o", {"line", "o"}},
                                  {"l", {"line", "l"}},
                                  {"qty", {"line", "qty"}},
                                  {"amt", {"ord", "amt"}}}});
        eng.register_migration(sp);
        const auto& nt = eng.catalog().table("line_ord");
        auto audit = [&](Check& ck) {
            for (auto [o, l] : line_pks) {
                Key lk = eng.catalog().row_key_from_pk(lt, std::vector<Value>{o, l});
                bool in_old = eng.store().get(lk) != nullptr && !eng.marker_set(lk);
                bool in_new = eng.store().get(eng.catalog().row_key_from_pk(
                                  nt, std::vector<Value>{o, l})) != nullptr;
                ck.expect(!(in_old && in_new), "join line (" + std::to_string(o) + "," +
                                                   std::to_string(l) + ") in both schemas");
                ck.expect(eng.migrated_count(lk) <= 1, "join line migrated twice");
            }
        };
        ConcurrentDriver drv{eng, Rng(502), {}, audit, c};
        drv.make_script = [&](Rng& rng, int made) {
            std::vector<Statement> sc;
            for (int k = 0; k < 2; ++k) {
                int64_t o = rng.range(1, 40);
                switch (rng.below(4)) {
                    case 0:
                        sc.push_back(Statement::select("line_ord", Predicate::eq("o", o)));
                        break;
                    case 1:
                        sc.push_back(Statement::select(
                            "line_ord",
                            Predicate::eq("o", o).with_cmp("l", CmpOp::Le, rng.range(1, 5))));
                        break;
                    case 2:
                        sc.push_back(Statement::update("line", Predicate::eq("o", o),
                                                       {{"memo", "e" + std::to_string(made)}}));
                        break;
                    default: {
                        int64_t l = 100 + made * 2 + k;
                        line_pks.insert({o, l});
                        sc.push_back(Statement::insert(
                            "line", {o, l, rng.range(0, 8), std::string("fresh")}));
                        break;
                    }
                }
            }
            return sc;
        };
        drv.run(333, 3);
    }
    if (!c.ok) return false;

    // --- preaggregate --------------------------------------------------------
    {
        Engine eng(engine_cfg());
        TableId sale = eng.catalog().add_table(
            "sale", {{"g", ColType::Int}, {"i", ColType::Int}, {"amt", ColType::Dec}},
            {"g", "i"});
        const auto& st = eng.catalog().table(sale);
        for (int64_t g = 1; g <= 30; ++g) {
            for (int64_t i = 1; i <= 10; ++i) {
                RowValue r{{g, i, Dec{g * 100 + i}}};
                eng.store().put(eng.catalog().row_key(st, r), r);
            }
        }
        MigrationSpec sp;
        sp.mclass = MigrationClass::Preaggregate;
        sp.strategy = Strategy::SlsmFull;
        sp.old_tables = {"sale"};
        sp.group_keys = {"g"};
        sp.agg_source_column = "amt";
        sp.agg_dest_column = "total";
        sp.new_tables.push_back({"totals",
                                 {{"g", ColType::Int}, {"total", ColType::Dec}},
                                 {"g"},
                                 {{"g", {"sale", "g"}}}});
        eng.register_migration(sp);
        const auto& tt = eng.catalog().table("totals");
        auto audit = [&](Check& ck) {
            // group-level exclusivity: a group with a live aggregate has no
            // unconsumed source rows
            const Key region_end = keycodec::table_region_end(sale);
            std::map<int64_t, bool> unmarked;
            for (auto it = eng.store().lower_bound(keycodec::table_region_start(sale));
                 it != eng.store().end() && it->first < region_end; ++it) {
                if (!eng.catalog().belongs_to(st, it->first)) continue;
                int64_t g = std::get<int64_t>(it->second.columns[0]);
                if (!eng.marker_set(it->first)) unmarked[g] = true;
                ck.expect(eng.migrated_count(it->first) <= 1, "preagg row migrated twice");
            }
            for (int64_t g = 1; g <= 30; ++g) {
                bool agg = eng.store().get(eng.catalog().row_key_from_pk(
                               tt, std::vector<Value>{g})) != nullptr;
                ck.expect(!(agg && unmarked.count(g)),
                          "preagg group " + std::to_string(g) + " visible in both schemas");
            }
        };
        ConcurrentDriver drv{eng, Rng(503), {}, audit, c};
        drv.make_script = [&](Rng& rng, int made) {
            std::vector<Statement> sc;
            for (int k = 0; k < 2; ++k) {
                int64_t g = rng.range(1, 30);
                switch (rng.below(4)) {
                    case 0:
                        sc.push_back(Statement::select("totals", Predicate::eq("g", g)));
                        break;
                    case 1:
                        sc.push_back(Statement::update(
                            "sale", Predicate::eq("g", g).with_eq("i", rng.range(1, 10)),
                            {{"amt", Dec{rng.range(0, 999)}}}));
                        break;
                    case 2:
                        sc.push_back(Statement::insert(
                            "sale", {g, int64_t{100 + made * 2 + k}, Dec{rng.range(1, 99)}}));
                        break;
                    default:
                        sc.push_back(Statement::del(
                            "sale", Predicate::eq("g", g).with_eq("i", rng.range(1, 10))));
                        break;
                }
            }
            return sc;
        };
        drv.run(333, 3);
    }
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 6: fusion equivalence oracle
// ---------------------------------------------------------------------------

// builds a pair of engines with identical state, one per strategy
struct EnginePair {
    Engine lazy{engine_cfg()};
    Engine fused{engine_cfg()};

    void both(const std::function<void(Engine&)>& f) {
        f(lazy);
        f(fused);
    }

    bool step(const Statement& s, Check& c, const char* tag) {
        ExecResult a = run1(lazy, s);
        ExecResult b = run1(fused, s);
        c.expect(a.status == b.status, std::string(tag) + ": status diverged");
        c.expect(a.rows == b.rows, std::string(tag) + ": result rows diverged");
        for (const auto& [tid, t] : lazy.catalog().tables()) {
            (void)tid;
            c.expect(canonical_table_dump(lazy, t) ==
                         canonical_table_dump(fused, fused.catalog().table(t.name)),
                     std::string(tag) + ": post-state diverged on " + t.name);
        }
        return c.ok;
    }
};

bool criterion6(Check& c) {
    int instances = 0;

    // split, 200 instances
    {
        EnginePair p;
        p.both([](Engine& eng) {
            TableId user = eng.catalog().add_table(
                "user", {{"id", ColType::Int}, {"bio", ColType::Str}, {"rights", ColType::Int}},
                {"id"});
            const auto& ut = eng.catalog().table(user);
            for (int64_t i = 1; i <= 150; ++i) {
                RowValue r{{i, "b" + std::to_string(i), i % 5}};
                eng.store().put(eng.catalog().row_key(ut, r), r);
            }
        });
        auto spec = [](Strategy s) {
            MigrationSpec sp;
            sp.mclass = MigrationClass::Split;
            sp.strategy = s;
            sp.old_tables = {"user"};
            sp.new_tables.push_back({"user_core",
                                     {{"id", ColType::Int}, {"bio", ColType::Str}},
                                     {"id"},
                                     {{"id", {"user", "id"}}, {"bio", {"user", "bio"}}}});
            sp.new_tables.push_back({"user_rights",
                                     {{"id", ColType::Int}, {"rights", ColType::Int}},
                                     {"id"},
                                     {{"id", {"user", "id"}}, {"rights", {"user", "rights"}}}});
            return sp;
        };
        p.lazy.register_migration(spec(Strategy::SlsmBasic));
        p.fused.register_migration(spec(Strategy::SlsmUserOpt));
        Rng rng(601);
        for (int k = 0; k < 200 && c.ok; ++k, ++instances) {
            Statement s;
            int64_t id = rng.range(1, 150);
            switch (rng.below(5)) {
                case 0: s = Statement::select("user_core", Predicate::eq("id", id)); break;
                case 1:
                    s = Statement::select("user_rights", Predicate::eq("rights", rng.range(0, 4)));
                    break;
                case 2:
                    s = Statement::update("user_core", Predicate::eq("id", id),
                                          {{"bio", "u" + std::to_string(k)}});
                    break;
                case 3: s = Statement::del("user_rights", Predicate::eq("id", id)); break;
                default:
                    s = Statement::insert("user", {int64_t{1000 + k}, "n" + std::to_string(k),
                                                   rng.range(0, 4)});
                    break;
            }
            p.step(s, c, "split");
        }
    }

    // join, 150 instances
    if (c.ok) {
        EnginePair p;
        p.both([](Engine& eng) {
            eng.catalog().add_table("ord", {{"o", ColType::Int}, {"amt", ColType::Dec}}, {"o"});
            TableId line = eng.catalog().add_table("line",
                                                   {{"o", ColType::Int},
                                                    {"l", ColType::Int},
                                                    {"qty", ColType::Int},
                                                    {"memo", ColType::Str}},
                                                   {"o", "l"});
            const auto& ot = eng.catalog().table("ord");
            const auto& lt = eng.catalog().table(line);
            for (int64_t o = 1; o <= 25; ++o) {
                RowValue orow{{o, Dec{o * 10}}};
                eng.store().put(eng.catalog().row_key(ot, orow), orow);
                for (int64_t l = 1; l <= 6; ++l) {
                    RowValue lr{{o, l, (o * l) % 7, std::string("m")}};
                    eng.store().put(eng.catalog().row_key(lt, lr), lr);
                }
            }
        });
        auto spec = [](Strategy s) {
            MigrationSpec sp;
            sp.mclass = MigrationClass::Join;
            sp.strategy = s;
            sp.old_tables = {"line", "ord"};
            sp.join_keys = {{"o", "o"}};
            sp.new_tables.push_back({"line_ord",
                                     {{"o", ColType::Int},
                                      {"l", ColType::Int},
                                      {"qty", ColType::Int},
                                      {"amt", ColType::Dec}},
                                     {"o", "l"},
                                     {{"o", {"line", "o"}},
                                      {"l", {"line", "l"}},
                                      {"qty", {"line", "qty"}},
                                      {"amt", {"ord", "amt"}}}});
            return sp;
        };
        p.lazy.register_migration(spec(Strategy::SlsmBasic));
        p.fused.register_migration(spec(Strategy::SlsmUserOpt));
        Rng rng(602);
        for (int k = 0; k < 150 && c.ok; ++k, ++instances) {
            Statement s;
            int64_t o = rng.range(1, 25);
            switch (rng.below(4)) {
                case 0: s = Statement::select("line_ord", Predicate::eq("o", o)); break;
                case 1:
                    s = Statement::select("line_ord",
                                          Predicate{}.with_cmp("qty", CmpOp::Ge, rng.range(0, 6)));
                    break;
                case 2:
                    s = Statement::update("line_ord", Predicate::eq("o", o),
                                          {{"qty", rng.range(0, 20)}});
                    break;
                default:
                    s = Statement::del("line_ord",
                                       Predicate::eq("o", o).with_eq("l", rng.range(1, 6)));
                    break;
            }
            p.step(s, c, "join");
        }
    }

    // preaggregate, 150 instances
    if (c.ok) {
        EnginePair p;
        p.both([](Engine& eng) {
            TableId sale = eng.catalog().add_table(
                "sale", {{"g", ColType::Int}, {"i", ColType::Int}, {"amt", ColType::Dec}},
                {"g", "i"});
            const auto& st = eng.catalog().table(sale);
            for (int64_t g = 1; g <= 20; ++g) {
                for (int64_t i = 1; i <= 8; ++i) {
                    RowValue r{{g, i, Dec{g * 50 + i}}};
                    eng.store().put(eng.catalog().row_key(st, r), r);
                }
            }
        });
        auto spec = [](Strategy s) {
            MigrationSpec sp;
            sp.mclass = MigrationClass::Preaggregate;
            sp.strategy = s;
            sp.old_tables = {"sale"};
            sp.group_keys = {"g"};
            sp.agg_source_column = "amt";
            sp.agg_dest_column = "total";
            sp.new_tables.push_back({"totals",
                                     {{"g", ColType::Int}, {"total", ColType::Dec}},
                                     {"g"},
                                     {{"g", {"sale", "g"}}}});
            return sp;
        };
        p.lazy.register_migration(spec(Strategy::SlsmBasic));
        p.fused.register_migration(spec(Strategy::SlsmUserOpt));
        Rng rng(603);
        for (int k = 0; k < 150 && c.ok; ++k, ++instances) {
            Statement s;
            int64_t g = rng.range(1, 20);
            switch (rng.below(4)) {
                case 0: s = Statement::select("totals", Predicate::eq("g", g)); break;
                case 1:
                    s = Statement::select("totals",
                                          Predicate{}.with_cmp("total", CmpOp::Gt,
                                                               Dec{rng.range(0, 2000)}));
                    break;
                case 2:
                    s = Statement::insert("sale",
                                          {g, int64_t{100 + k}, Dec{rng.range(1, 99)}});
                    break;
                default:
                    s = Statement::update("sale",
                                          Predicate::eq("g", g).with_eq("i", rng.range(1, 8)),
                                          {{"amt", Dec{rng.range(0, 200)}}});
                    break;
            }
            p.step(s, c, "preaggregate");
        }
    }

    c.expect(instances >= 500, "only " + std::to_string(instances) + " instances executed");
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: strategy confluence
// ---------------------------------------------------------------------------
std::string confluence_dump(Strategy s, MigrationClass mc, Check& c) {
    EngineConfig ec = engine_cfg();
    ec.osc_batch_size = 500;
    Engine eng(ec);
    tpcc::Tables tables = tpcc::load(eng, 1, 99);
    tpcc::Workload wl(eng, tables, mc, 1, 99);
    int handle = -1;
    for (int i = 0; i < 2000 && c.ok; ++i) {
        if (i == 100) handle = eng.register_migration(tpcc::migration_spec(mc, s));
        bool live = false;
        if (handle >= 0) {
            Migration* m = eng.migration(handle);
            live = s == Strategy::Osc ? m->state.osc_state == OscState::Public : true;
        }
        tpcc::TxnScript script = wl.next(live);
        Txn& t = eng.begin(0);
        for (const Statement& stmt : script.stmts) {
            ExecResult r = eng.execute(t, stmt);
            c.expect(r.ok(), std::string(to_string(s)) + "/" + to_string(mc) + " txn " +
                                 std::to_string(i) + " (" + script.kind + "): " + r.error);
            if (!r.ok()) break;
        }
        if (!eng.commit(t)) c.expect(false, "serial txn wounded");
    }
    Migration& m = *eng.migration(handle);
    if (s == Strategy::Osc) {
        int guard = 0;
        while (m.state.osc_state != OscState::Public && ++guard < 100000) eng.osc_step(m);
        c.expect(m.state.osc_state == OscState::Public, "osc backfill never finished");
    } else {
        Drainer d(eng, m, {256, 10});
        d.drain_until_done();
        c.expect(m.state.done, "drain never finished");
    }
    std::string dump;
    for (TableId tid : m.new_tids) {
        const auto& t = eng.catalog().table(tid);
        dump += "== " + t.name + "\n" + canonical_table_dump(eng, t);
    }
    return dump;
}

bool criterion7(Check& c) {
    const Strategy strategies[] = {Strategy::Osc, Strategy::Bullfrog, Strategy::SlsmBasic,
                                   Strategy::SlsmFull};
    for (MigrationClass mc :
         {MigrationClass::Split, MigrationClass::Join, MigrationClass::Preaggregate}) {
        std::string reference;
        for (Strategy s : strategies) {
            std::string dump = confluence_dump(s, mc, c);
            if (!c.ok) return false;
            if (reference.empty()) {
                reference = dump;
                c.expect(!reference.empty(), "empty reference dump");
            } else {
                c.expect(dump == reference, std::string(to_string(mc)) + ": " + to_string(s) +
                                                " diverged from " + to_string(strategies[0]));
            }
        }
    }
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: single-node ordering
// ---------------------------------------------------------------------------
bool criterion8(Check& c) {
    const double rtt = 22.33;
    double user_opt = new_schema_mean(Strategy::SlsmUserOpt, rtt, 1, c);
    double bullfrog = new_schema_mean(Strategy::Bullfrog, rtt, 1, c);
    double full = new_schema_mean(Strategy::SlsmFull, rtt, 1, c);
    c.expect(user_opt <= bullfrog, "user_opt " + std::to_string(user_opt) + " > bullfrog " +
                                       std::to_string(bullfrog));
    c.expect(user_opt <= full,
             "user_opt " + std::to_string(user_opt) + " > full " + std::to_string(full));
    return c.ok;
}

// ---------------------------------------------------------------------------
// Criterion 9: determinism of exported CSVs
// ---------------------------------------------------------------------------
bool criterion9(Check& c) {
    fs::path base = fs::temp_directory_path() / "slsm_acceptance_det";
    fs::remove_all(base);
    BenchConfig cfg = bench_cfg(Strategy::SlsmFull, 11.78, 3);
    cfg.duration_ms = 5000;
    cfg.seed = 42;
    cfg.out_dir = (base / "a").string();
    run_benchmark(cfg);
    cfg.out_dir = (base / "b").string();
    run_benchmark(cfg);
    for (const char* f :
         {"per_txn.csv", "tps.csv", "timeline.csv", "hops.csv", "drain.csv", "summary.txt"}) {
        c.expect(read_file(base / "a" / f) == read_file(base / "b" / f),
                 std::string(f) + " differs between identical runs");
    }
    fs::remove_all(base);
    return c.ok;
}

}  // namespace

int main() {
    struct Criterion {
        int num;
        const char* name;
        double limit_s;
        std::function<bool(Check&)> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "Table 1 hop reproduction, exact per category and strategy", 1.0, criterion1},
        {2, "latency ordering at rtt 22 ms with >5% gaps", 60.0, criterion2},
        {3, "slsm_full >= 20% below bullfrog at rtt ~12 ms", 600.0, criterion3},
        {4, "lazy first-service == registration; osc first-service == done", 600.0, criterion4},
        {5, "exclusivity: no tuple in both schemas, none migrated twice", 120.0, criterion5},
        {6, "fusion equivalence over >= 500 randomized instances", 60.0, criterion6},
        {7, "strategy confluence to byte-identical new-table dumps", 180.0, criterion7},
        {8, "single-node: user_opt <= bullfrog and user_opt <= full", 600.0, criterion8},
        {9, "determinism: byte-identical CSVs for identical config+seed", 600.0, criterion9},
    };
    int failures = 0;
    for (const Criterion& cr : criteria) {
        Check check;
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = cr.fn(check);
        } catch (const std::exception& e) {
            check.expect(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && secs > cr.limit_s) {
            check.expect(false, "runtime " + std::to_string(secs) + "s exceeds " +
                                    std::to_string(cr.limit_s) + "s");
            ok = false;
        }
        std::printf("%s criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", cr.num, cr.name,
                    secs, ok ? "" : " — ", ok ? "" : check.why.str().c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
