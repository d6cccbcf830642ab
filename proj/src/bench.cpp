#include "slsm/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <queue>
#include <sstream>
#include <thread>

namespace slsm {

const char* const kHopCategories[5] = {"gateway_old_new", "gateway_old", "gateway_new", "old_new",
                                       "none"};

void BenchConfig::validate() const {
    if (scale < 1) throw ConfigError("scale factor must be >= 1");
    if (nodes < 1) throw ConfigError("nodes must be >= 1");
    if (sessions < 1) throw ConfigError("sessions must be >= 1");
    if (duration_ms <= 0) throw ConfigError("duration must be positive");
    if (migration_start_ms < 0 || migration_start_ms >= duration_ms) {
        throw ConfigError("migration_start must fall inside the run");
    }
    if (rtt_ms < 0 || svc_mig_ms < 0 || svc_usr_ms < 0 || prefix_overhead_ms < 0) {
        throw ConfigError("latencies must be nonnegative");
    }
    if (drain_batch == 0 || osc_batch == 0) throw ConfigError("batch sizes must be positive");
}

EngineConfig BenchConfig::engine_config() const {
    EngineConfig ec;
    ec.nodes = nodes;
    ec.rtt_ms = rtt_ms;
    ec.svc_mig_ms = svc_mig_ms;
    ec.svc_usr_ms = svc_usr_ms;
    ec.prefix_overhead_ms = prefix_overhead_ms;
    ec.wall_clock = wall_clock;
    ec.osc_batch_size = osc_batch;
    ec.seed = seed;
    return ec;
}

// ---------------------------------------------------------------------------
// Declarative config file
// ---------------------------------------------------------------------------

BenchConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    BenchConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "scale") cfg.scale = std::stoi(val);
            else if (key == "strategy") {
                auto s = strategy_from_string(val);
                if (!s) throw ConfigError("unknown strategy " + val);
                cfg.strategy = *s;
            } else if (key == "migration") {
                auto m = migration_class_from_string(val);
                if (!m) throw ConfigError("unknown migration class " + val);
                cfg.migration = *m;
            }
            else if (key == "rtt") cfg.rtt_ms = std::stod(val);
            else if (key == "nodes") cfg.nodes = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "duration_ms") cfg.duration_ms = std::stod(val);
            else if (key == "migration_start_ms") cfg.migration_start_ms = std::stod(val);
            else if (key == "sessions") cfg.sessions = std::stoi(val);
            else if (key == "wall_clock") cfg.wall_clock = (val == "1" || val == "true");
            else if (key == "svc_mig_ms") cfg.svc_mig_ms = std::stod(val);
            else if (key == "svc_usr_ms") cfg.svc_usr_ms = std::stod(val);
            else if (key == "prefix_overhead_ms") cfg.prefix_overhead_ms = std::stod(val);
            else if (key == "retry_backoff_ms") cfg.retry_backoff_ms = std::stod(val);
            else if (key == "drain_batch") cfg.drain_batch = std::stoul(val);
            else if (key == "drain_pace_ms") cfg.drain_pace_ms = std::stod(val);
            else if (key == "osc_batch") cfg.osc_batch = std::stoul(val);
            else if (key == "osc_step_every_ms") cfg.osc_step_every_ms = std::stod(val);
            else if (key == "out") cfg.out_dir = val;
            else throw ConfigError("unknown config key " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    apply_env_overrides(cfg);
    return cfg;
}

void apply_env_overrides(BenchConfig& cfg) {
    if (const char* dir = std::getenv("BENCH_OUT_DIR")) {
        if (*dir) cfg.out_dir = dir;
    }
}

// ---------------------------------------------------------------------------
// Virtual-clock scheduler
// ---------------------------------------------------------------------------

namespace {

struct Event {
    Tick t;
    uint64_t seq;
    std::function<void()> fn;
};
struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        return a.t > b.t || (a.t == b.t && a.seq > b.seq);
    }
};

struct Session {
    tpcc::TxnScript script;
    size_t idx = 0;
    Txn* txn = nullptr;
    NodeId gateway = 0;
    Tick started = 0;
    int retries = 0;
    uint64_t seq = 0;
};

struct VirtualRun {
    const BenchConfig& cfg;
    Engine eng;
    tpcc::Tables tables;
    tpcc::Workload wl;
    MetricsReport rep;
    Rng rng;

    std::priority_queue<Event, std::vector<Event>, EventAfter> q;
    uint64_t eseq = 0;
    uint64_t next_txn_seq = 0;
    std::vector<Session> sessions;

    bool live = false;
    int handle = 0;
    Migration* mig = nullptr;
    std::unique_ptr<Drainer> drainer;

    Tick duration, backoff, drain_pace, osc_every;

    explicit VirtualRun(const BenchConfig& c)
        : cfg(c),
          eng(c.engine_config()),
          tables(tpcc::load(eng, c.scale, c.seed)),
          wl(eng, tables, c.migration, c.scale, c.seed),
          rng(c.seed ^ 0x5e55c0deull),
          duration(ms_to_ticks(c.duration_ms)),
          backoff(std::max<Tick>(1, ms_to_ticks(c.retry_backoff_ms))),
          drain_pace(std::max<Tick>(1, ms_to_ticks(c.drain_pace_ms))),
          osc_every(std::max<Tick>(1, ms_to_ticks(c.osc_step_every_ms))) {
        rep.strategy = to_string(c.strategy);
        rep.seed = c.seed;
        rep.duration = duration;
        sessions.resize(static_cast<size_t>(c.sessions));
    }

    void schedule(Tick t, std::function<void()> fn) { q.push({t, eseq++, std::move(fn)}); }

    void record(const Session& s, Tick end, bool aborted) {
        TxnMetric m;
        m.seq = s.seq;
        m.kind = s.script.kind;
        m.start = s.started;
        m.end = end;
        if (s.txn) {
            m.round_trips = s.txn->round_trips;
            // only txns actually served through the migration machinery;
            // once the drain finishes, new-table statements are plain again
            m.new_schema = s.txn->touched_new_schema;
            m.category = s.txn->category;
        }
        m.retries = s.retries;
        m.aborted = aborted;
        rep.txns.push_back(std::move(m));
    }

    void session_step(size_t i, Tick t) {
        eng.set_now(t);
        Session& s = sessions[i];
        if (!s.txn) {
            if (t >= duration) return;  // session retires
            s.script = wl.next(live);
            s.gateway = static_cast<NodeId>(rng.below(static_cast<uint64_t>(cfg.nodes)));
            s.txn = &eng.begin(s.gateway);
            s.started = t;
            s.idx = 0;
            s.retries = 0;
            s.seq = next_txn_seq++;
        }
        if (s.idx >= s.script.stmts.size()) {
            if (!eng.commit(*s.txn)) {  // wounded at commit time
                restart(i, t);
                return;
            }
            record(s, t, false);
            s.txn = nullptr;
            schedule(t + 1, [this, i, t] { session_step(i, t + 1); });
            return;
        }
        ExecResult res = eng.execute(*s.txn, s.script.stmts[s.idx]);
        switch (res.status) {
            case ExecStatus::Ok: {
                Tick cost = s.txn->last_stmt_duration;
                ++s.idx;
                Tick nt = t + cost;
                schedule(nt, [this, i, nt] { session_step(i, nt); });
                break;
            }
            case ExecStatus::Blocked: {
                Tick nt = t + backoff;  // wait, locks already held are kept
                schedule(nt, [this, i, nt] { session_step(i, nt); });
                break;
            }
            case ExecStatus::Wounded:
                restart(i, t);
                break;
            case ExecStatus::Error:
                record(s, t, true);
                eng.abort(*s.txn);
                s.txn = nullptr;
                schedule(t + 1, [this, i, t] { session_step(i, t + 1); });
                break;
        }
    }

    void restart(size_t i, Tick t) {
        Session& s = sessions[i];
        uint64_t prio = s.txn->priority;
        eng.abort(*s.txn);
        s.txn = &eng.begin_retry(s.gateway, prio);
        s.idx = 0;
        ++s.retries;
        Tick nt = t + backoff;
        schedule(nt, [this, i, nt] { session_step(i, nt); });
    }

    void probe(Tick t) {
        eng.set_now(t);
        if (eng.availability_probe(handle, 0) < 0) {
            Tick nt = t + backoff;
            schedule(nt, [this, nt] { probe(nt); });
        }
    }

    void drain_tick(Tick t) {
        eng.set_now(t);
        DrainBatch b = drainer->step();
        if (b.done) return;
        if (b.migrated || b.scanned) {
            rep.drain_events.push_back({t, mig->state.drain_cursor.hex(), b.migrated});
        }
        Tick nt = t + drain_pace;
        schedule(nt, [this, nt] { drain_tick(nt); });
    }

    void osc_tick(Tick t) {
        eng.set_now(t);
        OscState st = eng.osc_step(*mig);
        if (st == OscState::Public) {
            live = true;
            probe(t);
            return;
        }
        Tick nt = t + osc_every;
        schedule(nt, [this, nt] { osc_tick(nt); });
    }

    void start_migration(Tick t) {
        eng.set_now(t);
        handle = eng.register_migration(tpcc::migration_spec(cfg.migration, cfg.strategy));
        mig = eng.migration(handle);
        if (is_lazy(cfg.strategy)) {
            live = true;
            probe(t);
            drainer = std::make_unique<Drainer>(eng, *mig,
                                                DrainConfig{cfg.drain_batch, drain_pace});
            Tick nt = t + drain_pace;
            schedule(nt, [this, nt] { drain_tick(nt); });
        } else {
            Tick nt = t + osc_every;
            schedule(nt, [this, nt] { osc_tick(nt); });
        }
    }

    MetricsReport run() {
        Tick ms = ms_to_ticks(cfg.migration_start_ms);
        schedule(ms, [this, ms] { start_migration(ms); });
        for (size_t i = 0; i < sessions.size(); ++i) {
            schedule(static_cast<Tick>(i), [this, i] { session_step(i, static_cast<Tick>(i)); });
        }
        while (!q.empty()) {
            Event ev = q.top();
            q.pop();
            ev.fn();
        }
        if (mig) {
            rep.timeline.push_back({to_string(cfg.migration), mig->registered_at,
                                    mig->first_service, mig->done_at});
        }
        return std::move(rep);
    }
};

// ---------------------------------------------------------------------------
// Wall-clock mode: real threads multiplexed over the shared engine
// ---------------------------------------------------------------------------

MetricsReport run_wall(const BenchConfig& cfg) {
    Engine eng(cfg.engine_config());
    tpcc::Tables tables = tpcc::load(eng, cfg.scale, cfg.seed);
    tpcc::Workload wl(eng, tables, cfg.migration, cfg.scale, cfg.seed);
    MetricsReport rep;
    rep.strategy = to_string(cfg.strategy);
    rep.seed = cfg.seed;
    rep.duration = ms_to_ticks(cfg.duration_ms);

    std::atomic<bool> live{false}, stop{false};
    std::mutex shared_mu;  // workload generator + metrics
    Rng gw_rng(cfg.seed ^ 0x5e55c0deull);

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration_cast<std::chrono::microseconds>(
                   std::chrono::steady_clock::now() - t0)
            .count();
    };

    std::thread admin([&] {
        std::this_thread::sleep_for(
            std::chrono::microseconds(ms_to_ticks(cfg.migration_start_ms)));
        eng.set_now(elapsed());
        int handle = eng.register_migration(tpcc::migration_spec(cfg.migration, cfg.strategy));
        Migration* mig = eng.migration(handle);
        if (is_lazy(cfg.strategy)) {
            live = true;
            while (eng.availability_probe(handle, 0) < 0 && !stop) {
                std::this_thread::sleep_for(std::chrono::microseconds(200));
            }
            Drainer drainer(eng, *mig, DrainConfig{cfg.drain_batch, 0});
            while (!stop) {
                eng.set_now(elapsed());
                DrainBatch b = drainer.step();
                if (b.done) break;
                std::this_thread::sleep_for(
                    std::chrono::microseconds(ms_to_ticks(cfg.drain_pace_ms)));
            }
        } else {
            while (!stop) {
                eng.set_now(elapsed());
                if (eng.osc_step(*mig) == OscState::Public) {
                    live = true;
                    eng.availability_probe(handle, 0);
                    break;
                }
                std::this_thread::sleep_for(
                    std::chrono::microseconds(ms_to_ticks(cfg.osc_step_every_ms)));
            }
        }
        std::lock_guard lk(shared_mu);
        rep.timeline.push_back({to_string(cfg.migration), mig->registered_at, mig->first_service,
                                mig->done_at});
    });

    std::vector<std::thread> workers;
    std::atomic<uint64_t> seq{0};
    for (int w = 0; w < cfg.sessions; ++w) {
        workers.emplace_back([&] {
            while (!stop) {
                Tick start = elapsed();
                if (start >= rep.duration) break;
                tpcc::TxnScript script;
                NodeId gw;
                {
                    std::lock_guard lk(shared_mu);
                    script = wl.next(live);
                    gw = static_cast<NodeId>(gw_rng.below(static_cast<uint64_t>(cfg.nodes)));
                }
                TxnMetric m;
                m.seq = seq++;
                m.kind = script.kind;
                m.start = start;
                int retries = 0;
                uint64_t prio = 0;
                bool done = false, aborted = false;
                Txn* txn = nullptr;
                while (!done && !stop) {
                    eng.set_now(elapsed());
                    txn = retries == 0 ? &eng.begin(gw) : &eng.begin_retry(gw, prio);
                    prio = txn->priority;
                    size_t i = 0;
                    bool failed = false;
                    while (i < script.stmts.size()) {
                        eng.set_now(elapsed());
                        ExecResult r = eng.execute(*txn, script.stmts[i]);
                        if (r.status == ExecStatus::Ok) {
                            std::this_thread::sleep_for(
                                std::chrono::microseconds(txn->last_stmt_duration));
                            ++i;
                        } else if (r.status == ExecStatus::Blocked) {
                            std::this_thread::sleep_for(std::chrono::microseconds(200));
                        } else if (r.status == ExecStatus::Wounded) {
                            failed = true;
                            break;
                        } else {
                            aborted = true;
                            break;
                        }
                    }
                    if (aborted) {
                        eng.abort(*txn);
                        done = true;
                    } else if (failed) {
                        eng.abort(*txn);
                        ++retries;
                        std::this_thread::sleep_for(std::chrono::microseconds(200));
                    } else {
                        eng.set_now(elapsed());
                        if (eng.commit(*txn)) {
                            done = true;
                        } else {
                            ++retries;
                        }
                    }
                }
                m.end = elapsed();
                m.retries = retries;
                m.aborted = aborted;
                if (txn) {
                    m.round_trips = txn->round_trips;
                    m.new_schema = txn->touched_new_schema;
                    m.category = txn->category;
                }
                std::lock_guard lk(shared_mu);
                rep.txns.push_back(std::move(m));
            }
        });
    }
    for (auto& t : workers) t.join();
    stop = true;
    admin.join();
    return rep;
}

}  // namespace

MetricsReport run_benchmark(const BenchConfig& cfg) {
    cfg.validate();
    MetricsReport rep = cfg.wall_clock ? run_wall(cfg) : VirtualRun(cfg).run();
    if (!cfg.out_dir.empty()) rep.export_report(cfg.out_dir);
    return rep;
}

// ---------------------------------------------------------------------------
// Hop audit: one lazy select with forced placement
// ---------------------------------------------------------------------------

HopAuditResult hop_audit(Strategy strategy, const std::string& category) {
    int cat = -1;
    for (int i = 0; i < 5; ++i) {
        if (category == kHopCategories[i]) cat = i;
    }
    if (cat < 0) throw ConfigError("unknown placement category " + category);
    if (strategy == Strategy::Osc) {
        throw ConfigError("hop audit measures lazy statements; osc has none");
    }

    EngineConfig ec;
    ec.nodes = 3;
    ec.rtt_ms = 1.0;  // hop terms only; service times stay zero
    Engine eng(ec);
    Catalog& cat_ = eng.catalog();
    TableId user_tid = cat_.add_table(
        "user", {{"id", ColType::Int}, {"bio", ColType::Str}, {"rights", ColType::Str}}, {"id"});
    const TableDescriptor& user = cat_.table(user_tid);
    RowValue row{{int64_t{1001}, std::string("bio_1001"), std::string("admin")}};
    eng.store().put(cat_.row_key(user, row), row);
    eng.cluster().split_range(keycodec::table_region_start(user_tid));
    eng.cluster().split_range(keycodec::table_region_end(user_tid));

    MigrationSpec spec;
    spec.mclass = MigrationClass::Split;
    spec.strategy = strategy;
    spec.old_tables = {"user"};
    NewTableDef core, rights;
    core.name = "user_core";
    core.columns = {{"id", ColType::Int}, {"bio", ColType::Str}};
    core.pk = {"id"};
    core.column_map = {{"id", {"user", "id"}}, {"bio", {"user", "bio"}}};
    rights.name = "user_rights";
    rights.columns = {{"id", ColType::Int}, {"rights", ColType::Str}};
    rights.pk = {"id"};
    rights.column_map = {{"id", {"user", "id"}}, {"rights", {"user", "rights"}}};
    spec.new_tables = {core, rights};
    int handle = eng.register_migration(spec);
    Migration* mig = eng.migration(handle);

    static constexpr NodeId kOld[5] = {0, 0, 1, 1, 1};
    static constexpr NodeId kNew[5] = {0, 1, 0, 1, 2};
    NodeId old_n = kOld[cat], new_n = kNew[cat];
    if (mig->prefixed && old_n != new_n) return {false, -1, false};

    for (const Range& r : eng.cluster().ranges()) eng.cluster().transfer_lease(r.id, 0);
    eng.cluster().transfer_lease(eng.cluster().route(cat_.row_key(user, row)).id, old_n);
    if (!mig->prefixed) {
        for (TableId tid : mig->new_tids) {
            eng.cluster().transfer_lease(
                eng.cluster().route(keycodec::table_region_start(tid)).id, new_n);
        }
    }

    Txn& txn = eng.begin(0);
    ExecResult res =
        eng.execute(txn, Statement::select("user_rights", Predicate::eq("id", int64_t{1001})));
    if (!res.ok() || res.rows.size() != 1) {
        throw std::logic_error("hop audit statement failed unexpectedly");
    }
    if (!eng.commit(txn)) throw std::logic_error("hop audit commit failed");
    return {true, txn.round_trips, is_fused(strategy)};
}

// ---------------------------------------------------------------------------
// Standalone drain
// ---------------------------------------------------------------------------

DrainReport run_drain(const BenchConfig& cfg) {
    cfg.validate();
    Engine eng(cfg.engine_config());
    tpcc::load(eng, cfg.scale, cfg.seed);
    int handle = eng.register_migration(tpcc::migration_spec(cfg.migration, cfg.strategy));
    Migration* mig = eng.migration(handle);
    if (cfg.strategy == Strategy::Osc) {
        DrainReport rep;
        rep.started = eng.now();
        while (eng.osc_step(*mig) != OscState::Public) {
            ++rep.batches;
            eng.set_now(eng.now() + std::max<Tick>(1, ms_to_ticks(cfg.drain_pace_ms)));
        }
        rep.finished = eng.now();
        return rep;
    }
    Drainer drainer(eng, *mig,
                    DrainConfig{cfg.drain_batch, std::max<Tick>(1, ms_to_ticks(cfg.drain_pace_ms))});
    return drainer.drain_until_done();
}

}  // namespace slsm
