#include <iostream>

#include <CLI11.hpp>

#include "slsm/bench.hpp"

using namespace slsm;

namespace {

void add_common(CLI::App* cmd, BenchConfig& cfg, std::string& strategy, std::string& migration) {
    cmd->add_option("--scale", cfg.scale, "warehouses");
    cmd->add_option("--strategy", strategy,
                    "osc | bullfrog | slsm_basic | slsm_mig_opt | slsm_user_opt | slsm_full");
    cmd->add_option("--migration", migration, "split | join | preaggregate");
    cmd->add_option("--nodes", cfg.nodes, "cluster size");
    cmd->add_option("--seed", cfg.seed, "rng seed");
}

void resolve(BenchConfig& cfg, const std::string& strategy, const std::string& migration) {
    if (!strategy.empty()) {
        auto s = strategy_from_string(strategy);
        if (!s) throw ConfigError("unknown strategy " + strategy);
        cfg.strategy = *s;
    }
    if (!migration.empty()) {
        auto m = migration_class_from_string(migration);
        if (!m) throw ConfigError("unknown migration class " + migration);
        cfg.migration = *m;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"online schema migration simulator"};
    app.require_subcommand(1);

    BenchConfig cfg;
    std::string strategy, migration, category, config_path;

    auto* run = app.add_subcommand("run", "run the TPC-C-lite benchmark");
    add_common(run, cfg, strategy, migration);
    run->add_option("--rtt", cfg.rtt_ms, "per-hop latency in ms");
    run->add_option("--duration", cfg.duration_ms, "run length in virtual ms");
    run->add_option("--migration-start", cfg.migration_start_ms, "registration offset in ms");
    run->add_option("--sessions", cfg.sessions, "client sessions");
    run->add_option("--out", cfg.out_dir, "output directory for CSV reports");
    run->add_option("--config", config_path, "key=value config file");
    run->add_option("--drain-batch", cfg.drain_batch, "rows per drain transaction");
    run->add_option("--drain-pace", cfg.drain_pace_ms, "delay between drain batches in ms");
    run->add_flag("--wall", cfg.wall_clock, "wall-clock mode (real threads)");

    auto* audit = app.add_subcommand("hop-audit", "round trips of one lazy select per placement");
    audit->add_option("--strategy", strategy)->required();
    audit->add_option("--category", category,
                      "gateway_old_new | gateway_old | gateway_new | old_new | none (default all)");

    auto* drain = app.add_subcommand("drain", "run the background drain to completion");
    add_common(drain, cfg, strategy, migration);
    drain->add_option("--batch", cfg.drain_batch, "rows per drain transaction");
    drain->add_option("--pace", cfg.drain_pace_ms, "delay between batches in ms");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!config_path.empty()) {
                // explicit flags win over the file
                BenchConfig file_cfg = config_from_file(config_path);
                auto passed = [&](const std::string& n) { return run->count(n) > 0; };
                if (!passed("--scale")) cfg.scale = file_cfg.scale;
                if (!passed("--nodes")) cfg.nodes = file_cfg.nodes;
                if (!passed("--seed")) cfg.seed = file_cfg.seed;
                if (!passed("--rtt")) cfg.rtt_ms = file_cfg.rtt_ms;
                if (!passed("--duration")) cfg.duration_ms = file_cfg.duration_ms;
                if (!passed("--migration-start")) {
                    cfg.migration_start_ms = file_cfg.migration_start_ms;
                }
                if (!passed("--sessions")) cfg.sessions = file_cfg.sessions;
                if (!passed("--drain-batch")) cfg.drain_batch = file_cfg.drain_batch;
                if (!passed("--drain-pace")) cfg.drain_pace_ms = file_cfg.drain_pace_ms;
                if (!passed("--wall")) cfg.wall_clock = file_cfg.wall_clock;
                if (!passed("--out")) cfg.out_dir = file_cfg.out_dir;
                if (strategy.empty()) cfg.strategy = file_cfg.strategy;
                if (migration.empty()) cfg.migration = file_cfg.migration;
                // knobs without a dedicated flag come from the file
                cfg.svc_mig_ms = file_cfg.svc_mig_ms;
                cfg.svc_usr_ms = file_cfg.svc_usr_ms;
                cfg.prefix_overhead_ms = file_cfg.prefix_overhead_ms;
                cfg.retry_backoff_ms = file_cfg.retry_backoff_ms;
                cfg.osc_batch = file_cfg.osc_batch;
                cfg.osc_step_every_ms = file_cfg.osc_step_every_ms;
            }
            apply_env_overrides(cfg);
            resolve(cfg, strategy, migration);
            MetricsReport rep = run_benchmark(cfg);
            Summary all = rep.summarize();
            Summary ns = rep.summarize_new_schema();
            std::cout << "strategy=" << rep.strategy << " committed=" << all.committed
                      << " aborted=" << all.aborted << " tps=" << all.tps
                      << " latency_mean_ms=" << all.mean_ms << " p99_ms=" << all.p99_ms
                      << " new_schema_mean_ms=" << ns.mean_ms << "\n";
            for (const auto& t : rep.timeline) {
                std::cout << "migration " << t.migration
                          << " registered_ms=" << ticks_to_ms(t.registered)
                          << " first_service_ms=" << ticks_to_ms(t.first_service)
                          << " done_ms=" << ticks_to_ms(t.done) << "\n";
            }
            if (!cfg.out_dir.empty()) std::cout << "report written to " << cfg.out_dir << "\n";
        } else if (audit->parsed()) {
            auto s = strategy_from_string(strategy);
            if (!s) throw ConfigError("unknown strategy " + strategy);
            std::vector<std::string> cats;
            if (category.empty()) {
                cats.assign(kHopCategories, kHopCategories + 5);
            } else {
                cats.push_back(category);
            }
            for (const auto& c : cats) {
                HopAuditResult r = hop_audit(*s, c);
                std::cout << strategy << " " << c << ": ";
                if (!r.constructible) {
                    std::cout << "impossible (colocation)\n";
                } else {
                    std::cout << r.round_trips << " round-trip" << (r.round_trips == 1 ? "" : "s")
                              << (r.overlapped ? " (fused service)" : "") << "\n";
                }
            }
        } else if (drain->parsed()) {
            resolve(cfg, strategy, migration);
            DrainReport rep = run_drain(cfg);
            std::cout << "drained migrated=" << rep.migrated << " scanned=" << rep.scanned
                      << " batches=" << rep.batches
                      << " virtual_ms=" << ticks_to_ms(rep.finished - rep.started) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
