#pragma once

#include "slsm/background.hpp"
#include "slsm/metrics.hpp"
#include "slsm/tpcc.hpp"

namespace slsm {

struct BenchConfig {
    int scale = 1;
    Strategy strategy = Strategy::SlsmFull;
    MigrationClass migration = MigrationClass::Split;
    double rtt_ms = 11.78;  // presets: 1.15, 11.78, 22.33
    int nodes = 3;
    uint64_t seed = 1;
    double duration_ms = 10000;
    double migration_start_ms = 1000;
    int sessions = 8;
    bool wall_clock = false;

    double svc_mig_ms = 2.0;
    double svc_usr_ms = 2.0;
    double prefix_overhead_ms = 0.2;
    double retry_backoff_ms = 0.2;

    size_t drain_batch = 128;
    double drain_pace_ms = 1.0;
    size_t osc_batch = 500;
    double osc_step_every_ms = 1.0;

    std::string out_dir;  // empty: no files written

    void validate() const;
    EngineConfig engine_config() const;
};

// key=value declarative config file (# starts a comment). The
// BENCH_OUT_DIR environment variable overrides `out`.
BenchConfig config_from_file(const std::string& path);
void apply_env_overrides(BenchConfig& cfg);

MetricsReport run_benchmark(const BenchConfig& cfg);

struct HopAuditResult {
    bool constructible = false;
    int round_trips = -1;
    bool overlapped = false;  // migration/user service time overlapped (fusion)
};

// Places a single lazy select into the named category
// (gateway_old_new, gateway_old, gateway_new, old_new, none) and counts
// its round trips. Service times are zero so the hop terms are isolated.
HopAuditResult hop_audit(Strategy strategy, const std::string& category);

extern const char* const kHopCategories[5];

// Standalone drain demo for the CLI: loads the dataset, registers the
// migration, drains to completion and reports progress.
DrainReport run_drain(const BenchConfig& cfg);

}  // namespace slsm
