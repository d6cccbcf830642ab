#pragma once

#include <string>
#include <vector>

#include "slsm/common.hpp"

namespace slsm {

struct TxnMetric {
    uint64_t seq = 0;
    std::string kind;      // workload profile name
    Tick start = 0;
    Tick end = 0;
    int round_trips = 0;
    bool new_schema = false;
    std::string category;  // placement category of the lazy statement, if any
    int retries = 0;
    bool aborted = false;

    double latency_ms() const { return ticks_to_ms(end - start); }
};

struct TimelineEntry {
    std::string migration;  // class name
    Tick registered = -1;
    Tick first_service = -1;
    Tick done = -1;
};

struct DrainProgress {
    Tick at = 0;
    std::string cursor_hex;
    size_t rows_migrated = 0;
};

struct Summary {
    size_t committed = 0;
    size_t aborted = 0;
    double mean_ms = 0, p50_ms = 0, p95_ms = 0, p99_ms = 0;
    double mean_round_trips = 0;
    double tps = 0;
    // restricted to new-schema statements (the paper's headline metric)
    size_t new_schema_count = 0;
    double new_schema_mean_ms = 0;
};

struct MetricsReport {
    std::string strategy;
    uint64_t seed = 0;
    Tick duration = 0;
    std::vector<TxnMetric> txns;
    std::vector<TimelineEntry> timeline;
    std::vector<DrainProgress> drain_events;

    Summary summarize() const;
    Summary summarize_new_schema() const;

    // CSV schemas (stable):
    //   per_txn.csv:  seq,kind,start_ms,latency_ms,round_trips,new_schema,category,retries,aborted
    //   tps.csv:      window_start_ms,txns,tps
    //   timeline.csv: migration,registered_ms,first_service_ms,done_ms
    //   hops.csv:     txn_id,strategy,category,round_trips
    //   summary.txt:  free-form text block
    void export_report(const std::string& dir) const;
};

}  // namespace slsm
