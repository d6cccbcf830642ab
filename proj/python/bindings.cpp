#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slsm/bench.hpp"

namespace py = pybind11;
using namespace slsm;

namespace {

Strategy parse_strategy(const std::string& s) {
    auto v = strategy_from_string(s);
    if (!v) throw py::value_error("unknown strategy: " + s);
    return *v;
}

MigrationClass parse_class(const std::string& s) {
    auto v = migration_class_from_string(s);
    if (!v) throw py::value_error("unknown migration class: " + s);
    return *v;
}

py::dict summary_to_dict(const Summary& s) {
    py::dict d;
    d["committed"] = s.committed;
    d["aborted"] = s.aborted;
    d["mean_ms"] = s.mean_ms;
    d["p50_ms"] = s.p50_ms;
    d["p95_ms"] = s.p95_ms;
    d["p99_ms"] = s.p99_ms;
    d["mean_round_trips"] = s.mean_round_trips;
    d["tps"] = s.tps;
    d["new_schema_count"] = s.new_schema_count;
    d["new_schema_mean_ms"] = s.new_schema_mean_ms;
    return d;
}

BenchConfig config_from_kwargs(int scale, const std::string& strategy,
                               const std::string& migration, double rtt, int nodes, uint64_t seed,
                               double duration_ms, double migration_start_ms, int sessions,
                               size_t drain_batch, double drain_pace_ms, size_t osc_batch,
                               const std::string& out) {
    BenchConfig cfg;
    cfg.scale = scale;
    cfg.strategy = parse_strategy(strategy);
    cfg.migration = parse_class(migration);
    cfg.rtt_ms = rtt;
    cfg.nodes = nodes;
    cfg.seed = seed;
    cfg.duration_ms = duration_ms;
    cfg.migration_start_ms = migration_start_ms;
    cfg.sessions = sessions;
    cfg.drain_batch = drain_batch;
    cfg.drain_pace_ms = drain_pace_ms;
    cfg.osc_batch = osc_batch;
    cfg.out_dir = out;
    apply_env_overrides(cfg);
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "online schema-migration strategy simulator";

    m.def("strategies", [] {
        return std::vector<std::string>{"osc",           "bullfrog",      "slsm_basic",
                                        "slsm_mig_opt",  "slsm_user_opt", "slsm_full"};
    });
    m.def("hop_categories", [] {
        return std::vector<std::string>(kHopCategories, kHopCategories + 5);
    });

    m.def(
        "hop_audit",
        [](const std::string& strategy, const std::string& category) {
            HopAuditResult r = hop_audit(parse_strategy(strategy), category);
            py::dict d;
            d["constructible"] = r.constructible;
            d["round_trips"] = r.round_trips;
            d["overlapped"] = r.overlapped;
            return d;
        },
        py::arg("strategy"), py::arg("category"),
        "Round trips of one lazy select under a forced placement category.");

    m.def(
        "run_benchmark",
        [](int scale, const std::string& strategy, const std::string& migration, double rtt,
           int nodes, uint64_t seed, double duration_ms, double migration_start_ms, int sessions,
           size_t drain_batch, double drain_pace_ms, size_t osc_batch, const std::string& out) {
            BenchConfig cfg = config_from_kwargs(scale, strategy, migration, rtt, nodes, seed,
                                                 duration_ms, migration_start_ms, sessions,
                                                 drain_batch, drain_pace_ms, osc_batch, out);
            MetricsReport rep = run_benchmark(cfg);
            py::dict d;
            d["strategy"] = rep.strategy;
            d["seed"] = rep.seed;
            d["duration_ms"] = ticks_to_ms(rep.duration);
            d["txns"] = rep.txns.size();
            d["summary"] = summary_to_dict(rep.summarize());
            d["new_schema"] = summary_to_dict(rep.summarize_new_schema());
            py::list timeline;
            for (const TimelineEntry& t : rep.timeline) {
                py::dict e;
                e["migration"] = t.migration;
                e["registered_ms"] = ticks_to_ms(t.registered);
                e["first_service_ms"] = ticks_to_ms(t.first_service);
                e["done_ms"] = ticks_to_ms(t.done);
                timeline.append(e);
            }
            d["timeline"] = timeline;
            return d;
        },
        py::arg("scale") = 1, py::arg("strategy") = "slsm_full", py::arg("migration") = "split",
        py::arg("rtt") = 11.78, py::arg("nodes") = 3, py::arg("seed") = 1,
        py::arg("duration_ms") = 10000.0, py::arg("migration_start_ms") = 1000.0,
        py::arg("sessions") = 8, py::arg("drain_batch") = 128, py::arg("drain_pace_ms") = 1.0,
        py::arg("osc_batch") = 500, py::arg("out") = "",
        "Virtual-clock benchmark run; writes the CSV report when `out` is set.");

    m.def(
        "run_drain",
        [](int scale, const std::string& strategy, const std::string& migration, uint64_t seed,
           size_t batch, double pace_ms) {
            BenchConfig cfg;
            cfg.scale = scale;
            cfg.strategy = parse_strategy(strategy);
            cfg.migration = parse_class(migration);
            cfg.seed = seed;
            cfg.drain_batch = batch;
            cfg.drain_pace_ms = pace_ms;
            cfg.osc_batch = batch;
            cfg.validate();
            DrainReport rep = run_drain(cfg);
            py::dict d;
            d["batches"] = rep.batches;
            d["scanned"] = rep.scanned;
            d["migrated"] = rep.migrated;
            d["started_ms"] = ticks_to_ms(rep.started);
            d["finished_ms"] = ticks_to_ms(rep.finished);
            return d;
        },
        py::arg("scale") = 1, py::arg("strategy") = "slsm_full", py::arg("migration") = "split",
        py::arg("seed") = 1, py::arg("batch") = 128, py::arg("pace_ms") = 1.0,
        "Loads the dataset, registers the migration, drains to completion.");
}
