#include "slsm/metrics.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace slsm {

namespace {

double percentile(std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0;
    double idx = p * static_cast<double>(sorted.size() - 1);
    size_t lo = static_cast<size_t>(idx);
    size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = idx - static_cast<double>(lo);
    return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

Summary summarize_set(const std::vector<const TxnMetric*>& committed, size_t aborted,
                      Tick duration) {
    Summary s;
    s.aborted = aborted;
    s.committed = committed.size();
    if (committed.empty()) return s;
    std::vector<double> lat;
    double hops = 0;
    for (const TxnMetric* m : committed) {
        lat.push_back(m->latency_ms());
        s.mean_ms += m->latency_ms();
        hops += m->round_trips;
        if (m->new_schema) {
            ++s.new_schema_count;
            s.new_schema_mean_ms += m->latency_ms();
        }
    }
    s.mean_ms /= static_cast<double>(committed.size());
    s.mean_round_trips = hops / static_cast<double>(committed.size());
    if (s.new_schema_count) s.new_schema_mean_ms /= static_cast<double>(s.new_schema_count);
    std::sort(lat.begin(), lat.end());
    s.p50_ms = percentile(lat, 0.50);
    s.p95_ms = percentile(lat, 0.95);
    s.p99_ms = percentile(lat, 0.99);
    if (duration > 0) {
        s.tps = static_cast<double>(committed.size()) / (ticks_to_ms(duration) / 1000.0);
    }
    return s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << v;
    return os.str();
}

}  // namespace

Summary MetricsReport::summarize() const {
    std::vector<const TxnMetric*> committed;
    size_t aborted = 0;
    for (const auto& m : txns) (m.aborted ? (void)++aborted : (void)committed.push_back(&m));
    return summarize_set(committed, aborted, duration);
}

Summary MetricsReport::summarize_new_schema() const {
    std::vector<const TxnMetric*> committed;
    size_t aborted = 0;
    for (const auto& m : txns) {
        if (m.aborted) {
            ++aborted;
        } else if (m.new_schema) {
            committed.push_back(&m);
        }
    }
    return summarize_set(committed, aborted, duration);
}

void MetricsReport::export_report(const std::string& dir) const {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

    auto open = [&](const std::string& name) {
        std::ofstream out(fs::path(dir) / name, std::ios::trunc);
        if (!out) throw IoError("cannot write " + (fs::path(dir) / name).string());
        return out;
    };

    {
        auto out = open("per_txn.csv");
        out << "seq,kind,start_ms,latency_ms,round_trips,new_schema,category,retries,aborted\n";
        for (const auto& m : txns) {
            out << m.seq << ',' << m.kind << ',' << fmt(ticks_to_ms(m.start)) << ','
                << fmt(m.latency_ms()) << ',' << m.round_trips << ',' << (m.new_schema ? 1 : 0)
                << ',' << m.category << ',' << m.retries << ',' << (m.aborted ? 1 : 0) << '\n';
        }
    }
    {
        auto out = open("tps.csv");
        out << "window_start_ms,txns,tps\n";
        const Tick window = ms_to_ticks(1000.0);
        if (duration > 0 && window > 0) {
            std::vector<size_t> buckets(static_cast<size_t>(duration / window) + 1, 0);
            for (const auto& m : txns) {
                if (m.aborted) continue;
                size_t b = static_cast<size_t>(m.end / window);
                if (b < buckets.size()) ++buckets[b];
            }
            for (size_t b = 0; b < buckets.size(); ++b) {
                out << fmt(ticks_to_ms(static_cast<Tick>(b) * window)) << ',' << buckets[b] << ','
                    << fmt(static_cast<double>(buckets[b])) << '\n';
            }
        }
    }
    {
        auto out = open("timeline.csv");
        out << "migration,registered_ms,first_service_ms,done_ms\n";
        for (const auto& t : timeline) {
            out << t.migration << ',' << fmt(ticks_to_ms(t.registered)) << ','
                << fmt(ticks_to_ms(t.first_service)) << ',' << fmt(ticks_to_ms(t.done)) << '\n';
        }
    }
    {
        auto out = open("hops.csv");
        out << "txn_id,strategy,category,round_trips\n";
        for (const auto& m : txns) {
            if (m.aborted) continue;
            out << m.seq << ',' << strategy << ',' << m.category << ',' << m.round_trips << '\n';
        }
    }
    {
        auto out = open("drain.csv");
        out << "at_ms,cursor,rows_migrated\n";
        for (const auto& e : drain_events) {
            out << fmt(ticks_to_ms(e.at)) << ',' << e.cursor_hex << ',' << e.rows_migrated << '\n';
        }
    }
    {
        auto out = open("summary.txt");
        Summary all = summarize();
        Summary ns = summarize_new_schema();
        out << "strategy: " << strategy << "\n"
            << "seed: " << seed << "\n"
            << "duration_ms: " << fmt(ticks_to_ms(duration)) << "\n"
            << "committed: " << all.committed << "\n"
            << "aborted: " << all.aborted << "\n"
            << "tps: " << fmt(all.tps) << "\n"
            << "latency_mean_ms: " << fmt(all.mean_ms) << "\n"
            << "latency_p50_ms: " << fmt(all.p50_ms) << "\n"
            << "latency_p95_ms: " << fmt(all.p95_ms) << "\n"
            << "latency_p99_ms: " << fmt(all.p99_ms) << "\n"
            << "round_trips_mean: " << fmt(all.mean_round_trips) << "\n"
            << "new_schema_txns: " << ns.committed << "\n"
            << "new_schema_latency_mean_ms: " << fmt(ns.mean_ms) << "\n";
        for (const auto& t : timeline) {
            out << "migration " << t.migration << ": registered_ms=" << fmt(ticks_to_ms(t.registered))
                << " first_service_ms=" << fmt(ticks_to_ms(t.first_service))
                << " done_ms=" << fmt(ticks_to_ms(t.done)) << "\n";
        }
    }
}

}  // namespace slsm
