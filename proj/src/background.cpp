#include "slsm/background.hpp"

namespace slsm {

Drainer::Drainer(Engine& eng, Migration& mig, DrainConfig cfg)
    : eng_(eng), mig_(mig), cfg_(cfg) {
    if (cfg_.batch_size == 0) throw ConfigError("drain batch_size must be positive");
    if (mig_.spec.strategy == Strategy::Osc) {
        throw ConfigError("osc migrations complete via backfill, not the drain");
    }
    if (mig_.state.drain_cursor.b.empty()) {
        mig_.state.drain_cursor = keycodec::table_region_start(mig_.anchor_tid);
    }
}

std::vector<Key> Drainer::next_batch() {
    // initial bullfrog pass: replay every position captured at registration
    if (mig_.spec.strategy == Strategy::Bullfrog &&
        bullfrog_pos_ < mig_.initial_anchor_keys.size()) {
        auto first = mig_.initial_anchor_keys.begin() + static_cast<long>(bullfrog_pos_);
        auto last = mig_.initial_anchor_keys.end();
        if (static_cast<size_t>(last - first) > cfg_.batch_size) {
            last = first + static_cast<long>(cfg_.batch_size);
        }
        return {first, last};
    }
    // cursor pass: walk forward, skipping migrated rows (also the bullfrog
    // clean-up pass for rows inserted after registration)
    const TableDescriptor& anchor = eng_.catalog().table(mig_.anchor_tid);
    const Key region_end = keycodec::table_region_end(mig_.anchor_tid);
    std::vector<Key> keys;
    for (auto it = eng_.store().lower_bound(mig_.state.drain_cursor); it != eng_.store().end();
         ++it) {
        if (!(it->first < region_end)) break;
        if (!eng_.catalog().belongs_to(anchor, it->first)) continue;
        if (mig_.spec.mclass != MigrationClass::Split && eng_.marker_set(it->first)) continue;
        keys.push_back(it->first);
        if (keys.size() >= cfg_.batch_size) break;
    }
    return keys;
}

DrainBatch Drainer::step() {
    if (mig_.state.done) return {0, 0, false, true};

    const bool replay = mig_.spec.strategy == Strategy::Bullfrog &&
                        bullfrog_pos_ < mig_.initial_anchor_keys.size();
    std::vector<Key> keys = next_batch();
    if (keys.empty()) {
        mig_.state.done = true;
        mig_.done_at = eng_.now();
        mig_.state.drain_cursor = keycodec::table_region_end(mig_.anchor_tid);
        return {0, 0, false, true};
    }

    Txn& txn = eng_.begin(0);
    size_t migrated = eng_.migrate_anchor_keys(txn, mig_, keys);
    if (migrated == static_cast<size_t>(-1)) {
        eng_.abort(txn);
        return {0, 0, true, false};
    }
    if (!eng_.commit(txn)) return {0, 0, true, false};

    if (replay) {
        bullfrog_pos_ += keys.size();
    } else {
        Key resume = keys.back();
        resume.b.push_back('\0');
        mig_.state.drain_cursor = resume;
    }
    scanned_total_ += keys.size();
    migrated_total_ += migrated;
    return {keys.size(), migrated, false, false};
}

DrainReport Drainer::drain_until_done() {
    DrainReport rep;
    rep.started = eng_.now();
    while (true) {
        DrainBatch b = step();
        if (b.done) break;
        ++rep.batches;
        rep.scanned += b.scanned;
        rep.migrated += b.migrated;
        rep.events.push_back({eng_.now(), mig_.state.drain_cursor, b.migrated});
        if (!eng_.config().wall_clock) eng_.set_now(eng_.now() + cfg_.pace);
    }
    rep.finished = eng_.now();
    return rep;
}

}  // namespace slsm
