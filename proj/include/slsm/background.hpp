#pragma once

#include "slsm/engine.hpp"

namespace slsm {

struct DrainConfig {
    size_t batch_size = 128;
    Tick pace = 1000;  // virtual delay between batches (microseconds)
};

struct DrainBatch {
    size_t scanned = 0;   // source positions visited this batch
    size_t migrated = 0;  // rows actually moved this batch
    bool blocked = false; // lost a lock fight; retry later
    bool done = false;
};

struct DrainProgressEvent {
    Tick at = 0;
    Key cursor;
    size_t rows_migrated = 0;
};

struct DrainReport {
    size_t batches = 0;
    size_t scanned = 0;
    size_t migrated = 0;
    Tick started = 0;
    Tick finished = 0;
    std::vector<DrainProgressEvent> events;
};

// Background drain: injects simulated user transactions over
// not-yet-migrated tuples until the source keyspace is exhausted. One
// drainer per migration; obeys the normal lock protocol.
//
// Cursor semantics differ per strategy: bullfrog replays every source
// position captured at registration time, while the slsm variants walk a
// resumable cursor and skip already-migrated rows entirely.
class Drainer {
public:
    Drainer(Engine& eng, Migration& mig, DrainConfig cfg = {});

    DrainBatch step();
    // Loops step() until a full pass migrates nothing. Advances the virtual
    // clock by `pace` between batches (virtual mode only).
    DrainReport drain_until_done();

    size_t scanned_total() const { return scanned_total_; }
    size_t migrated_total() const { return migrated_total_; }

private:
    Engine& eng_;
    Migration& mig_;
    DrainConfig cfg_;
    size_t bullfrog_pos_ = 0;
    size_t scanned_total_ = 0;
    size_t migrated_total_ = 0;

    std::vector<Key> next_batch();
};

}  // namespace slsm
