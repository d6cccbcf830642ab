#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace slsm {

struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CatalogError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RoutingViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstraintError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RewriteUnsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Deterministic RNG. std::mt19937_64 raw output is portable; the
// <random> distributions are not, so sampling is done by hand here.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    uint64_t next() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, n)
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }

    // uniform in [lo, hi] inclusive
    int64_t range(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

private:
    uint64_t state_;
};

using NodeId = int;
using TableId = uint32_t;
using TxnId = uint64_t;

// Simulated time in microseconds.
using Tick = int64_t;

inline Tick ms_to_ticks(double ms) { return static_cast<Tick>(ms * 1000.0 + 0.5); }
inline double ticks_to_ms(Tick t) { return static_cast<double>(t) / 1000.0; }

}  // namespace slsm
