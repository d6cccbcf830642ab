#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slsm/value.hpp"

namespace slsm {

// Order-preserving key bytes. Lexicographic byte order of encoded keys
// equals the tuple order of (tableID, pk...), and for prefixed keys of
// (oldTableID, oldPk..., newTableID, suffix...).
struct Key {
    std::string b;

    friend auto operator<=>(const Key&, const Key&) = default;

    bool starts_with(const Key& prefix) const {
        return b.size() >= prefix.b.size() && b.compare(0, prefix.b.size(), prefix.b) == 0;
    }

    std::string hex() const;
    static Key from_hex(const std::string& hex);
};

namespace keycodec {

// Layout:
//   table id       4 bytes big-endian
//   int column     tag 0x12, 8 bytes big-endian with sign bit flipped
//   dec column     tag 0x14, 8 bytes big-endian with sign bit flipped
//   str column     tag 0x24, bytes with 0x00 escaped as 0x00 0xFF,
//                  terminated by 0x00 0x01
// A prefixed key is the (possibly truncated) old-table key followed by the
// new table id and the remaining new-pk columns.

void append_table_id(std::string& out, TableId tid);
void append_value(std::string& out, const Value& v);

Key encode_key(TableId tid, std::span<const Value> pk);
Key encode_prefixed_key(TableId old_tid, std::span<const Value> old_pk, TableId new_tid,
                        std::span<const Value> suffix);

// Decoding. `types` gives the expected column types in order.
TableId decode_table_id(const Key& k, size_t* pos);
Value decode_value(const Key& k, ColType type, size_t* pos);
std::vector<Value> decode_values(const Key& k, std::span<const ColType> types, size_t* pos);

// Smallest key strictly greater than every key having `prefix` as a byte
// prefix, or nullopt if the prefix is all 0xFF.
std::optional<Key> prefix_end(const Key& prefix);

// [start, end) region holding every key of a table id.
Key table_region_start(TableId tid);
Key table_region_end(TableId tid);

}  // namespace keycodec
}  // namespace slsm
