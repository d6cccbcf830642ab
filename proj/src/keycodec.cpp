#include "slsm/keycodec.hpp"

#include <cstring>

namespace slsm {

namespace {

constexpr char kTagInt = 0x12;
constexpr char kTagDec = 0x14;
constexpr char kTagStr = 0x24;

void append_u32be(std::string& out, uint32_t v) {
    out.push_back(static_cast<char>(v >> 24));
    out.push_back(static_cast<char>(v >> 16));
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v));
}

void append_u64be(std::string& out, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<char>(v >> shift));
    }
}

uint64_t read_u64be(const Key& k, size_t pos) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v = (v << 8) | static_cast<uint8_t>(k.b[pos + i]);
    }
    return v;
}

}  // namespace

std::string Key::hex() const {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(b.size() * 2);
    for (unsigned char c : b) {
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0xf]);
    }
    return out;
}

Key Key::from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw EncodingError("odd hex key length");
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw EncodingError("bad hex digit in key");
    };
    Key k;
    k.b.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        k.b.push_back(static_cast<char>((nib(hex[i]) << 4) | nib(hex[i + 1])));
    }
    return k;
}

namespace keycodec {

void append_table_id(std::string& out, TableId tid) { append_u32be(out, tid); }

void append_value(std::string& out, const Value& v) {
    switch (v.index()) {
        case 0:
            out.push_back(kTagInt);
            append_u64be(out, static_cast<uint64_t>(std::get<int64_t>(v)) ^ 0x8000000000000000ull);
            break;
        case 1:
            out.push_back(kTagDec);
            append_u64be(out,
                         static_cast<uint64_t>(std::get<Dec>(v).cents) ^ 0x8000000000000000ull);
            break;
        default: {
            out.push_back(kTagStr);
            for (char c : std::get<std::string>(v)) {
                out.push_back(c);
                if (c == '\x00') out.push_back('\xFF');
            }
            out.push_back('\x00');
            out.push_back('\x01');
            break;
        }
    }
}

Key encode_key(TableId tid, std::span<const Value> pk) {
    Key k;
    append_table_id(k.b, tid);
    for (const Value& v : pk) append_value(k.b, v);
    return k;
}

Key encode_prefixed_key(TableId old_tid, std::span<const Value> old_pk, TableId new_tid,
                        std::span<const Value> suffix) {
    Key k = encode_key(old_tid, old_pk);
    append_table_id(k.b, new_tid);
    for (const Value& v : suffix) append_value(k.b, v);
    return k;
}

TableId decode_table_id(const Key& k, size_t* pos) {
    if (*pos + 4 > k.b.size()) throw EncodingError("key too short for table id");
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v = (v << 8) | static_cast<uint8_t>(k.b[*pos + i]);
    }
    *pos += 4;
    return v;
}

Value decode_value(const Key& k, ColType type, size_t* pos) {
    if (*pos >= k.b.size()) throw EncodingError("key too short for value");
    const char tag = k.b[*pos];
    switch (type) {
        case ColType::Int: {
            if (tag != kTagInt || *pos + 9 > k.b.size()) throw EncodingError("bad int column");
            uint64_t raw = read_u64be(k, *pos + 1) ^ 0x8000000000000000ull;
            *pos += 9;
            return static_cast<int64_t>(raw);
        }
        case ColType::Dec: {
            if (tag != kTagDec || *pos + 9 > k.b.size()) throw EncodingError("bad dec column");
            uint64_t raw = read_u64be(k, *pos + 1) ^ 0x8000000000000000ull;
            *pos += 9;
            return Dec{static_cast<int64_t>(raw)};
        }
        default: {
            if (tag != kTagStr) throw EncodingError("bad str column");
            std::string s;
            size_t i = *pos + 1;
            while (true) {
                if (i >= k.b.size()) throw EncodingError("unterminated str column");
                char c = k.b[i];
                if (c == '\x00') {
                    if (i + 1 >= k.b.size()) throw EncodingError("unterminated str column");
                    char next = k.b[i + 1];
                    if (next == '\x01') {
                        i += 2;
                        break;
                    }
                    if (next != '\xFF') throw EncodingError("bad str escape");
                    s.push_back('\x00');
                    i += 2;
                    continue;
                }
                s.push_back(c);
                ++i;
            }
            *pos = i;
            return s;
        }
    }
}

std::vector<Value> decode_values(const Key& k, std::span<const ColType> types, size_t* pos) {
    std::vector<Value> out;
    out.reserve(types.size());
    for (ColType t : types) out.push_back(decode_value(k, t, pos));
    return out;
}

std::optional<Key> prefix_end(const Key& prefix) {
    Key k = prefix;
    while (!k.b.empty()) {
        if (static_cast<uint8_t>(k.b.back()) != 0xFF) {
            k.b.back() = static_cast<char>(static_cast<uint8_t>(k.b.back()) + 1);
            return k;
        }
        k.b.pop_back();
    }
    return std::nullopt;
}

Key table_region_start(TableId tid) {
    Key k;
    append_u32be(k.b, tid);
    return k;
}

Key table_region_end(TableId tid) {
    Key k;
    append_u32be(k.b, tid + 1);
    return k;
}

}  // namespace keycodec
}  // namespace slsm
