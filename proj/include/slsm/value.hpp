#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "slsm/common.hpp"

namespace slsm {

// Fixed-point decimal with two fractional digits. Integer arithmetic keeps
// aggregate sums independent of summation order.
struct Dec {
    int64_t cents = 0;

    friend auto operator<=>(const Dec&, const Dec&) = default;
    friend Dec operator+(Dec a, Dec b) { return Dec{a.cents + b.cents}; }
    friend Dec operator-(Dec a, Dec b) { return Dec{a.cents - b.cents}; }
};

inline Dec dec_from_double(double v) {
    return Dec{static_cast<int64_t>(v * 100.0 + (v >= 0 ? 0.5 : -0.5))};
}

enum class ColType { Int, Dec, Str };

using Value = std::variant<int64_t, Dec, std::string>;

inline ColType value_type(const Value& v) {
    switch (v.index()) {
        case 0: return ColType::Int;
        case 1: return ColType::Dec;
        default: return ColType::Str;
    }
}

std::string value_to_string(const Value& v);
Value value_from_string(ColType type, const std::string& s);

// One table row; columns are stored in descriptor order, primary key
// columns included.
struct RowValue {
    std::vector<Value> columns;

    friend bool operator==(const RowValue&, const RowValue&) = default;
};

}  // namespace slsm
